//! End-to-end behavior of the `traceineq` binary: exit-code contract,
//! report determinism, witness replay, and the file formats.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn traceineq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_traceineq"))
        .current_dir(dir)
        .env_remove("TRACEINEQ_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) {
    fs::write(dir.join(name), contents).unwrap();
}

#[test]
fn default_campaign_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run-campaign",
        "--trials",
        "25",
        "--dims",
        "2,4",
        "--out",
        "report.json",
    ];
    let first = traceineq(dir.path(), &args);
    assert!(first.status.success(), "{:?}", first);
    let bytes1 = fs::read(dir.path().join("report.json")).unwrap();
    let second = traceineq(dir.path(), &args);
    assert!(second.status.success());
    let bytes2 = fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(bytes1, bytes2, "same config must give identical reports");

    // A different seed must change the report.
    let third = traceineq(
        dir.path(),
        &[
            "run-campaign",
            "--trials",
            "25",
            "--dims",
            "2,4",
            "--seed",
            "7",
            "--out",
            "report.json",
        ],
    );
    assert!(third.status.success());
    let bytes3 = fs::read(dir.path().join("report.json")).unwrap();
    assert_ne!(bytes1, bytes3);
}

#[test]
fn seed_env_var_acts_as_default_only() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["run-campaign", "--trials", "10", "--dims", "2,3", "--out", "r.json"];
    let out_env = Command::new(env!("CARGO_BIN_EXE_traceineq"))
        .current_dir(dir.path())
        .env("TRACEINEQ_SEED", "9")
        .args(base)
        .output()
        .unwrap();
    assert!(out_env.status.success());
    let from_env = fs::read(dir.path().join("r.json")).unwrap();

    let mut with_flag = base.to_vec();
    with_flag.extend(["--seed", "9"]);
    let out_flag = traceineq(dir.path(), &with_flag);
    assert!(out_flag.status.success());
    let from_flag = fs::read(dir.path().join("r.json")).unwrap();
    assert_eq!(from_env, from_flag);

    // The flag beats the environment.
    let out_both = Command::new(env!("CARGO_BIN_EXE_traceineq"))
        .current_dir(dir.path())
        .env("TRACEINEQ_SEED", "1234")
        .args(with_flag)
        .output()
        .unwrap();
    assert!(out_both.status.success());
    assert_eq!(from_flag, fs::read(dir.path().join("r.json")).unwrap());
}

#[test]
fn invalid_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = traceineq(dir.path(), &["run-campaign", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("trials"), "stderr: {msg}");

    write(dir.path(), "bad.json", r#"{"trialz": 3}"#);
    let out = traceineq(dir.path(), &["run-campaign", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trialz"));
}

#[test]
fn single_check_config_yields_single_report_section() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "cfg.json",
        r#"{"trials": 10, "dim_range": [2, 3], "checks": ["homogeneity"], "report_path": "r.json"}"#,
    );
    let out = traceineq(dir.path(), &["run-campaign", "--config", "cfg.json"]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    let checks = report["checks"].as_object().unwrap();
    assert_eq!(checks.len(), 1);
    assert!(checks.contains_key("homogeneity"));
}

#[test]
fn forced_failures_exit_one_and_replay_to_recorded_slack() {
    let dir = tempfile::tempdir().unwrap();
    // An absurd tolerance turns harmless round-off into failures, which
    // exercises the witness pipeline end to end.
    let out = traceineq(
        dir.path(),
        &[
            "run-campaign",
            "--checks",
            "homogeneity",
            "--trials",
            "10",
            "--dims",
            "2,3",
            "--tol",
            "1e-300",
            "--out",
            "r.json",
            "--witness-dir",
            "w",
        ],
    );
    assert_eq!(out.status.code(), Some(1), "{out:?}");

    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    let failures = report["checks"]["homogeneity"]["failures"].as_array().unwrap();
    assert!(!failures.is_empty());
    let witness_path = failures[0]["witness"].as_str().expect("witness written");

    let replayed = traceineq(
        dir.path(),
        &["check-single", "homogeneity", "--witness", witness_path],
    );
    // At the default tolerance the replay passes, and the binary enforces the
    // 1e-12 agreement between recorded and replayed slack internally.
    assert!(replayed.status.success(), "{replayed:?}");
    let text = String::from_utf8_lossy(&replayed.stdout);
    assert!(text.contains("replay agreement"), "stdout: {text}");
    assert!(text.contains("PASS"));
}

#[test]
fn check_single_runs_identity_monotonicity_from_parts() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "h.json",
        r#"{"dim":2,"entries":[[[0.4,0],[0,0.1]],[[0,-0.1],[-0.2,0]]]}"#,
    );
    write(
        dir.path(),
        "y.json",
        r#"{"dim":2,"entries":[[[1.5,0],[0,0]],[[0,0],[0.5,0]]]}"#,
    );
    write(
        dir.path(),
        "id.json",
        r#"{"form":"kraus_cp","kraus":[{"dim":2,"entries":[[[1,0],[0,0]],[[0,0],[1,0]]]}]}"#,
    );
    let out = traceineq(
        dir.path(),
        &[
            "check-single",
            "monotonicity",
            "--h",
            "h.json",
            "--y",
            "y.json",
            "--map",
            "id.json",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS"), "stdout: {text}");
}

#[test]
fn check_single_reports_parse_location() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "broken.json", "{\"dim\": 2,\n  broken\n}");
    let out = traceineq(
        dir.path(),
        &[
            "check-single",
            "golden_thompson",
            "--a",
            "broken.json",
            "--b",
            "broken.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("byte"), "stderr: {msg}");
    assert!(msg.contains("line 2"), "stderr: {msg}");
}

#[test]
fn gibbs_solve_zero_exponent() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "k.json",
        r#"{"dim":2,"entries":[[[0,0],[0,0]],[[0,0],[0,0]]]}"#,
    );
    let out = traceineq(
        dir.path(),
        &[
            "gibbs-solve",
            "--k",
            "k.json",
            "--out-maximizer",
            "x.json",
            "--trace-csv",
            "trace.csv",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    // value = log 2.
    assert!(text.contains("0.693147180560"), "stdout: {text}");

    // The maximizer round-trips as a density matrix: I/2.
    let x: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("x.json")).unwrap()).unwrap();
    assert_eq!(x["dim"], 2);
    let e00 = x["entries"][0][0][0].as_f64().unwrap();
    assert!((e00 - 0.5).abs() < 1e-12);

    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("step,objective,gap\n"));
}

#[test]
fn gibbs_solve_recovers_w_as_maximizer_for_zero_k() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "k.json",
        r#"{"dim":2,"entries":[[[0,0],[0,0]],[[0,0],[0,0]]]}"#,
    );
    write(
        dir.path(),
        "w.json",
        r#"{"dim":2,"entries":[[[0.25,0],[0,0]],[[0,0],[0.75,0]]]}"#,
    );
    let out = traceineq(
        dir.path(),
        &[
            "gibbs-solve",
            "--k",
            "k.json",
            "--w",
            "w.json",
            "--out-maximizer",
            "x.json",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    let x: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("x.json")).unwrap()).unwrap();
    let e00 = x["entries"][0][0][0].as_f64().unwrap();
    let e11 = x["entries"][1][1][0].as_f64().unwrap();
    assert!((e00 - 0.25).abs() < 1e-12, "maximizer should equal W");
    assert!((e11 - 0.75).abs() < 1e-12);
}

#[test]
fn gibbs_solve_with_reference_state_and_ascent_agreement() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "k.json",
        r#"{"dim":2,"entries":[[[0.8,0],[0.2,0.1]],[[0.2,-0.1],[-0.3,0]]]}"#,
    );
    write(
        dir.path(),
        "w.json",
        r#"{"dim":2,"entries":[[[2.0,0],[0,0]],[[0,0],[0.7,0]]]}"#,
    );
    let out = traceineq(
        dir.path(),
        &["gibbs-solve", "--k", "k.json", "--w", "w.json"],
    );
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(!text.contains("NOT CONVERGED"), "stdout: {text}");
}

#[test]
fn csv_slack_stream_has_the_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = traceineq(
        dir.path(),
        &[
            "run-campaign",
            "--checks",
            "golden_thompson",
            "--trials",
            "5",
            "--dims",
            "2,2",
            "--out",
            "r.json",
            "--csv",
            "s.csv",
        ],
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.starts_with("instance_id,check,slack,scale,normalized\n"));
    assert_eq!(csv.lines().count(), 6);
}
