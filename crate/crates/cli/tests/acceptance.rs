//! Acceptance suite: one test per campaign-level criterion, each printing a
//! PASS/FAIL line with its key statistics. Tolerances are pinned in code.
//!
//! Run with `cargo test -p traceineq-cli --test acceptance -- --nocapture`
//! to see every line.

use traceineq_cli::config::{CampaignConfig, CheckKind};
use traceineq_cli::run_campaign;
use traceineq_core::hermitian::{HermitianMatrix, PositiveDefiniteMatrix};
use traceineq_core::ineq::{
    check_concavity, check_monotonicity, check_superadditivity,
};
use traceineq_core::maps::{choi_spectrum, schwarz_probe, PositiveMapRep};
use traceineq_core::sample::{random_hermitian, random_pd, trial_rng};

fn acceptance_config(check: CheckKind, trials: usize) -> (tempfile::TempDir, CampaignConfig) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CampaignConfig {
        seed: 42,
        trials,
        dim_range: (2, 8),
        checks: vec![check],
        report_path: dir.path().join("report.json"),
        witness_dir: dir.path().join("witnesses"),
        ..CampaignConfig::default()
    };
    (dir, cfg)
}

fn report_failures(summary: &traceineq_cli::CheckSummary) -> String {
    summary
        .failures
        .iter()
        .take(5)
        .map(|f| format!("{} [{}] normalized {:.3e}", f.instance_id, f.metric, f.normalized))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Monotonicity of the trace functional under unital positive maps:
/// 10,000 instances per dimension pair in {2..8}^2 across the unital CP,
/// positive non-CP, transpose, and block-embedding families; every
/// non-excluded normalized slack >= -1e-8 and the exclusion rate stays
/// under 5%.
#[test]
fn monotonicity_campaign() {
    let pairs = 7 * 7;
    let (_dir, cfg) = acceptance_config(CheckKind::Monotonicity, 10_000 * pairs);
    let (report, _) = run_campaign(&cfg).expect("campaign runs");
    let s = &report.checks[&CheckKind::Monotonicity];

    let attempted = s.count + s.excluded;
    let pass = s.failures.is_empty()
        && attempted == 10_000 * pairs
        && s.min_normalized.unwrap() >= -1e-8
        && s.exclusion_rate() < 0.05;
    println!(
        "ACCEPTANCE monotonicity-campaign: {} ({} instances over {} dimension pairs, \
         min normalized slack {:.3e}, exclusion rate {:.4}%, {} failures)",
        if pass { "PASS" } else { "FAIL" },
        attempted,
        pairs,
        s.min_normalized.unwrap(),
        100.0 * s.exclusion_rate(),
        s.failures.len()
    );
    assert!(pass, "failures: {}", report_failures(s));
}

/// Concavity recovered from monotonicity through the block embedding: the
/// block-embedding monotonicity slack, the superadditivity slack, and the
/// direct concavity slack agree pairwise within 1e-9 * scale on 1,000
/// instances, and all stay above -1e-8 normalized.
#[test]
fn concavity_from_monotonicity() {
    let mut worst_route_gap = 0.0f64;
    let mut worst_slack = f64::INFINITY;
    for trial in 0..1000u64 {
        let n = 2 + (trial % 7) as usize;
        let mut rng = trial_rng(42, 7001, trial);
        let h = random_hermitian(n, 2.0, &mut rng).unwrap();
        let y1 = random_pd(n, 1e4, &mut rng).unwrap();
        let y2 = random_pd(n, 1e4, &mut rng).unwrap();

        let embed = PositiveMapRep::block_embed_map(n, 2).unwrap();
        let stacked = PositiveDefiniteMatrix::new(HermitianMatrix::direct_sum(&[
            y1.base(),
            y2.base(),
        ]))
        .unwrap();
        let mono = check_monotonicity(&h, &stacked, &embed).unwrap();
        let sup = check_superadditivity(&h, &y1, &y2).unwrap();
        // Concavity of (2Y1, 2Y2) at the midpoint equals superadditivity of
        // (Y1, Y2) by degree-one homogeneity.
        let conc = check_concavity(&h, &y1.scale(2.0).unwrap(), &y2.scale(2.0).unwrap(), 0.5)
            .unwrap();

        let scale = mono.scale.max(sup.scale).max(conc.direct.scale);
        let route_gap = (mono.slack - sup.slack)
            .abs()
            .max((mono.slack - conc.direct.slack).abs())
            .max((sup.slack - conc.direct.slack).abs())
            / scale;
        worst_route_gap = worst_route_gap.max(route_gap);
        worst_slack = worst_slack
            .min(mono.normalized())
            .min(sup.normalized())
            .min(conc.direct.normalized());
    }
    let pass = worst_route_gap <= 1e-9 && worst_slack >= -1e-8;
    println!(
        "ACCEPTANCE concavity-from-monotonicity: {} (1000 instances, worst pairwise route gap \
         {worst_route_gap:.3e}, worst normalized slack {worst_slack:.3e})",
        if pass { "PASS" } else { "FAIL" },
    );
    assert!(pass);
}

/// Gibbs duality on 1,000 random problems: every sampled objective stays
/// below the value within 1e-9, the closed-form maximizer achieves the value
/// within 1e-8, and mirror ascent reaches within 1e-4 of the value on at
/// least 99% of instances with the rest flagged by id.
#[test]
fn gibbs_duality() {
    let (_dir, cfg) = acceptance_config(CheckKind::GibbsDuality, 1000);
    let (report, _) = run_campaign(&cfg).expect("campaign runs");
    let s = &report.checks[&CheckKind::GibbsDuality];

    let converged = s.count - s.flagged;
    let pass = s.failures.is_empty()
        && s.count == 1000
        && converged as f64 >= 0.99 * s.count as f64
        && s.flagged_ids.len() == s.flagged.min(100);
    println!(
        "ACCEPTANCE gibbs-duality: {} (1000 problems, maximizer+duality failures {}, \
         ascent converged {}/{}, flagged ids listed {})",
        if pass { "PASS" } else { "FAIL" },
        s.failures.len(),
        converged,
        s.count,
        s.flagged_ids.len()
    );
    assert!(pass, "failures: {}", report_failures(s));
}

/// Data-processing inequality over positive trace-preserving families,
/// including the pure transpose: 10,000 instances with normalized slack
/// >= -1e-8, and the transpose instances additionally vanish within 1e-9.
#[test]
fn dpi_campaign() {
    let (_dir, cfg) = acceptance_config(CheckKind::Dpi, 10_000);
    let (report, _) = run_campaign(&cfg).expect("campaign runs");
    let s = &report.checks[&CheckKind::Dpi];

    let pass = s.failures.is_empty()
        && s.count + s.excluded == 10_000
        && s.min_normalized.unwrap() >= -1e-8
        && s.exclusion_rate() < 0.05;
    println!(
        "ACCEPTANCE dpi-campaign: {} (10000 instances, min normalized slack {:.3e}, \
         exclusions {}, failures {})",
        if pass { "PASS" } else { "FAIL" },
        s.min_normalized.unwrap(),
        s.excluded,
        s.failures.len()
    );
    assert!(pass, "failures: {}", report_failures(s));
}

/// The proof-chain audit on 1,000 instances: the adjoint pairing identity
/// holds to 1e-10 * ||W|| * ||H|| and the chain-dominance slack stays above
/// -1e-8 (the chain's DPI step is judged alongside).
#[test]
fn proof_chain_audit() {
    let (_dir, cfg) = acceptance_config(CheckKind::ProofChain, 1000);
    let (report, _) = run_campaign(&cfg).expect("campaign runs");
    let s = &report.checks[&CheckKind::ProofChain];

    let pass = s.failures.is_empty() && s.count + s.excluded == 1000;
    println!(
        "ACCEPTANCE proof-chain-audit: {} (1000 instances x 3 sampled states, \
         min normalized dominance slack {:.3e}, failures {})",
        if pass { "PASS" } else { "FAIL" },
        s.min_normalized.unwrap(),
        s.failures.len()
    );
    assert!(pass, "failures: {}", report_failures(s));
}

/// Degree-one homogeneity as an exact identity: relative deviation at most
/// 1e-10 across 10,000 (H, Y, t) draws. Doubles as a health check of the
/// numerical kernel.
#[test]
fn homogeneity() {
    let (_dir, cfg) = acceptance_config(CheckKind::Homogeneity, 10_000);
    let (report, _) = run_campaign(&cfg).expect("campaign runs");
    let s = &report.checks[&CheckKind::Homogeneity];

    let worst = -s.min_normalized.unwrap();
    let pass = s.failures.is_empty() && s.count == 10_000 && worst <= 1e-10;
    println!(
        "ACCEPTANCE homogeneity: {} (10000 draws, worst relative deviation {worst:.3e})",
        if pass { "PASS" } else { "FAIL" },
    );
    assert!(pass, "failures: {}", report_failures(s));
}

/// Finite-difference curvature on 1,000 random interior paths: the second
/// derivatives of both F and log F stay below 1e-6 * scale and the
/// log-curvature identity holds within 1e-4 relative.
#[test]
fn curvature() {
    let (_dir, cfg) = acceptance_config(CheckKind::Curvature, 1000);
    let (report, _) = run_campaign(&cfg).expect("campaign runs");
    let s = &report.checks[&CheckKind::Curvature];

    let pass = s.failures.is_empty() && s.count + s.excluded == 1000;
    println!(
        "ACCEPTANCE curvature: {} (1000 paths, max normalized f-curvature {:.3e}, failures {})",
        if pass { "PASS" } else { "FAIL" },
        -s.min_normalized.unwrap(),
        s.failures.len()
    );
    assert!(pass, "failures: {}", report_failures(s));
}

/// The class hierarchy: the transpose is certified non-CP (Choi minimum
/// eigenvalue -1 within 1e-10, hence <= -0.99) and non-Schwarz (a violation
/// witness within 1,000 probes), while every sampled unital CP map passes
/// the Schwarz probe.
#[test]
fn class_hierarchy() {
    // Direct subchecks at n = 2.
    let spec = choi_spectrum(&PositiveMapRep::transpose(2)).unwrap();
    let choi_exact = (spec[0] + 1.0).abs() <= 1e-10;
    let choi_negative = spec[0] <= -0.99;
    let probe = schwarz_probe(&PositiveMapRep::transpose(2), 1000, 42, 1e-10).unwrap();
    let transpose_violation = !probe.witnessed && probe.witness.is_some();

    // Campaign over sampled unital CP maps (plus the two synthetic trials).
    let (_dir, cfg) = acceptance_config(CheckKind::ClassHierarchy, 500);
    let (report, _) = run_campaign(&cfg).expect("campaign runs");
    let s = &report.checks[&CheckKind::ClassHierarchy];
    let cp_all_pass = s.failures.is_empty();

    let pass = choi_exact && choi_negative && transpose_violation && cp_all_pass;
    println!(
        "ACCEPTANCE class-hierarchy: {} (transpose Choi min eig {:.12}, Schwarz violation \
         {:.3e} found, {} sampled CP maps all Schwarz-witnessed)",
        if pass { "PASS" } else { "FAIL" },
        spec[0],
        probe.worst_violation,
        s.count - 2
    );
    assert!(pass, "failures: {}", report_failures(s));
}

/// Two runs of the default campaign with the same seed produce byte-identical
/// reports.
#[test]
fn determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CampaignConfig {
        report_path: dir.path().join("report.json"),
        witness_dir: dir.path().join("witnesses"),
        ..CampaignConfig::default()
    };
    let (first, _) = run_campaign(&cfg).expect("campaign runs");
    let (second, _) = run_campaign(&cfg).expect("campaign runs");
    let bytes1 = first.to_json_bytes();
    let bytes2 = second.to_json_bytes();
    let pass = bytes1 == bytes2;
    println!(
        "ACCEPTANCE determinism: {} (default campaign, {} report bytes, two runs identical)",
        if pass { "PASS" } else { "FAIL" },
        bytes1.len()
    );
    assert!(pass);
    assert_eq!(first.total_failures, 0, "default campaign must pass");
}
