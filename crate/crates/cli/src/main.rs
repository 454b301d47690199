use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use traceineq_cli::config::{CampaignConfig, CheckKind, MapFamily, PartialConfig};
use traceineq_cli::report::{csv_bytes, write_atomic};
use traceineq_cli::witness::{replay, Witness, WitnessInputs};
use traceineq_cli::{load_json, run_campaign, CliError};
use traceineq_core::hermitian::{DensityMatrix, HermitianMatrix, PositiveDefiniteMatrix};
use traceineq_core::maps::PositiveMapRep;
use traceineq_core::variational::{
    gibbs_maximizer, gibbs_objective, gibbs_value, mirror_ascent, GibbsProblem,
};

/// Numerical verification campaigns for the trace functional
/// `F(H, Y) = Tr exp(H + log Y)` and its inequality structure.
#[derive(Parser)]
#[command(name = "traceineq", version, about)]
struct Cli {
    /// Worker threads for instance evaluation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded instance sweeps through every enabled checker and write a
    /// JSON report (plus optional CSV slack stream and failure witnesses).
    RunCampaign(RunCampaignArgs),
    /// Recompute a single check on a serialized witness or on explicit
    /// instance files, and print its slack.
    CheckSingle(CheckSingleArgs),
    /// Solve one Gibbs variational problem: value, closed-form maximizer, and
    /// the independent mirror-ascent confirmation with its trace.
    GibbsSolve(GibbsSolveArgs),
}

#[derive(Args)]
struct RunCampaignArgs {
    /// Campaign config file (JSON). Flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Base seed (default: TRACEINEQ_SEED or 42).
    #[arg(long)]
    seed: Option<u64>,

    /// Default trials per check.
    #[arg(long)]
    trials: Option<usize>,

    /// Dimension range "lo,hi" (inclusive).
    #[arg(long, value_parser = parse_dims)]
    dims: Option<(usize, usize)>,

    /// Tolerance override applied to every enabled check.
    #[arg(long)]
    tol: Option<f64>,

    /// Report output path.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write the per-instance slack stream as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Directory for failure witnesses.
    #[arg(long)]
    witness_dir: Option<PathBuf>,

    /// Comma-separated subset of checks to run.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,

    /// Comma-separated map families to include.
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<String>>,
}

#[derive(Args)]
struct CheckSingleArgs {
    /// Check name (e.g. monotonicity, dpi, concavity).
    check: String,

    /// Serialized witness to replay.
    #[arg(long)]
    witness: Option<PathBuf>,

    /// Metric to evaluate when building the instance from parts.
    #[arg(long)]
    metric: Option<String>,

    #[arg(long)]
    h: Option<PathBuf>,
    #[arg(long)]
    y: Option<PathBuf>,
    #[arg(long)]
    y1: Option<PathBuf>,
    #[arg(long)]
    y2: Option<PathBuf>,
    #[arg(long)]
    x: Option<PathBuf>,
    #[arg(long)]
    a: Option<PathBuf>,
    #[arg(long)]
    b: Option<PathBuf>,
    /// Map file (tagged-union JSON).
    #[arg(long)]
    map: Option<PathBuf>,
    /// State W for the proof-chain check.
    #[arg(long)]
    w_state: Option<PathBuf>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct GibbsSolveArgs {
    /// Hermitian exponent K (matrix JSON).
    #[arg(long)]
    k: PathBuf,

    /// Optional positive definite reference W.
    #[arg(long)]
    w: Option<PathBuf>,

    /// Ascent start (density matrix JSON; default: maximally mixed).
    #[arg(long)]
    x0: Option<PathBuf>,

    #[arg(long, default_value_t = 500)]
    steps: usize,

    #[arg(long, default_value_t = 0.5)]
    rate: f64,

    /// Write the closed-form maximizer here.
    #[arg(long)]
    out_maximizer: Option<PathBuf>,

    /// Write the ascent trace here as "step,objective,gap" CSV.
    #[arg(long)]
    trace_csv: Option<PathBuf>,
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected \"lo,hi\"".to_string());
    }
    let lo = parts[0].trim().parse().map_err(|e| format!("lo: {e}"))?;
    let hi = parts[1].trim().parse().map_err(|e| format!("hi: {e}"))?;
    Ok((lo, hi))
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("TRACEINEQ_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map(Some)
            .map_err(|e| CliError::Config(format!("TRACEINEQ_SEED: {e}"))),
        Err(_) => Ok(None),
    }
}

fn resolve_config(args: &RunCampaignArgs) -> Result<CampaignConfig, CliError> {
    let partial: PartialConfig = match &args.config {
        Some(path) => load_json(path)?,
        None => PartialConfig::default(),
    };
    let mut cfg = partial.resolve(env_seed()?);
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
        cfg.trials_override.clear();
    }
    if let Some(dims) = args.dims {
        cfg.dim_range = dims;
    }
    if let Some(tol) = args.tol {
        cfg.tol_override = CheckKind::ALL.iter().map(|&k| (k, tol)).collect();
    }
    if let Some(out) = &args.out {
        cfg.report_path = out.clone();
    }
    if let Some(csv) = &args.csv {
        cfg.csv_path = Some(csv.clone());
    }
    if let Some(dir) = &args.witness_dir {
        cfg.witness_dir = dir.clone();
    }
    if let Some(checks) = &args.checks {
        cfg.checks = checks
            .iter()
            .map(|s| CheckKind::parse(s))
            .collect::<Result<_, _>>()?;
    }
    if let Some(families) = &args.families {
        cfg.map_families = families
            .iter()
            .map(|s| MapFamily::parse(s))
            .collect::<Result<_, _>>()?;
    }
    Ok(cfg)
}

fn cmd_run_campaign(args: &RunCampaignArgs) -> Result<(), CliError> {
    let cfg = resolve_config(args)?;
    let started = Instant::now();
    let (report, csv) = run_campaign(&cfg)?;
    write_atomic(&cfg.report_path, &report.to_json_bytes())?;
    if let Some(csv_path) = &cfg.csv_path {
        write_atomic(csv_path, &csv_bytes(&csv))?;
    }
    print!("{}", report.render_text());
    println!("report: {}", cfg.report_path.display());
    eprintln!("elapsed: {:.2}s", started.elapsed().as_secs_f64());
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failures {
            count: report.total_failures,
        })
    }
}

fn witness_from_parts(args: &CheckSingleArgs) -> Result<Witness, CliError> {
    let kind = CheckKind::parse(&args.check)?;
    let need = |opt: &Option<PathBuf>, name: &str| -> Result<PathBuf, CliError> {
        opt.clone().ok_or_else(|| {
            CliError::Config(format!("check '{}' needs --{name}", args.check))
        })
    };
    let inputs = match kind {
        CheckKind::Monotonicity => WitnessInputs::Monotonicity {
            h: load_json::<HermitianMatrix>(&need(&args.h, "h")?)?,
            y: load_json::<PositiveDefiniteMatrix>(&need(&args.y, "y")?)?,
            map: load_json::<PositiveMapRep>(&need(&args.map, "map")?)?,
        },
        CheckKind::Dpi => WitnessInputs::Dpi {
            x: load_json::<DensityMatrix>(&need(&args.x, "x")?)?,
            y: load_json::<DensityMatrix>(&need(&args.y, "y")?)?,
            map: load_json::<PositiveMapRep>(&need(&args.map, "map")?)?,
        },
        CheckKind::ProofChain => WitnessInputs::ProofChain {
            h: load_json::<HermitianMatrix>(&need(&args.h, "h")?)?,
            y: load_json::<PositiveDefiniteMatrix>(&need(&args.y, "y")?)?,
            map: load_json::<PositiveMapRep>(&need(&args.map, "map")?)?,
            w: load_json::<DensityMatrix>(&need(&args.w_state, "w-state")?)?,
        },
        CheckKind::Superadditivity => WitnessInputs::Superadditivity {
            h: load_json::<HermitianMatrix>(&need(&args.h, "h")?)?,
            y1: load_json::<PositiveDefiniteMatrix>(&need(&args.y1, "y1")?)?,
            y2: load_json::<PositiveDefiniteMatrix>(&need(&args.y2, "y2")?)?,
        },
        CheckKind::Homogeneity => WitnessInputs::Homogeneity {
            h: load_json::<HermitianMatrix>(&need(&args.h, "h")?)?,
            y: load_json::<PositiveDefiniteMatrix>(&need(&args.y, "y")?)?,
            t: args
                .t
                .ok_or_else(|| CliError::Config("homogeneity needs --t".to_string()))?,
        },
        CheckKind::Concavity => WitnessInputs::Concavity {
            h: load_json::<HermitianMatrix>(&need(&args.h, "h")?)?,
            y1: load_json::<PositiveDefiniteMatrix>(&need(&args.y1, "y1")?)?,
            y2: load_json::<PositiveDefiniteMatrix>(&need(&args.y2, "y2")?)?,
            lambda: args
                .lambda
                .ok_or_else(|| CliError::Config("concavity needs --lambda".to_string()))?,
        },
        CheckKind::GoldenThompson => WitnessInputs::GoldenThompson {
            a: load_json::<HermitianMatrix>(&need(&args.a, "a")?)?,
            b: load_json::<HermitianMatrix>(&need(&args.b, "b")?)?,
        },
        other => {
            return Err(CliError::Config(format!(
                "check '{other}' is replayed from --witness files only"
            )))
        }
    };
    let metric = args.metric.clone().unwrap_or_else(|| {
        match kind {
            CheckKind::Homogeneity => "deviation",
            _ => "slack",
        }
        .to_string()
    });
    Ok(Witness {
        instance_id: "ad-hoc".to_string(),
        metric,
        slack: f64::NAN,
        scale: f64::NAN,
        inputs,
    })
}

fn cmd_check_single(args: &CheckSingleArgs) -> Result<(), CliError> {
    let (witness, recorded) = match &args.witness {
        Some(path) => {
            let w: Witness = load_json(path)?;
            let expected = CheckKind::parse(&args.check)?;
            if w.inputs.check() != expected {
                return Err(CliError::Config(format!(
                    "witness holds a '{}' instance, not '{}'",
                    w.inputs.check(),
                    expected
                )));
            }
            (w, true)
        }
        None => (witness_from_parts(args)?, false),
    };
    let outcome = replay(&witness)?;
    println!("check:      {}", witness.inputs.check());
    println!("instance:   {}", witness.instance_id);
    println!("metric:     {}", witness.metric);
    println!(
        "slack:      {:e} (scale {:e}, normalized {:e})",
        outcome.slack,
        outcome.scale,
        outcome.slack / outcome.scale
    );
    if recorded {
        let agreement = (outcome.slack - witness.slack).abs();
        println!(
            "recorded:   {:e} -> replay agreement {:e}",
            witness.slack, agreement
        );
        if agreement > 1e-12 {
            return Err(CliError::Check(format!(
                "replayed slack deviates from the recorded one by {agreement:e}"
            )));
        }
    }
    println!(
        "result:     {} (tolerance {:e})",
        if outcome.pass { "PASS" } else { "FAIL" },
        outcome.tol
    );
    if outcome.pass {
        Ok(())
    } else {
        Err(CliError::Failures { count: 1 })
    }
}

fn cmd_gibbs_solve(args: &GibbsSolveArgs) -> Result<(), CliError> {
    let check = |e: traceineq_core::Error| CliError::Check(e.to_string());
    let k: HermitianMatrix = load_json(&args.k)?;
    let w: Option<PositiveDefiniteMatrix> =
        args.w.as_ref().map(|p| load_json(p)).transpose()?;
    let problem = GibbsProblem::new(k, w).map_err(check)?;
    let n = problem.dim();
    let x0 = match &args.x0 {
        Some(path) => load_json::<DensityMatrix>(path)?,
        None => DensityMatrix::normalize(
            &PositiveDefiniteMatrix::new(HermitianMatrix::identity(n)).map_err(check)?,
        )
        .map_err(check)?,
    };

    let value = gibbs_value(&problem).map_err(check)?;
    let star = gibbs_maximizer(&problem).map_err(check)?;
    let star_obj = gibbs_objective(&star, &problem).map_err(check)?;
    let run = mirror_ascent(&problem, &x0, args.steps, args.rate).map_err(check)?;

    println!("value:               {value:.12}");
    println!(
        "maximizer objective: {star_obj:.12} (gap {:.3e})",
        (value - star_obj).abs()
    );
    println!(
        "mirror ascent:       {} steps, final gap {:.3e}{}",
        run.trace.len() - 1,
        run.final_gap,
        if run.converged { "" } else { "  [NOT CONVERGED]" }
    );
    println!(
        "closed form vs ascent objective gap: {:.3e}",
        (star_obj - run.trace.last().expect("nonempty trace").objective).abs()
    );

    if let Some(path) = &args.out_maximizer {
        let mut bytes = serde_json::to_vec_pretty(&star).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        bytes.push(b'\n');
        write_atomic(path, &bytes)?;
        println!("wrote maximizer: {}", path.display());
    }
    if let Some(path) = &args.trace_csv {
        let mut out = String::from("step,objective,gap\n");
        for p in &run.trace {
            out.push_str(&format!("{},{:e},{:e}\n", p.step, p.objective, p.gap));
        }
        write_atomic(path, out.as_bytes())?;
        println!("wrote trace: {}", path.display());
    }

    if run.converged {
        Ok(())
    } else {
        Err(CliError::NonConvergence { gap: run.final_gap })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // Ignore failure: the global pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let result = match &cli.command {
        Command::RunCampaign(args) => cmd_run_campaign(args),
        Command::CheckSingle(args) => cmd_check_single(args),
        Command::GibbsSolve(args) => cmd_gibbs_solve(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

