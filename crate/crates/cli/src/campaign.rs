//! Seeded instance sweeps over every checker, with deterministic per-trial
//! RNG derivation, parallel evaluation, exclusion accounting, a
//! re-evaluation pass before any violation is declared, and witness
//! serialization for failures.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use traceineq_core::error::Error as CoreError;
use traceineq_core::hermitian::{
    hermitize, DensityMatrix, HermitianMatrix, PositiveDefiniteMatrix,
};
use traceineq_core::ineq;
use traceineq_core::maps::{schwarz_probe, PositiveMapRep};
use traceineq_core::sample::{
    completely_depolarizing, random_density_with_cap, random_gibbs_problem, random_hermitian,
    random_pd, random_scalar_path, random_tp_channel, random_unital_cp, random_unital_cp_rect,
    random_unital_positive_noncp, trial_rng, UnitalCpForm,
};
use traceineq_core::variational::{
    gibbs_maximizer, gibbs_objective, gibbs_value, mirror_ascent, second_derivative_probe,
    GibbsProblem,
};

use crate::config::{CampaignConfig, CheckKind, MapFamily};
use crate::report::{CampaignReport, CheckSummary, CsvRow, FailureRecord};
use crate::witness::{metric_tol, Witness, WitnessInputs, SCHWARZ_WITNESS_THRESHOLD};
use crate::CliError;

/// Cap on serialized witnesses per check.
pub const WITNESS_CAP: usize = 100;

/// Fraction of mirror-ascent non-convergences a campaign tolerates before the
/// Gibbs section fails outright.
pub const ASCENT_FLAG_BUDGET: f64 = 0.01;

/// States sampled per Gibbs instance for the weak-duality sweep.
const GIBBS_DUALITY_SAMPLES: usize = 8;
const GIBBS_ASCENT_STEPS: usize = 500;
const GIBBS_ASCENT_RATE: f64 = 0.5;
/// Relative finite-difference step for curvature probes.
const CURVATURE_STEP: f64 = 1e-4;
/// Samples per proof-chain instance.
const PROOF_CHAIN_SAMPLES: usize = 3;
/// Schwarz probe budget per sampled CP map.
const HIERARCHY_PROBE_TRIALS: usize = 16;
/// Schwarz probe budget for the transpose witness search.
const TRANSPOSE_PROBE_TRIALS: usize = 1000;

/// One judged quantity of a trial.
#[derive(Debug, Clone)]
struct MetricSample {
    metric: &'static str,
    slack: f64,
    scale: f64,
    /// Diagnostics-only metrics appear in the CSV stream but never fail.
    judged: bool,
}

impl MetricSample {
    fn new(metric: &'static str, slack: f64, scale: f64) -> Self {
        Self {
            metric,
            slack,
            scale,
            judged: true,
        }
    }

    fn diagnostic(metric: &'static str, slack: f64, scale: f64) -> Self {
        Self {
            metric,
            slack,
            scale,
            judged: false,
        }
    }

    fn normalized(&self) -> f64 {
        self.slack / self.scale
    }
}

#[derive(Debug, Clone)]
struct TrialEval {
    id: String,
    metrics: Vec<MetricSample>,
    flagged: bool,
}

fn is_exclusion(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::AdjointNotPd { .. }
            | CoreError::ImageNotPd { .. }
            | CoreError::PdFloorViolation { .. }
    )
}

fn reproject_h(h: &HermitianMatrix) -> HermitianMatrix {
    hermitize(h.matrix()).expect("valid Hermitian stays valid")
}

fn reproject_pd(y: &PositiveDefiniteMatrix) -> Result<PositiveDefiniteMatrix, CoreError> {
    PositiveDefiniteMatrix::new(hermitize(y.matrix())?)
}

fn reproject_density(x: &DensityMatrix) -> Result<DensityMatrix, CoreError> {
    DensityMatrix::normalize(&reproject_pd(x.pd())?)
}

// ---------------------------------------------------------------------------
// Map construction per family
// ---------------------------------------------------------------------------

/// Families realizable for an `n -> m` unital positive map under the config.
fn unital_families(cfg: &CampaignConfig, n: usize, m: usize) -> Vec<MapFamily> {
    let allowed = |f: MapFamily| cfg.map_families.contains(&f);
    let mut fams = Vec::new();
    if n == m {
        for f in [MapFamily::CpUnital, MapFamily::PositiveNoncp, MapFamily::Transpose] {
            if allowed(f) {
                fams.push(f);
            }
        }
    } else {
        if m > n && m.is_multiple_of(n) && allowed(MapFamily::BlockEmbed) {
            fams.push(MapFamily::BlockEmbed);
        }
        for f in [MapFamily::CpUnital, MapFamily::PositiveNoncp] {
            if allowed(f) {
                fams.push(f);
            }
        }
    }
    fams
}

/// All `(n, m)` pairs the enabled families can realize within the dim range.
fn unital_pairs(cfg: &CampaignConfig) -> Vec<(usize, usize)> {
    let dims = cfg.dims();
    let mut pairs = Vec::new();
    for &n in &dims {
        for &m in &dims {
            if n >= 2 && m >= 2 && !unital_families(cfg, n, m).is_empty() {
                pairs.push((n, m));
            }
        }
    }
    pairs
}

/// Build a unital positive map `M_n -> M_m` from the given family.
fn build_unital_map(
    family: MapFamily,
    n: usize,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PositiveMapRep, CoreError> {
    match family {
        MapFamily::Transpose => Ok(PositiveMapRep::transpose(n)),
        MapFamily::CpUnital => {
            if n == m {
                let form = if rng.random::<bool>() {
                    UnitalCpForm::MixedUnitary
                } else {
                    UnitalCpForm::StinespringAdjoint
                };
                random_unital_cp(n, 1 + rng.random_range(0..3usize), form, rng)
            } else {
                random_unital_cp_rect(n, m, rng)
            }
        }
        MapFamily::PositiveNoncp => {
            if n == m {
                random_unital_positive_noncp(n, rng)
            } else {
                // Transpose-twisted compression; positive and unital, and
                // (generically) not completely positive.
                let base = random_unital_cp_rect(n, m, rng)?;
                let twisted =
                    PositiveMapRep::composition(PositiveMapRep::transpose(m), base)?;
                if rng.random::<bool>() {
                    Ok(twisted)
                } else {
                    let w = 0.5 + 0.4 * rng.random::<f64>();
                    let other = random_unital_cp_rect(n, m, rng)?;
                    PositiveMapRep::convex_mixture(vec![w, 1.0 - w], vec![twisted, other])
                }
            }
        }
        MapFamily::BlockEmbed => {
            let copies = m / n;
            let embed = PositiveMapRep::block_embed_map(n, copies)?;
            match rng.random_range(0..3u8) {
                0 => Ok(embed),
                1 => {
                    let inner = random_unital_cp(n, 2, UnitalCpForm::MixedUnitary, rng)?;
                    PositiveMapRep::composition(embed, inner)
                }
                _ => {
                    let outer = random_unital_cp(m, 2, UnitalCpForm::MixedUnitary, rng)?;
                    PositiveMapRep::composition(outer, embed)
                }
            }
        }
    }
}

/// Trace-preserving positive-map families available at dimension `n`.
fn tp_families(cfg: &CampaignConfig, n: usize) -> Vec<MapFamily> {
    let mut fams = Vec::new();
    for f in [MapFamily::Transpose, MapFamily::CpUnital, MapFamily::PositiveNoncp] {
        if cfg.map_families.contains(&f) {
            fams.push(f);
        }
    }
    if n >= 4 && n.is_multiple_of(2) && cfg.map_families.contains(&MapFamily::BlockEmbed) {
        fams.push(MapFamily::BlockEmbed);
    }
    fams
}

/// Build a positive trace-preserving map with input dimension `n`.
fn build_tp_map(
    family: MapFamily,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PositiveMapRep, CoreError> {
    match family {
        MapFamily::Transpose => Ok(PositiveMapRep::transpose(n)),
        MapFamily::CpUnital => match rng.random_range(0..3u8) {
            0 => random_unital_cp(
                n,
                1 + rng.random_range(0..3usize),
                UnitalCpForm::MixedUnitary,
                rng,
            ),
            1 => random_tp_channel(n, 2 + rng.random_range(0..2usize), rng),
            _ => {
                let w = 0.2 + 0.5 * rng.random::<f64>();
                PositiveMapRep::convex_mixture(
                    vec![w, 1.0 - w],
                    vec![
                        completely_depolarizing(n),
                        random_unital_cp(n, 2, UnitalCpForm::MixedUnitary, rng)?,
                    ],
                )
            }
        },
        MapFamily::PositiveNoncp => {
            if rng.random::<bool>() {
                Ok(random_unital_positive_noncp(n, rng)?.adjoint())
            } else {
                let w = 0.5 + 0.4 * rng.random::<f64>();
                PositiveMapRep::convex_mixture(
                    vec![w, 1.0 - w],
                    vec![
                        PositiveMapRep::transpose(n),
                        random_unital_cp(n, 2, UnitalCpForm::MixedUnitary, rng)?,
                    ],
                )
            }
        }
        // The block-sum (adjoint of the embedding) is trace-preserving.
        MapFamily::BlockEmbed => Ok(PositiveMapRep::block_embed_map(n / 2, 2)?.adjoint()),
    }
}

// ---------------------------------------------------------------------------
// Per-check instances, all pure functions of (config, trial)
// ---------------------------------------------------------------------------

struct MonotonicityInstance {
    n: usize,
    m: usize,
    h: HermitianMatrix,
    y: PositiveDefiniteMatrix,
    phi: PositiveMapRep,
}

fn unital_map_instance(
    cfg: &CampaignConfig,
    pairs: &[(usize, usize)],
    kind: CheckKind,
    trial: u64,
) -> Result<(MonotonicityInstance, ChaCha8Rng), CoreError> {
    let (n, m) = pairs[(trial as usize) % pairs.len()];
    let rotation = (trial as usize) / pairs.len();
    let fams = unital_families(cfg, n, m);
    let family = fams[rotation % fams.len()];
    let mut rng = trial_rng(cfg.seed, kind.stream(), trial);
    let phi = build_unital_map(family, n, m, &mut rng)?;
    let h = random_hermitian(n, cfg.spectrum_scale, &mut rng)?;
    let y = random_pd(m, cfg.condition_cap, &mut rng)?;
    Ok((MonotonicityInstance { n, m, h, y, phi }, rng))
}

struct DpiInstance {
    n: usize,
    family: MapFamily,
    x: DensityMatrix,
    y: DensityMatrix,
    psi: PositiveMapRep,
}

fn dpi_instance(cfg: &CampaignConfig, dims: &[usize], trial: u64) -> Result<DpiInstance, CoreError> {
    let n = dims[(trial as usize) % dims.len()];
    let rotation = (trial as usize) / dims.len();
    let fams = tp_families(cfg, n);
    let family = fams[rotation % fams.len()];
    let mut rng = trial_rng(cfg.seed, CheckKind::Dpi.stream(), trial);
    let psi = build_tp_map(family, n, &mut rng)?;
    let x = random_density_with_cap(n, cfg.condition_cap, &mut rng)?;
    let y = random_density_with_cap(n, cfg.condition_cap, &mut rng)?;
    Ok(DpiInstance { n, family, x, y, psi })
}

struct ProofChainInstance {
    base: MonotonicityInstance,
    ws: Vec<DensityMatrix>,
}

fn proof_chain_instance(
    cfg: &CampaignConfig,
    pairs: &[(usize, usize)],
    trial: u64,
) -> Result<ProofChainInstance, CoreError> {
    let (base, mut rng) = unital_map_instance(cfg, pairs, CheckKind::ProofChain, trial)?;
    let ws = (0..PROOF_CHAIN_SAMPLES)
        .map(|_| random_density_with_cap(base.m, cfg.condition_cap, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProofChainInstance { base, ws })
}

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

pub(crate) struct CheckOutcome {
    pub summary: CheckSummary,
    pub csv: Vec<CsvRow>,
}

fn run_check<E, W>(
    cfg: &CampaignConfig,
    kind: CheckKind,
    trials: usize,
    eval: E,
    witness_inputs: W,
) -> Result<CheckOutcome, CliError>
where
    E: Fn(u64, bool) -> Result<TrialEval, CoreError> + Sync,
    W: Fn(u64, usize) -> Result<WitnessInputs, CoreError>,
{
    let base_tol = cfg.effective_tol(kind);
    let results: Vec<(u64, Result<TrialEval, CoreError>)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| (t, eval(t, false)))
        .collect();

    let mut summary = CheckSummary::empty(base_tol);
    let mut csv = Vec::new();
    let want_csv = cfg.csv_path.is_some();
    let mut headline_sum = 0.0f64;
    let mut headline_count = 0usize;
    let mut witnesses_written = 0usize;

    for (trial, outcome) in results {
        let eval_ok = match outcome {
            Ok(e) => e,
            Err(e) if is_exclusion(&e) => {
                summary.excluded += 1;
                continue;
            }
            Err(e) => {
                summary.failures.push(FailureRecord {
                    instance_id: format!("{}/t{trial:05}", kind.name()),
                    metric: format!("error: {e}"),
                    slack: -1.0,
                    scale: 1.0,
                    normalized: -1.0,
                    witness: None,
                });
                continue;
            }
        };
        summary.count += 1;
        if eval_ok.flagged {
            summary.flagged += 1;
            if summary.flagged_ids.len() < WITNESS_CAP {
                summary.flagged_ids.push(eval_ok.id.clone());
            }
        }
        for (index, metric) in eval_ok.metrics.iter().enumerate() {
            let normalized = metric.normalized();
            if index == 0 {
                headline_sum += normalized;
                headline_count += 1;
                summary.min_normalized =
                    Some(summary.min_normalized.map_or(normalized, |v| v.min(normalized)));
                summary.max_normalized =
                    Some(summary.max_normalized.map_or(normalized, |v| v.max(normalized)));
            }
            if want_csv {
                csv.push(CsvRow {
                    instance_id: eval_ok.id.clone(),
                    check: if metric.metric == "slack" {
                        kind.name().to_string()
                    } else {
                        format!("{}/{}", kind.name(), metric.metric)
                    },
                    slack: metric.slack,
                    scale: metric.scale,
                    normalized,
                });
            }
            if !metric.judged {
                continue;
            }
            let tol = metric_tol(kind, metric.metric, base_tol);
            if normalized >= -tol {
                continue;
            }
            // Re-evaluate once with re-projected inputs before declaring a
            // violation; only a persistent negative slack counts.
            let confirmed = match eval(trial, true) {
                Ok(second) => second
                    .metrics
                    .get(index)
                    .filter(|m| m.metric == metric.metric)
                    .map(|m| (m.normalized() < -tol, m.slack, m.scale)),
                Err(_) => None,
            };
            let (still_failing, slack, scale) =
                confirmed.unwrap_or((true, metric.slack, metric.scale));
            if !still_failing {
                continue;
            }
            let witness_path = if witnesses_written < WITNESS_CAP {
                witness_inputs(trial, index).ok().and_then(|inputs| {
                    let w = Witness {
                        instance_id: eval_ok.id.clone(),
                        metric: metric.metric.to_string(),
                        slack,
                        scale,
                        inputs,
                    };
                    crate::report::write_witness(cfg, kind, &eval_ok.id, &w)
                        .ok()
                        .inspect(|_| witnesses_written += 1)
                })
            } else {
                None
            };
            summary.failures.push(FailureRecord {
                instance_id: eval_ok.id.clone(),
                metric: metric.metric.to_string(),
                slack,
                scale,
                normalized: slack / scale,
                witness: witness_path,
            });
        }
    }
    if headline_count > 0 {
        summary.mean_normalized = Some(headline_sum / headline_count as f64);
    }
    Ok(CheckOutcome { summary, csv })
}

fn active_dims(cfg: &CampaignConfig, min_dim: usize, label: &str) -> Result<Vec<usize>, CliError> {
    let dims: Vec<usize> = cfg.dims().into_iter().filter(|&n| n >= min_dim).collect();
    if dims.is_empty() {
        return Err(CliError::Config(format!(
            "dim_range: no dimensions >= {min_dim} available for {label}"
        )));
    }
    Ok(dims)
}

// ---------------------------------------------------------------------------
// Check runners
// ---------------------------------------------------------------------------

fn run_monotonicity(cfg: &CampaignConfig) -> Result<CheckOutcome, CliError> {
    let kind = CheckKind::Monotonicity;
    let pairs = unital_pairs(cfg);
    if pairs.is_empty() {
        return Err(CliError::Config(
            "map_families/dim_range: no realizable dimension pairs for monotonicity".into(),
        ));
    }
    run_check(
        cfg,
        kind,
        cfg.effective_trials(kind),
        |trial, strict| {
            let (mut inst, _) = unital_map_instance(cfg, &pairs, kind, trial)?;
            if strict {
                inst.h = reproject_h(&inst.h);
                inst.y = reproject_pd(&inst.y)?;
            }
            let r = ineq::check_monotonicity(&inst.h, &inst.y, &inst.phi)?;
            Ok(TrialEval {
                id: format!("monotonicity/n{}m{}/t{trial:05}", inst.n, inst.m),
                metrics: vec![MetricSample::new("slack", r.slack, r.scale)],
                flagged: false,
            })
        },
        |trial, _index| {
            let (inst, _) = unital_map_instance(cfg, &pairs, kind, trial)?;
            Ok(WitnessInputs::Monotonicity {
                h: inst.h,
                y: inst.y,
                map: inst.phi,
            })
        },
    )
}

fn run_dpi(cfg: &CampaignConfig) -> Result<CheckOutcome, CliError> {
    let kind = CheckKind::Dpi;
    let dims = active_dims(cfg, 2, "dpi")?;
    run_check(
        cfg,
        kind,
        cfg.effective_trials(kind),
        |trial, strict| {
            let mut inst = dpi_instance(cfg, &dims, trial)?;
            if strict {
                inst.x = reproject_density(&inst.x)?;
                inst.y = reproject_density(&inst.y)?;
            }
            let r = ineq::check_dpi(&inst.x, &inst.y, &inst.psi)?;
            let mut metrics = vec![MetricSample::new("slack", r.slack, r.scale)];
            if inst.family == MapFamily::Transpose {
                // The relative entropy is transpose-invariant, so the slack
                // must vanish, not merely stay nonnegative.
                metrics.push(MetricSample::new(
                    "transpose_equality",
                    -r.slack.abs(),
                    r.scale,
                ));
            }
            Ok(TrialEval {
                id: format!("dpi/n{}/t{trial:05}", inst.n),
                metrics,
                flagged: false,
            })
        },
        |trial, _index| {
            let inst = dpi_instance(cfg, &dims, trial)?;
            Ok(WitnessInputs::Dpi {
                x: inst.x,
                y: inst.y,
                map: inst.psi,
            })
        },
    )
}

fn run_proof_chain(cfg: &CampaignConfig) -> Result<CheckOutcome, CliError> {
    let kind = CheckKind::ProofChain;
    let pairs = unital_pairs(cfg);
    if pairs.is_empty() {
        return Err(CliError::Config(
            "map_families/dim_range: no realizable dimension pairs for proof_chain".into(),
        ));
    }
    // Metric layout per trial: [0] worst dominance, [1 + 2i] pairing of w_i,
    // [2 + 2i] dpi of w_i. The witness closure maps an index back to its w.
    run_check(
        cfg,
        kind,
        cfg.effective_trials(kind),
        |trial, strict| {
            let mut inst = proof_chain_instance(cfg, &pairs, trial)?;
            if strict {
                inst.base.h = reproject_h(&inst.base.h);
                inst.base.y = reproject_pd(&inst.base.y)?;
            }
            let reports =
                ineq::check_proof_chain(&inst.base.h, &inst.base.y, &inst.base.phi, &inst.ws)?;
            let worst = reports
                .iter()
                .map(|r| (r.dominance.normalized(), r.dominance.slack, r.dominance.scale))
                .min_by(|a, b| a.0.partial_cmp(&b.0).expect("finite slacks"))
                .expect("at least one sample");
            let mut metrics = Vec::with_capacity(1 + 2 * reports.len());
            metrics.push(MetricSample::new("slack", worst.1, worst.2));
            for r in &reports {
                metrics.push(MetricSample::new(
                    "pairing",
                    -r.pairing_gap,
                    r.pairing_scale.max(f64::MIN_POSITIVE),
                ));
                metrics.push(MetricSample::new("dpi", r.dpi_slack.slack, r.dpi_slack.scale));
            }
            Ok(TrialEval {
                id: format!("proof_chain/n{}m{}/t{trial:05}", inst.base.n, inst.base.m),
                metrics,
                flagged: false,
            })
        },
        |trial, index| {
            let inst = proof_chain_instance(cfg, &pairs, trial)?;
            let w = if index == 0 {
                let reports =
                    ineq::check_proof_chain(&inst.base.h, &inst.base.y, &inst.base.phi, &inst.ws)?;
                let worst = reports
                    .iter()
                    .enumerate()
                    .min_by(|a, b| {
                        a.1.dominance
                            .normalized()
                            .partial_cmp(&b.1.dominance.normalized())
                            .expect("finite slacks")
                    })
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                inst.ws[worst].clone()
            } else {
                inst.ws[(index - 1) / 2].clone()
            };
            Ok(WitnessInputs::ProofChain {
                h: inst.base.h,
                y: inst.base.y,
                map: inst.base.phi,
                w,
            })
        },
    )
}

fn superadditivity_instance(
    cfg: &CampaignConfig,
    trial: u64,
) -> Result<(usize, HermitianMatrix, PositiveDefiniteMatrix, PositiveDefiniteMatrix), CoreError> {
    let dims = cfg.dims();
    let n = dims[(trial as usize) % dims.len()];
    let mut rng = trial_rng(cfg.seed, CheckKind::Superadditivity.stream(), trial);
    let h = random_hermitian(n, cfg.spectrum_scale, &mut rng)?;
    let y1 = random_pd(n, cfg.condition_cap, &mut rng)?;
    let y2 = random_pd(n, cfg.condition_cap, &mut rng)?;
    Ok((n, h, y1, y2))
}

fn run_superadditivity(cfg: &CampaignConfig) -> Result<CheckOutcome, CliError> {
    let kind = CheckKind::Superadditivity;
    run_check(
        cfg,
        kind,
        cfg.effective_trials(kind),
        |trial, strict| {
            let (n, mut h, mut y1, mut y2) = superadditivity_instance(cfg, trial)?;
            if strict {
                h = reproject_h(&h);
                y1 = reproject_pd(&y1)?;
                y2 = reproject_pd(&y2)?;
            }
            let r = ineq::check_superadditivity(&h, &y1, &y2)?;
            Ok(TrialEval {
                id: format!("superadditivity/n{n}/t{trial:05}"),
                metrics: vec![MetricSample::new("slack", r.slack, r.scale)],
                flagged: false,
            })
        },
        |trial, _index| {
            let (_, h, y1, y2) = superadditivity_instance(cfg, trial)?;
            Ok(WitnessInputs::Superadditivity { h, y1, y2 })
        },
    )
}

fn homogeneity_instance(
    cfg: &CampaignConfig,
    trial: u64,
) -> Result<(usize, HermitianMatrix, PositiveDefiniteMatrix, f64), CoreError> {
    let dims = cfg.dims();
    let n = dims[(trial as usize) % dims.len()];
    let mut rng = trial_rng(cfg.seed, CheckKind::Homogeneity.stream(), trial);
    let h = random_hermitian(n, cfg.spectrum_scale, &mut rng)?;
    let y = random_pd(n, cfg.condition_cap, &mut rng)?;
    // Log-uniform in [0.1, 10].
    let t = 10f64.powf(2.0 * rng.random::<f64>() - 1.0);
    Ok((n, h, y, t))
}

fn run_homogeneity(cfg: &CampaignConfig) -> Result<CheckOutcome, CliError> {
    let kind = CheckKind::Homogeneity;
    run_check(
        cfg,
        kind,
        cfg.effective_trials(kind),
        |trial, strict| {
            let (n, mut h, mut y, t) = homogeneity_instance(cfg, trial)?;
            if strict {
                h = reproject_h(&h);
                y = reproject_pd(&y)?;
            }
            let dev = ineq::check_homogeneity(&h, &y, t)?;
            Ok(TrialEval {
                id: format!("homogeneity/n{n}/t{trial:05}"),
                metrics: vec![MetricSample::new("deviation", -dev, 1.0)],
                flagged: false,
            })
        },
        |trial, _index| {
            let (_, h, y, t) = homogeneity_instance(cfg, trial)?;
            Ok(WitnessInputs::Homogeneity { h, y, t })
        },
    )
}

fn concavity_instance(
    cfg: &CampaignConfig,
    trial: u64,
) -> Result<
    (usize, HermitianMatrix, PositiveDefiniteMatrix, PositiveDefiniteMatrix, f64),
    CoreError,
> {
    let dims = cfg.dims();
    let n = dims[(trial as usize) % dims.len()];
    let mut rng = trial_rng(cfg.seed, CheckKind::Concavity.stream(), trial);
    let h = random_hermitian(n, cfg.spectrum_scale, &mut rng)?;
    let y1 = random_pd(n, cfg.condition_cap, &mut rng)?;
    let y2 = random_pd(n, cfg.condition_cap, &mut rng)?;
    let lambda = 0.05 + 0.9 * rng.random::<f64>();
    Ok((n, h, y1, y2, lambda))
}

fn run_concavity(cfg: &CampaignConfig) -> Result<CheckOutcome, CliError> {
    let kind = CheckKind::Concavity;
    run_check(
        cfg,
        kind,
        cfg.effective_trials(kind),
        |trial, strict| {
            let (n, mut h, mut y1, mut y2, lambda) = concavity_instance(cfg, trial)?;
            if strict {
                h = reproject_h(&h);
                y1 = reproject_pd(&y1)?;
                y2 = reproject_pd(&y2)?;
            }
            let c = ineq::check_concavity(&h, &y1, &y2, lambda)?;
            Ok(TrialEval {
                id: format!("concavity/n{n}/t{trial:05}"),
                metrics: vec![
                    MetricSample::new("slack", c.direct.slack, c.direct.scale),
                    MetricSample::new(
                        "route_gap",
                        -c.route_gap(),
                        c.direct.scale.max(c.route.scale),
                    ),
                ],
                flagged: false,
            })
        },
        |trial, _index| {
            let (_, h, y1, y2, lambda) = concavity_instance(cfg, trial)?;
            Ok(WitnessInputs::Concavity { h, y1, y2, lambda })
        },
    )
}

fn golden_thompson_instance(
    cfg: &CampaignConfig,
    trial: u64,
) -> Result<(usize, HermitianMatrix, HermitianMatrix), CoreError> {
    let dims = cfg.dims();
    let n = dims[(trial as usize) % dims.len()];
    let mut rng = trial_rng(cfg.seed, CheckKind::GoldenThompson.stream(), trial);
    let a = random_hermitian(n, cfg.spectrum_scale, &mut rng)?;
    let b = random_hermitian(n, cfg.spectrum_scale, &mut rng)?;
    Ok((n, a, b))
}

fn run_golden_thompson(cfg: &CampaignConfig) -> Result<CheckOutcome, CliError> {
    let kind = CheckKind::GoldenThompson;
    run_check(
        cfg,
        kind,
        cfg.effective_trials(kind),
        |trial, strict| {
            let (n, mut a, mut b) = golden_thompson_instance(cfg, trial)?;
            if strict {
                a = reproject_h(&a);
                b = reproject_h(&b);
            }
            let r = ineq::check_golden_thompson(&a, &b)?;
            Ok(TrialEval {
                id: format!("golden_thompson/n{n}/t{trial:05}"),
                metrics: vec![MetricSample::new("slack", r.slack, r.scale)],
                flagged: false,
            })
        },
        |trial, _index| {
            let (_, a, b) = golden_thompson_instance(cfg, trial)?;
            Ok(WitnessInputs::GoldenThompson { a, b })
        },
    )
}

struct GibbsInstance {
    n: usize,
    problem: GibbsProblem,
    samples: Vec<DensityMatrix>,
    x0: DensityMatrix,
}

fn gibbs_instance(cfg: &CampaignConfig, trial: u64) -> Result<GibbsInstance, CoreError> {
    let dims = cfg.dims();
    let n = dims[(trial as usize) % dims.len()];
    let mut rng = trial_rng(cfg.seed, CheckKind::GibbsDuality.stream(), trial);
    let with_w = rng.random::<bool>();
    let problem =
        random_gibbs_problem(n, cfg.spectrum_scale, cfg.condition_cap, with_w, &mut rng)?;
    let samples = (0..GIBBS_DUALITY_SAMPLES)
        .map(|_| random_density_with_cap(n, cfg.condition_cap, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let x0 = random_density_with_cap(n, cfg.condition_cap, &mut rng)?;
    Ok(GibbsInstance {
        n,
        problem,
        samples,
        x0,
    })
}

fn run_gibbs(cfg: &CampaignConfig) -> Result<CheckOutcome, CliError> {
    let kind = CheckKind::GibbsDuality;
    let mut outcome = run_check(
        cfg,
        kind,
        cfg.effective_trials(kind),
        |trial, _strict| {
            let inst = gibbs_instance(cfg, trial)?;
            let value = gibbs_value(&inst.problem)?;
            let star = gibbs_maximizer(&inst.problem)?;
            let star_obj = gibbs_objective(&star, &inst.problem)?;
            let worst_duality = inst
                .samples
                .iter()
                .map(|x| gibbs_objective(x, &inst.problem).map(|obj| value - obj))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let run =
                mirror_ascent(&inst.problem, &inst.x0, GIBBS_ASCENT_STEPS, GIBBS_ASCENT_RATE)?;
            Ok(TrialEval {
                id: format!("gibbs_duality/n{}/t{trial:05}", inst.n),
                metrics: vec![
                    // Strong duality at the candidate is an absolute bound.
                    MetricSample::new("maximizer_gap", -(value - star_obj).abs(), 1.0),
                    MetricSample::new("weak_duality", worst_duality, 1.0),
                    MetricSample::diagnostic("ascent", -run.final_gap, 1.0),
                ],
                flagged: !run.converged,
            })
        },
        |trial, _index| {
            let inst = gibbs_instance(cfg, trial)?;
            let value = gibbs_value(&inst.problem)?;
            // Attach the state achieving the worst duality margin.
            let worst = inst
                .samples
                .iter()
                .map(|x| gibbs_objective(x, &inst.problem).map(|obj| (value - obj, x.clone())))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .min_by(|a, b| a.0.partial_cmp(&b.0).expect("finite objectives"))
                .map(|(_, x)| x);
            Ok(WitnessInputs::GibbsDuality {
                k: inst.problem.k().clone(),
                w: inst.problem.w().cloned(),
                x: worst,
                x0: Some(inst.x0),
                steps: Some(GIBBS_ASCENT_STEPS),
                rate: Some(GIBBS_ASCENT_RATE),
            })
        },
    )?;
    // Non-convergence is flagged per instance; only an excessive rate fails.
    let total = outcome.summary.count.max(1);
    if outcome.summary.flagged as f64 > ASCENT_FLAG_BUDGET * total as f64 {
        let rate = outcome.summary.flagged as f64 / total as f64;
        outcome.summary.failures.push(FailureRecord {
            instance_id: "gibbs_duality/ascent_convergence_rate".to_string(),
            metric: format!(
                "ascent_flagged {} of {} exceeds budget {:.0}%",
                outcome.summary.flagged,
                total,
                ASCENT_FLAG_BUDGET * 100.0
            ),
            slack: -rate,
            scale: 1.0,
            normalized: -rate,
            witness: None,
        });
    }
    Ok(outcome)
}

fn curvature_instance(
    cfg: &CampaignConfig,
    trial: u64,
) -> Result<(usize, traceineq_core::variational::ScalarPath, f64), CoreError> {
    let dims = cfg.dims();
    let n = dims[(trial as usize) % dims.len()];
    let mut rng = trial_rng(cfg.seed, CheckKind::Curvature.stream(), trial);
    let path = random_scalar_path(n, cfg.spectrum_scale, cfg.condition_cap, &mut rng)?;
    // Probe away from the center too.
    let t = 0.8 * (rng.random::<f64>() - 0.5);
    Ok((n, path, t))
}

fn run_curvature(cfg: &CampaignConfig) -> Result<CheckOutcome, CliError> {
    let kind = CheckKind::Curvature;
    run_check(
        cfg,
        kind,
        cfg.effective_trials(kind),
        |trial, _strict| {
            let (n, path, t) = curvature_instance(cfg, trial)?;
            let probe = second_derivative_probe(&path, t, CURVATURE_STEP)?;
            let scale = probe.f_center.abs().max(1.0);
            Ok(TrialEval {
                id: format!("curvature/n{n}/t{trial:05}"),
                metrics: vec![
                    MetricSample::new("f_curvature", -probe.d2_f, scale),
                    MetricSample::new("log_curvature", -probe.d2_log_f, scale),
                    MetricSample::new("identity", -probe.identity_gap, 1.0),
                ],
                flagged: false,
            })
        },
        |trial, _index| {
            let (_, path, t) = curvature_instance(cfg, trial)?;
            Ok(WitnessInputs::Curvature {
                h: path.h().clone(),
                y0: path.y0().clone(),
                direction: path.direction().clone(),
                t_range: path.t_range(),
                t,
                step: CURVATURE_STEP,
            })
        },
    )
}

fn hierarchy_instance(
    cfg: &CampaignConfig,
    dims: &[usize],
    trial: u64,
) -> Result<(usize, PositiveMapRep, u64), CoreError> {
    let n = dims[(trial as usize) % dims.len()];
    let mut rng = trial_rng(cfg.seed, CheckKind::ClassHierarchy.stream(), trial);
    let form = if rng.random::<bool>() {
        UnitalCpForm::MixedUnitary
    } else {
        UnitalCpForm::StinespringAdjoint
    };
    let map = random_unital_cp(n, 1 + rng.random_range(0..3usize), form, &mut rng)?;
    let probe_seed = rng.random::<u64>();
    Ok((n, map, probe_seed))
}

fn transpose_probe_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(0x7472616e73)
}

fn run_class_hierarchy(cfg: &CampaignConfig) -> Result<CheckOutcome, CliError> {
    let kind = CheckKind::ClassHierarchy;
    let dims = active_dims(cfg, 2, "class_hierarchy")?;
    run_check(
        cfg,
        kind,
        cfg.effective_trials(kind),
        |trial, _strict| {
            if trial == 0 {
                // Transpose at n = 2: Choi spectrum pins the -1 eigenvalue.
                let t = PositiveMapRep::transpose(2);
                let min = t.choi_min_eig()?;
                return Ok(TrialEval {
                    id: "class_hierarchy/transpose_choi/t00000".to_string(),
                    metrics: vec![
                        MetricSample::new("transpose_choi_exact", -(min + 1.0).abs(), 1.0),
                        MetricSample::new("transpose_choi_negative", -0.99 - min, 1.0),
                    ],
                    flagged: false,
                });
            }
            if trial == 1 {
                // The transpose must fail the Schwarz probe within the budget.
                let t = PositiveMapRep::transpose(2);
                let probe = schwarz_probe(
                    &t,
                    TRANSPOSE_PROBE_TRIALS,
                    transpose_probe_seed(cfg.seed),
                    1e-10,
                )?;
                return Ok(TrialEval {
                    id: "class_hierarchy/transpose_schwarz/t00001".to_string(),
                    metrics: vec![MetricSample::new(
                        "transpose_non_schwarz",
                        -probe.worst_violation - SCHWARZ_WITNESS_THRESHOLD,
                        1.0,
                    )],
                    flagged: false,
                });
            }
            let (n, map, probe_seed) = hierarchy_instance(cfg, &dims, trial)?;
            let probe = schwarz_probe(&map, HIERARCHY_PROBE_TRIALS, probe_seed, 1e-10)?;
            Ok(TrialEval {
                id: format!("class_hierarchy/n{n}/t{trial:05}"),
                metrics: vec![MetricSample::new("cp_schwarz", probe.worst_violation, 1.0)],
                flagged: false,
            })
        },
        |trial, _index| {
            if trial == 0 {
                return Ok(WitnessInputs::ClassHierarchy {
                    map: PositiveMapRep::transpose(2),
                    probe_trials: 0,
                    probe_seed: 0,
                });
            }
            if trial == 1 {
                return Ok(WitnessInputs::ClassHierarchy {
                    map: PositiveMapRep::transpose(2),
                    probe_trials: TRANSPOSE_PROBE_TRIALS,
                    probe_seed: transpose_probe_seed(cfg.seed),
                });
            }
            let (_, map, probe_seed) = hierarchy_instance(cfg, &dims, trial)?;
            Ok(WitnessInputs::ClassHierarchy {
                map,
                probe_trials: HIERARCHY_PROBE_TRIALS,
                probe_seed,
            })
        },
    )
}


/// Run every enabled check and assemble the report plus the optional CSV
/// slack stream. Instance evaluation is parallel; per-trial seeding keeps the
/// result independent of scheduling.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<(CampaignReport, Vec<CsvRow>), CliError> {
    cfg.validate()?;
    let mut checks = BTreeMap::new();
    let mut csv = Vec::new();
    for &kind in &cfg.checks {
        let outcome = match kind {
            CheckKind::Monotonicity => run_monotonicity(cfg)?,
            CheckKind::Dpi => run_dpi(cfg)?,
            CheckKind::ProofChain => run_proof_chain(cfg)?,
            CheckKind::Superadditivity => run_superadditivity(cfg)?,
            CheckKind::Homogeneity => run_homogeneity(cfg)?,
            CheckKind::Concavity => run_concavity(cfg)?,
            CheckKind::GoldenThompson => run_golden_thompson(cfg)?,
            CheckKind::GibbsDuality => run_gibbs(cfg)?,
            CheckKind::Curvature => run_curvature(cfg)?,
            CheckKind::ClassHierarchy => run_class_hierarchy(cfg)?,
        };
        csv.extend(outcome.csv);
        checks.insert(kind, outcome.summary);
    }
    let total_failures = checks.values().map(|s| s.failures.len()).sum();
    Ok((
        CampaignReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
            config: cfg.clone(),
            checks,
            total_failures,
        },
        csv,
    ))
}
