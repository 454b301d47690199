//! Failure witnesses: the full inputs of a failed check, serialized in the
//! matrix/map wire formats so `check-single` can replay them and reproduce
//! the recorded slack.

use serde::{Deserialize, Serialize};

use traceineq_core::hermitian::{DensityMatrix, HermitianMatrix, PositiveDefiniteMatrix};
use traceineq_core::ineq;
use traceineq_core::maps::{schwarz_probe, PositiveMapRep};
use traceineq_core::variational::{
    gibbs_maximizer, gibbs_objective, gibbs_value, mirror_ascent, second_derivative_probe,
    GibbsProblem, ScalarPath,
};

use crate::config::CheckKind;
use crate::CliError;

/// Minimum Schwarz violation magnitude that counts as "witness found" for the
/// transpose non-Schwarz subcheck.
pub const SCHWARZ_WITNESS_THRESHOLD: f64 = 1e-3;

/// The complete inputs of one check instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum WitnessInputs {
    Monotonicity {
        h: HermitianMatrix,
        y: PositiveDefiniteMatrix,
        map: PositiveMapRep,
    },
    Dpi {
        x: DensityMatrix,
        y: DensityMatrix,
        map: PositiveMapRep,
    },
    ProofChain {
        h: HermitianMatrix,
        y: PositiveDefiniteMatrix,
        map: PositiveMapRep,
        w: DensityMatrix,
    },
    Superadditivity {
        h: HermitianMatrix,
        y1: PositiveDefiniteMatrix,
        y2: PositiveDefiniteMatrix,
    },
    Homogeneity {
        h: HermitianMatrix,
        y: PositiveDefiniteMatrix,
        t: f64,
    },
    Concavity {
        h: HermitianMatrix,
        y1: PositiveDefiniteMatrix,
        y2: PositiveDefiniteMatrix,
        lambda: f64,
    },
    GoldenThompson {
        a: HermitianMatrix,
        b: HermitianMatrix,
    },
    GibbsDuality {
        k: HermitianMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<PositiveDefiniteMatrix>,
        /// Sampled state for the weak-duality metric.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x: Option<DensityMatrix>,
        /// Ascent start for the ascent metric.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<DensityMatrix>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        steps: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate: Option<f64>,
    },
    Curvature {
        h: HermitianMatrix,
        y0: PositiveDefiniteMatrix,
        direction: HermitianMatrix,
        t_range: (f64, f64),
        t: f64,
        step: f64,
    },
    ClassHierarchy {
        map: PositiveMapRep,
        probe_trials: usize,
        probe_seed: u64,
    },
}

impl WitnessInputs {
    pub fn check(&self) -> CheckKind {
        match self {
            WitnessInputs::Monotonicity { .. } => CheckKind::Monotonicity,
            WitnessInputs::Dpi { .. } => CheckKind::Dpi,
            WitnessInputs::ProofChain { .. } => CheckKind::ProofChain,
            WitnessInputs::Superadditivity { .. } => CheckKind::Superadditivity,
            WitnessInputs::Homogeneity { .. } => CheckKind::Homogeneity,
            WitnessInputs::Concavity { .. } => CheckKind::Concavity,
            WitnessInputs::GoldenThompson { .. } => CheckKind::GoldenThompson,
            WitnessInputs::GibbsDuality { .. } => CheckKind::GibbsDuality,
            WitnessInputs::Curvature { .. } => CheckKind::Curvature,
            WitnessInputs::ClassHierarchy { .. } => CheckKind::ClassHierarchy,
        }
    }
}

/// A serialized failure: inputs plus the slack the campaign recorded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub instance_id: String,
    /// Which metric of the check failed (a check can carry several).
    pub metric: String,
    pub slack: f64,
    pub scale: f64,
    pub inputs: WitnessInputs,
}

/// Result of recomputing a witness.
#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub slack: f64,
    pub scale: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Tolerance for a given `(check, metric)` pair, given the per-check base
/// tolerance. Identity-grade metrics carry fixed tighter bounds.
pub fn metric_tol(kind: CheckKind, metric: &str, base_tol: f64) -> f64 {
    match (kind, metric) {
        (CheckKind::ProofChain, "pairing") => 1e-10,
        (CheckKind::Concavity, "route_gap") => ineq::EQUALITY_TOL,
        (CheckKind::Dpi, "transpose_equality") => ineq::EQUALITY_TOL,
        (CheckKind::GibbsDuality, "weak_duality") => 1e-9,
        (CheckKind::Curvature, "identity") => 1e-4,
        (CheckKind::ClassHierarchy, "transpose_choi_exact") => 1e-10,
        _ => base_tol,
    }
}

/// Recompute the metric of a witness from its serialized inputs.
///
/// Deterministic evaluation plus exact float round-tripping in the wire
/// format means the replayed slack matches the recorded one to 1e-12.
pub fn replay(witness: &Witness) -> Result<ReplayOutcome, CliError> {
    let kind = witness.inputs.check();
    let metric = witness.metric.as_str();
    let unknown = || {
        CliError::Config(format!(
            "check '{kind}' has no metric '{metric}'"
        ))
    };
    let core = |e: traceineq_core::Error| CliError::Check(e.to_string());

    let (slack, scale) = match &witness.inputs {
        WitnessInputs::Monotonicity { h, y, map } => {
            let r = ineq::check_monotonicity(h, y, map).map_err(core)?;
            match metric {
                "slack" => (r.slack, r.scale),
                _ => return Err(unknown()),
            }
        }
        WitnessInputs::Dpi { x, y, map } => {
            let r = ineq::check_dpi(x, y, map).map_err(core)?;
            match metric {
                "slack" => (r.slack, r.scale),
                "transpose_equality" => (-r.slack.abs(), r.scale),
                _ => return Err(unknown()),
            }
        }
        WitnessInputs::ProofChain { h, y, map, w } => {
            let reports = ineq::check_proof_chain(h, y, map, std::slice::from_ref(w))
                .map_err(core)?;
            let r = &reports[0];
            match metric {
                "pairing" => (-r.pairing_gap, r.pairing_scale.max(f64::MIN_POSITIVE)),
                "dpi" => (r.dpi_slack.slack, r.dpi_slack.scale),
                "slack" | "dominance" => (r.dominance.slack, r.dominance.scale),
                _ => return Err(unknown()),
            }
        }
        WitnessInputs::Superadditivity { h, y1, y2 } => {
            let r = ineq::check_superadditivity(h, y1, y2).map_err(core)?;
            match metric {
                "slack" => (r.slack, r.scale),
                _ => return Err(unknown()),
            }
        }
        WitnessInputs::Homogeneity { h, y, t } => {
            let dev = ineq::check_homogeneity(h, y, *t).map_err(core)?;
            match metric {
                "deviation" => (-dev, 1.0),
                _ => return Err(unknown()),
            }
        }
        WitnessInputs::Concavity { h, y1, y2, lambda } => {
            let c = ineq::check_concavity(h, y1, y2, *lambda).map_err(core)?;
            match metric {
                "slack" => (c.direct.slack, c.direct.scale),
                "route_gap" => (-c.route_gap(), c.direct.scale.max(c.route.scale)),
                _ => return Err(unknown()),
            }
        }
        WitnessInputs::GoldenThompson { a, b } => {
            let r = ineq::check_golden_thompson(a, b).map_err(core)?;
            match metric {
                "slack" => (r.slack, r.scale),
                _ => return Err(unknown()),
            }
        }
        WitnessInputs::GibbsDuality {
            k,
            w,
            x,
            x0,
            steps,
            rate,
        } => {
            let problem = GibbsProblem::new(k.clone(), w.clone()).map_err(core)?;
            let value = gibbs_value(&problem).map_err(core)?;
            match metric {
                "maximizer_gap" => {
                    let star = gibbs_maximizer(&problem).map_err(core)?;
                    let obj = gibbs_objective(&star, &problem).map_err(core)?;
                    (-(value - obj).abs(), 1.0)
                }
                "weak_duality" => {
                    let x = x.as_ref().ok_or_else(|| {
                        CliError::Config("weak_duality witness needs field 'x'".to_string())
                    })?;
                    let obj = gibbs_objective(x, &problem).map_err(core)?;
                    (value - obj, 1.0)
                }
                "ascent" => {
                    let x0 = x0.as_ref().ok_or_else(|| {
                        CliError::Config("ascent witness needs field 'x0'".to_string())
                    })?;
                    let run = mirror_ascent(
                        &problem,
                        x0,
                        steps.unwrap_or(500),
                        rate.unwrap_or(0.5),
                    )
                    .map_err(core)?;
                    (-run.final_gap, 1.0)
                }
                _ => return Err(unknown()),
            }
        }
        WitnessInputs::Curvature {
            h,
            y0,
            direction,
            t_range,
            t,
            step,
        } => {
            let path = ScalarPath::new(h.clone(), y0.clone(), direction.clone(), *t_range)
                .map_err(core)?;
            let probe = second_derivative_probe(&path, *t, *step).map_err(core)?;
            let scale = probe.f_center.abs().max(1.0);
            match metric {
                "f_curvature" => (-probe.d2_f, scale),
                "log_curvature" => (-probe.d2_log_f, scale),
                "identity" => (-probe.identity_gap, 1.0),
                _ => return Err(unknown()),
            }
        }
        WitnessInputs::ClassHierarchy {
            map,
            probe_trials,
            probe_seed,
        } => {
            let probe = schwarz_probe(map, *probe_trials, *probe_seed, 1e-10).map_err(core)?;
            match metric {
                "cp_schwarz" => (probe.worst_violation, 1.0),
                "transpose_non_schwarz" => (
                    -probe.worst_violation - SCHWARZ_WITNESS_THRESHOLD,
                    1.0,
                ),
                "transpose_choi_exact" => {
                    let min = map.choi_min_eig().map_err(core)?;
                    (-(min + 1.0).abs(), 1.0)
                }
                "transpose_choi_negative" => {
                    let min = map.choi_min_eig().map_err(core)?;
                    (-0.99 - min, 1.0)
                }
                _ => return Err(unknown()),
            }
        }
    };

    let tol = metric_tol(kind, metric, kind.default_tol());
    Ok(ReplayOutcome {
        slack,
        scale,
        tol,
        pass: slack / scale >= -tol,
    })
}
