//! Slack-computing checkers for the trace-functional inequalities: the
//! monotonicity inequality, the data-processing inequality, the four-line proof
//! chain, superadditivity, degree-one homogeneity, concavity (with a second
//! algebraic route for cross-validation), and Golden-Thompson.
//!
//! Each checker returns the raw slack `lhs - rhs` together with the scale
//! `max(|lhs|, |rhs|, 1)` used to normalize it; trace exponentials vary over
//! orders of magnitude, so only the normalized slack is compared to tolerances.

use crate::error::{Error, Result};
use crate::hermitian::{
    eigh, mat_exp, relative_entropy, relative_entropy_pd, trace_exp_log, trace_product_re,
    DensityMatrix, HermitianMatrix, PositiveDefiniteMatrix,
};
use crate::maps::{PositiveMapRep, MAP_CERT_TOL};
use crate::variational::convex_point;

/// Default campaign tolerance on normalized slacks.
pub const DEFAULT_SLACK_TOL: f64 = 1e-8;

/// Tolerance for cases where equality (not just nonnegativity) is predicted.
pub const EQUALITY_TOL: f64 = 1e-9;

/// Signed slack of one inequality instance, with its normalization scale and
/// a replay handle assigned by the campaign driver.
#[derive(Debug, Clone)]
pub struct SlackResult {
    /// `lhs - rhs`; the checked inequality predicts this is nonnegative.
    pub slack: f64,
    /// `max(|lhs|, |rhs|, 1)`.
    pub scale: f64,
    pub instance_id: String,
}

impl SlackResult {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            slack: lhs - rhs,
            scale: lhs.abs().max(rhs.abs()).max(1.0),
            instance_id: String::new(),
        }
    }

    /// The quantity compared against tolerances.
    pub fn normalized(&self) -> f64 {
        self.slack / self.scale
    }

    pub fn with_instance_id(mut self, id: impl Into<String>) -> Self {
        self.instance_id = id.into();
        self
    }
}

fn require_unital(map: &PositiveMapRep) -> Result<()> {
    let residual = map.unital_residual();
    if residual > MAP_CERT_TOL {
        return Err(Error::NotUnital {
            residual,
            tol: MAP_CERT_TOL,
        });
    }
    Ok(())
}

fn adjoint_image_pd(
    adjoint: &PositiveMapRep,
    y: &HermitianMatrix,
) -> Result<PositiveDefiniteMatrix> {
    let image = adjoint.apply_hermitian(y)?;
    PositiveDefiniteMatrix::new(image).map_err(|e| match e {
        Error::PdFloorViolation { min_eig, floor } => Error::AdjointNotPd { min_eig, floor },
        other => other,
    })
}

/// Monotonicity of the trace functional under a unital positive map:
/// `Tr exp(H + log Phi†(Y)) >= Tr exp(Phi(H) + log Y)`.
///
/// Instances where `Phi†(Y)` fails the positive-definite floor are rejected
/// with [`Error::AdjointNotPd`]; campaigns log them as exclusions, not
/// violations.
pub fn check_monotonicity(
    h: &HermitianMatrix,
    y: &PositiveDefiniteMatrix,
    phi: &PositiveMapRep,
) -> Result<SlackResult> {
    require_unital(phi)?;
    if phi.in_dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            left: phi.in_dim(),
            right: h.dim(),
        });
    }
    if phi.out_dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: phi.out_dim(),
            right: y.dim(),
        });
    }
    let adj_y = adjoint_image_pd(&phi.adjoint(), y.base())?;
    let lhs = trace_exp_log(h, &adj_y)?;
    let rhs = trace_exp_log(&phi.apply_hermitian(h)?, y)?;
    Ok(SlackResult::new(lhs, rhs))
}

/// Data-processing inequality for the relative entropy under a positive
/// trace-preserving map: `D(X||Y) >= D(Psi(X)||Psi(Y))`.
pub fn check_dpi(
    x: &DensityMatrix,
    y: &DensityMatrix,
    psi: &PositiveMapRep,
) -> Result<SlackResult> {
    let residual = psi.trace_preserving_residual();
    if residual > MAP_CERT_TOL {
        return Err(Error::NotTracePreserving {
            residual,
            tol: MAP_CERT_TOL,
        });
    }
    if psi.in_dim() != x.dim() || x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: psi.in_dim(),
            right: x.dim().max(y.dim()),
        });
    }
    let image_density = |d: &DensityMatrix| -> Result<DensityMatrix> {
        let image = psi.apply_hermitian(d.pd().base())?;
        let pd = PositiveDefiniteMatrix::new(image).map_err(|e| match e {
            Error::PdFloorViolation { min_eig, floor } => Error::ImageNotPd { min_eig, floor },
            other => other,
        })?;
        DensityMatrix::normalize(&pd)
    };
    let ix = image_density(x)?;
    let iy = image_density(y)?;
    let lhs = relative_entropy(x, y)?;
    let rhs = relative_entropy(&ix, &iy)?;
    Ok(SlackResult::new(lhs, rhs))
}

/// Per-sample report for the proof-chain audit.
#[derive(Debug, Clone)]
pub struct ProofChainSample {
    /// `|Tr[Phi†(W) H] - Tr[W Phi(H)]|` — an exact pairing identity.
    pub pairing_gap: f64,
    /// `‖W‖_F ‖H‖_F`, the scale the pairing tolerance multiplies.
    pub pairing_scale: f64,
    /// `D(W||Y/TrY) - D(Phi†(W)||Phi†(Y/TrY)) >= 0`, the chain's DPI step
    /// under the trace-preserving adjoint.
    pub dpi_slack: SlackResult,
    /// `Tr[Phi†(W)H] - D(Phi†(W)||Phi†(Y)) >= Tr[W Phi(H)] - D(W||Y)` with the
    /// relative entropy extended to positive definite second arguments.
    pub dominance: SlackResult,
}

/// Line-by-line audit of the monotonicity proof for each sampled state `W`.
pub fn check_proof_chain(
    h: &HermitianMatrix,
    y: &PositiveDefiniteMatrix,
    phi: &PositiveMapRep,
    w_samples: &[DensityMatrix],
) -> Result<Vec<ProofChainSample>> {
    require_unital(phi)?;
    if phi.in_dim() != h.dim() || phi.out_dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: phi.in_dim(),
            right: h.dim(),
        });
    }
    let adjoint = phi.adjoint();
    let phi_h = phi.apply_hermitian(h)?;
    let adj_y = adjoint_image_pd(&adjoint, y.base())?;
    let y_norm = DensityMatrix::normalize(y)?;
    let adj_y_norm = DensityMatrix::normalize(&adj_y.scale(1.0 / y.trace())?)?;

    let mut reports = Vec::with_capacity(w_samples.len());
    for w in w_samples {
        if w.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                left: w.dim(),
                right: y.dim(),
            });
        }
        let aw_pd = adjoint_image_pd(&adjoint, w.pd().base())?;
        let aw = DensityMatrix::normalize(&aw_pd)?;

        let energy_in = trace_product_re(aw.matrix(), h.matrix());
        let energy_out = trace_product_re(w.matrix(), phi_h.matrix());
        let pairing_gap = (energy_in - energy_out).abs();
        let pairing_scale = w.pd().base().frobenius_norm() * h.frobenius_norm();

        let dpi_slack = SlackResult::new(
            relative_entropy(w, &y_norm)?,
            relative_entropy(&aw, &adj_y_norm)?,
        );

        let dominance = SlackResult::new(
            energy_in - relative_entropy_pd(&aw, &adj_y)?,
            energy_out - relative_entropy_pd(w, y)?,
        );

        reports.push(ProofChainSample {
            pairing_gap,
            pairing_scale,
            dpi_slack,
            dominance,
        });
    }
    Ok(reports)
}

/// Superadditivity in the positive argument:
/// `Tr e^{H + log(Y1 + Y2)} >= Tr e^{H + log Y1} + Tr e^{H + log Y2}`.
pub fn check_superadditivity(
    h: &HermitianMatrix,
    y1: &PositiveDefiniteMatrix,
    y2: &PositiveDefiniteMatrix,
) -> Result<SlackResult> {
    if y1.dim() != y2.dim() {
        return Err(Error::DimensionMismatch {
            left: y1.dim(),
            right: y2.dim(),
        });
    }
    let sum = y1.add(y2)?;
    let lhs = trace_exp_log(h, &sum)?;
    let rhs = trace_exp_log(h, y1)? + trace_exp_log(h, y2)?;
    Ok(SlackResult::new(lhs, rhs))
}

/// Degree-one homogeneity: `F(H, tY) = t F(H, Y)` exactly, so the relative
/// deviation `|F(H, tY) - t F(H, Y)| / (t F(H, Y))` is pure round-off.
pub fn check_homogeneity(
    h: &HermitianMatrix,
    y: &PositiveDefiniteMatrix,
    t: f64,
) -> Result<f64> {
    if t <= 0.0 || !t.is_finite() {
        return Err(Error::NonPositiveScale { t });
    }
    let scaled = y.scale(t)?;
    let lhs = trace_exp_log(h, &scaled)?;
    let rhs = t * trace_exp_log(h, y)?;
    Ok((lhs - rhs).abs() / rhs)
}

/// Concavity slack computed along two algebraically equivalent routes.
#[derive(Debug, Clone)]
pub struct ConcavityCheck {
    /// `F(H, lambda Y1 + (1-lambda) Y2) - lambda F(H, Y1) - (1-lambda) F(H, Y2)`.
    pub direct: SlackResult,
    /// The same quantity through superadditivity of `(lambda Y1, (1-lambda) Y2)`
    /// plus homogeneity.
    pub route: SlackResult,
}

impl ConcavityCheck {
    /// Disagreement between the two routes; the reduction argument makes them
    /// equal, so this must stay within `EQUALITY_TOL * scale`.
    pub fn route_gap(&self) -> f64 {
        (self.direct.slack - self.route.slack).abs()
    }
}

/// Midpoint concavity in the positive argument at mixing weight `lambda`,
/// cross-validated against the superadditivity route.
pub fn check_concavity(
    h: &HermitianMatrix,
    y1: &PositiveDefiniteMatrix,
    y2: &PositiveDefiniteMatrix,
    lambda: f64,
) -> Result<ConcavityCheck> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::LambdaRange { lambda });
    }
    if y1.dim() != y2.dim() {
        return Err(Error::DimensionMismatch {
            left: y1.dim(),
            right: y2.dim(),
        });
    }
    let mix = convex_point(y1, y2, lambda)?;
    let lhs = trace_exp_log(h, &mix)?;
    let rhs = lambda * trace_exp_log(h, y1)? + (1.0 - lambda) * trace_exp_log(h, y2)?;
    let direct = SlackResult::new(lhs, rhs);
    let route = check_superadditivity(h, &y1.scale(lambda)?, &y2.scale(1.0 - lambda)?)?;
    Ok(ConcavityCheck { direct, route })
}

/// Golden-Thompson: `Tr[e^A e^B] >= Tr e^{A+B}`.
pub fn check_golden_thompson(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<SlackResult> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let ea = mat_exp(a)?;
    let eb = mat_exp(b)?;
    let lhs = trace_product_re(ea.matrix(), eb.matrix());
    let rhs: f64 = eigh(&a.add(b)?)?
        .eigenvalues()
        .iter()
        .map(|&l| l.exp())
        .sum();
    Ok(SlackResult::new(lhs, rhs))
}
