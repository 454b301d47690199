//! The Gibbs variational principle as a computable optimization problem:
//! the value `log Tr e^{K + log W}`, its supremand over density matrices,
//! the closed-form candidate maximizer, an independent entropic mirror-ascent
//! solver, and concavity/curvature probes along lines in the positive cone.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hermitian::{
    eigh, entropy, log_trace_exp, relative_entropy_pd, trace_exp_log, trace_product_re,
    DensityMatrix, HermitianMatrix, PositiveDefiniteMatrix,
};

/// Gap-to-value threshold under which a mirror-ascent run counts as converged.
pub const ASCENT_GAP_TOL: f64 = 1e-4;

/// The variational problem `sup { Tr[XK] - D(X||W) }` over strictly positive
/// unit-trace `X`; with `W` absent the relative-entropy penalty degenerates to
/// the negative entropy and the value is `log Tr e^K`.
#[derive(Debug, Clone)]
pub struct GibbsProblem {
    k: HermitianMatrix,
    w: Option<PositiveDefiniteMatrix>,
}

impl GibbsProblem {
    pub fn new(k: HermitianMatrix, w: Option<PositiveDefiniteMatrix>) -> Result<Self> {
        if let Some(w) = &w {
            if w.dim() != k.dim() {
                return Err(Error::DimensionMismatch {
                    left: k.dim(),
                    right: w.dim(),
                });
            }
        }
        Ok(Self { k, w })
    }

    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    pub fn k(&self) -> &HermitianMatrix {
        &self.k
    }

    pub fn w(&self) -> Option<&PositiveDefiniteMatrix> {
        self.w.as_ref()
    }

    /// The exponent `K + log W` (or plain `K`), symmetrized.
    pub fn effective_exponent(&self) -> Result<HermitianMatrix> {
        match &self.w {
            Some(w) => self.k.add(&w.log()),
            None => Ok(self.k.clone()),
        }
    }
}

/// `log Tr e^K` or `log Tr e^{K + log W}`, via log-sum-exp on the spectrum.
pub fn gibbs_value(problem: &GibbsProblem) -> Result<f64> {
    log_trace_exp(&problem.effective_exponent()?)
}

/// The supremand `Tr[XK] + S(X)` (no `W`) or `Tr[XK] - D(X||W)`.
///
/// Weak duality: this never exceeds [`gibbs_value`] beyond round-off.
pub fn gibbs_objective(x: &DensityMatrix, problem: &GibbsProblem) -> Result<f64> {
    if x.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: problem.dim(),
        });
    }
    let energy = trace_product_re(x.matrix(), problem.k.matrix());
    match &problem.w {
        Some(w) => Ok(energy - relative_entropy_pd(x, w)?),
        None => Ok(energy + entropy(x)),
    }
}

/// The first-order stationary point `X* = e^{K + log W} / Tr e^{K + log W}`.
///
/// Its objective matches the value up to round-off; the mirror-ascent solver
/// provides the independent confirmation.
pub fn gibbs_maximizer(problem: &GibbsProblem) -> Result<DensityMatrix> {
    let exponent = problem.effective_exponent()?;
    let eig = eigh(&exponent)?;
    let lse = log_sum_exp(eig.eigenvalues());
    let weights = eig.eigenvalues().map(|l| (l - lse).exp());
    let pd = crate::hermitian::PositiveDefiniteMatrix::from_spectral(
        eig.unitary().clone(),
        weights,
    )?;
    DensityMatrix::new(pd)
}

fn log_sum_exp(v: &DVector<f64>) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().map(|&l| (l - max).exp()).sum::<f64>().ln()
}

/// One recorded mirror-ascent step.
#[derive(Debug, Clone, Copy)]
pub struct AscentTracePoint {
    pub step: usize,
    pub objective: f64,
    /// `gibbs_value - objective`; nonnegative up to round-off by weak duality.
    pub gap: f64,
}

/// Result of an entropic mirror-ascent run.
#[derive(Debug, Clone)]
pub struct MirrorAscentResult {
    pub state: DensityMatrix,
    pub trace: Vec<AscentTracePoint>,
    /// True when the final gap is within [`ASCENT_GAP_TOL`]. A false value is
    /// a reported diagnostic, never a silent pass.
    pub converged: bool,
    pub final_gap: f64,
}

/// Entropic mirror ascent on the density manifold,
/// `X_{k+1} ∝ exp(log X_k + rate * G_k)` with the Euclidean gradient
/// `G = K - log X - I (+ log W)`. Each step backs off by halving the rate
/// until the objective is nondecreasing within 1e-10.
pub fn mirror_ascent(
    problem: &GibbsProblem,
    x0: &DensityMatrix,
    steps: usize,
    rate: f64,
) -> Result<MirrorAscentResult> {
    if rate <= 0.0 || !rate.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "ascent rate must be positive, got {rate}"
        )));
    }
    if x0.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            left: x0.dim(),
            right: problem.dim(),
        });
    }
    let value = gibbs_value(problem)?;
    let target = problem.effective_exponent()?;
    let k_mat = problem.k.matrix();
    let log_w = problem.w.as_ref().map(|w| w.log());

    // Iterate in the log parametrization. The update
    //   exp(log X + rate * (K - log X + log W - I))
    // collapses to exp((1 - rate) log X + rate * (K + log W)) after the
    // trace normalization absorbs the -I term.
    let mut log_x = x0.log();
    let mut state = x0.clone();
    let mut objective = gibbs_objective(x0, problem)?;
    let mut trace = vec![AscentTracePoint {
        step: 0,
        objective,
        gap: value - objective,
    }];

    for step in 1..=steps {
        let mut eta = rate.min(1.0);
        let mut accepted = false;
        for _ in 0..64 {
            let candidate_log = log_x.scale(1.0 - eta).add(&target.scale(eta))?;
            let eig = eigh(&candidate_log)?;
            let lse = log_sum_exp(eig.eigenvalues());
            let weights = eig.eigenvalues().map(|l| (l - lse).exp());
            let pd = crate::hermitian::PositiveDefiniteMatrix::from_spectral(
                eig.unitary().clone(),
                weights,
            )?;
            // Objective from the shared spectral data: Tr[X log X] is the
            // weighted sum of the normalized exponents.
            let x_log_x: f64 = eig
                .eigenvalues()
                .iter()
                .map(|&l| (l - lse).exp() * (l - lse))
                .sum();
            let mut candidate_obj = trace_product_re(pd.matrix(), k_mat) - x_log_x;
            if let Some(lw) = &log_w {
                candidate_obj += trace_product_re(pd.matrix(), lw.matrix());
            }
            if candidate_obj >= objective - 1e-10 {
                log_x = candidate_log.sub(&HermitianMatrix::identity(problem.dim()).scale(lse))?;
                state = DensityMatrix::new(pd)?;
                objective = candidate_obj;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            // The rate underflowed without an acceptable move; the iterate is
            // already stationary to round-off.
            break;
        }
        trace.push(AscentTracePoint {
            step,
            objective,
            gap: value - objective,
        });
        if value - objective <= 1e-13 {
            break;
        }
    }

    let final_gap = value - objective;
    Ok(MirrorAscentResult {
        state,
        trace,
        converged: final_gap <= ASCENT_GAP_TOL,
        final_gap,
    })
}

/// A line `t -> Y0 + t * Direction` through the positive definite cone,
/// together with the Hermitian `H` defining `f(t) = Tr exp(H + log Y(t))`.
///
/// The smallest eigenvalue of `Y0 + t * Direction` is concave in `t`, so
/// validating strict positivity at the two endpoints guarantees it on the
/// whole interval.
#[derive(Debug, Clone)]
pub struct ScalarPath {
    h: HermitianMatrix,
    y0: PositiveDefiniteMatrix,
    direction: HermitianMatrix,
    t_range: (f64, f64),
}

impl ScalarPath {
    pub fn new(
        h: HermitianMatrix,
        y0: PositiveDefiniteMatrix,
        direction: HermitianMatrix,
        t_range: (f64, f64),
    ) -> Result<Self> {
        if h.dim() != y0.dim() || direction.dim() != y0.dim() {
            return Err(Error::DimensionMismatch {
                left: h.dim().max(direction.dim()),
                right: y0.dim(),
            });
        }
        if t_range.0 > t_range.1 || t_range.0.is_nan() || t_range.1.is_nan() {
            return Err(Error::InvalidConfig(format!(
                "path range ({}, {}) is empty",
                t_range.0, t_range.1
            )));
        }
        let path = Self {
            h,
            y0,
            direction,
            t_range,
        };
        path.point(t_range.0)?;
        path.point(t_range.1)?;
        Ok(path)
    }

    pub fn h(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn y0(&self) -> &PositiveDefiniteMatrix {
        &self.y0
    }

    pub fn direction(&self) -> &HermitianMatrix {
        &self.direction
    }

    pub fn t_range(&self) -> (f64, f64) {
        self.t_range
    }

    /// `Y0 + t * Direction` as a validated positive definite matrix.
    pub fn point(&self, t: f64) -> Result<PositiveDefiniteMatrix> {
        if t < self.t_range.0 || t > self.t_range.1 {
            return Err(Error::StepOutOfRange {
                lo: t,
                hi: t,
                range_lo: self.t_range.0,
                range_hi: self.t_range.1,
            });
        }
        PositiveDefiniteMatrix::new(self.y0.base().add(&self.direction.scale(t))?)
    }

    /// `f(t) = Tr exp(H + log Y(t))`.
    pub fn value(&self, t: f64) -> Result<f64> {
        trace_exp_log(&self.h, &self.point(t)?)
    }
}

/// Minimum midpoint-concavity gap over all pairs of probe points:
/// `min_{a<b} F(H, (Y_a + Y_b)/2) - (F(H, Y_a) + F(H, Y_b))/2`.
///
/// Concavity predicts a nonnegative result.
pub fn concavity_probe(
    h: &HermitianMatrix,
    points: &[PositiveDefiniteMatrix],
) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidConfig(
            "concavity probe needs at least two points".to_string(),
        ));
    }
    let values: Vec<f64> = points
        .iter()
        .map(|y| trace_exp_log(h, y))
        .collect::<Result<_>>()?;
    let mut min_gap = f64::INFINITY;
    for a in 0..points.len() {
        for b in (a + 1)..points.len() {
            let mid = points[a].add(&points[b])?.scale(0.5)?;
            let gap = trace_exp_log(h, &mid)? - 0.5 * (values[a] + values[b]);
            min_gap = min_gap.min(gap);
        }
    }
    Ok(min_gap)
}

/// Midpoint-concavity probe along a scalar path at the given grid of `t` values.
pub fn concavity_probe_path(path: &ScalarPath, grid: &[f64]) -> Result<f64> {
    let points: Vec<PositiveDefiniteMatrix> =
        grid.iter().map(|&t| path.point(t)).collect::<Result<_>>()?;
    concavity_probe(&path.h, &points)
}

/// The convex combination `lambda * Y1 + (1 - lambda) * Y2` for `lambda` in `[0, 1]`.
pub fn convex_point(
    y1: &PositiveDefiniteMatrix,
    y2: &PositiveDefiniteMatrix,
    lambda: f64,
) -> Result<PositiveDefiniteMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaRange { lambda });
    }
    if lambda == 0.0 {
        Ok(y2.clone())
    } else if lambda == 1.0 {
        Ok(y1.clone())
    } else {
        y1.scale(lambda)?.add(&y2.scale(1.0 - lambda)?)
    }
}

/// Midpoint-concavity probe on the segment between two positive definite
/// matrices, sampled at the given mixing weights.
pub fn concavity_probe_pair(
    h: &HermitianMatrix,
    y1: &PositiveDefiniteMatrix,
    y2: &PositiveDefiniteMatrix,
    lambdas: &[f64],
) -> Result<f64> {
    let points: Vec<PositiveDefiniteMatrix> = lambdas
        .iter()
        .map(|&l| convex_point(y1, y2, l))
        .collect::<Result<_>>()?;
    concavity_probe(h, &points)
}

/// Central-difference curvatures of `f(t) = F(H, Y(t))` and `g = log f`,
/// plus the residual of the identity `g'' = -(f'/f)^2 + f''/f`.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureProbe {
    pub d2_f: f64,
    pub d2_log_f: f64,
    pub d1_f: f64,
    /// `|g'' - (-(f'/f)^2 + f''/f)|` relative to the largest curvature term
    /// (floored at 1).
    pub identity_gap: f64,
    pub f_center: f64,
    /// Step actually used after cancellation-driven enlargement.
    pub step_used: f64,
}

/// Second derivatives of `f` and `log f` along a path by central differences.
///
/// When the second difference of `f` falls below `1e3` units in the last
/// place the step is doubled (a cancellation guard), as long as the enlarged
/// window stays inside the path range. The initial window must fit.
pub fn second_derivative_probe(path: &ScalarPath, t: f64, h: f64) -> Result<CurvatureProbe> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "step must be positive, got {h}"
        )));
    }
    let (lo, hi) = path.t_range();
    if t - h < lo || t + h > hi {
        return Err(Error::StepOutOfRange {
            lo: t - h,
            hi: t + h,
            range_lo: lo,
            range_hi: hi,
        });
    }
    let f0 = path.value(t)?;
    let mut step = h;
    let (f_plus, f_minus, used) = loop {
        let fp = path.value(t + step)?;
        let fm = path.value(t - step)?;
        let second = fp - 2.0 * f0 + fm;
        let ulp_scale = f64::EPSILON * fp.abs().max(f0.abs()).max(fm.abs());
        let can_double = t + 2.0 * step <= hi && t - 2.0 * step >= lo;
        if second.abs() < 1e3 * ulp_scale && can_double {
            step *= 2.0;
            continue;
        }
        break (fp, fm, step);
    };

    let d1_f = (f_plus - f_minus) / (2.0 * used);
    let d2_f = (f_plus - 2.0 * f0 + f_minus) / (used * used);
    let d2_log_f = (f_plus.ln() - 2.0 * f0.ln() + f_minus.ln()) / (used * used);
    let log_slope_sq = (d1_f / f0).powi(2);
    let identity_rhs = -log_slope_sq + d2_f / f0;
    let denom = d2_log_f
        .abs()
        .max(log_slope_sq)
        .max((d2_f / f0).abs())
        .max(1.0);
    let identity_gap = (d2_log_f - identity_rhs).abs() / denom;

    Ok(CurvatureProbe {
        d2_f,
        d2_log_f,
        d1_f,
        identity_gap,
        f_center: f0,
        step_used: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::CMatrix;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn pd_diag(vals: &[f64]) -> PositiveDefiniteMatrix {
        PositiveDefiniteMatrix::new(HermitianMatrix::from_real_diagonal(vals)).unwrap()
    }

    fn uniform_density(n: usize) -> DensityMatrix {
        DensityMatrix::new(
            PositiveDefiniteMatrix::new(HermitianMatrix::identity(n).scale(1.0 / n as f64))
                .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn gibbs_value_zero_exponent() {
        let p = GibbsProblem::new(HermitianMatrix::zeros(2), None).unwrap();
        assert_abs_diff_eq!(gibbs_value(&p).unwrap(), 2.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn gibbs_value_reduces_to_log_trace_w() {
        // K = 0: log Tr e^{log W} = log Tr W.
        let p = GibbsProblem::new(HermitianMatrix::zeros(2), Some(pd_diag(&[1.0, 3.0]))).unwrap();
        assert_abs_diff_eq!(gibbs_value(&p).unwrap(), 4.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn gibbs_value_diagonal_scalar_reduction() {
        let (a, b) = (0.7, -0.4);
        let p = GibbsProblem::new(
            HermitianMatrix::from_real_diagonal(&[a, b]),
            Some(pd_diag(&[1.0, 1.0])),
        )
        .unwrap();
        let expected = (a.exp() + b.exp()).ln();
        assert_abs_diff_eq!(gibbs_value(&p).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn uniform_state_attains_value_for_zero_exponent() {
        let n = 3;
        let p = GibbsProblem::new(HermitianMatrix::zeros(n), None).unwrap();
        let x = uniform_density(n);
        let obj = gibbs_objective(&x, &p).unwrap();
        assert_abs_diff_eq!(obj, (n as f64).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(obj, gibbs_value(&p).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn objective_at_w_is_zero_for_zero_k_and_density_w() {
        let w = pd_diag(&[0.25, 0.75]);
        let p = GibbsProblem::new(HermitianMatrix::zeros(2), Some(w.clone())).unwrap();
        let x = DensityMatrix::new(w).unwrap();
        assert_abs_diff_eq!(gibbs_objective(&x, &p).unwrap(), 0.0, epsilon = 1e-12);
        // Value = log Tr W = log 1 = 0, so the objective meets it.
        assert_abs_diff_eq!(gibbs_value(&p).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn maximizer_is_uniform_for_zero_exponent() {
        let n = 4;
        let p = GibbsProblem::new(HermitianMatrix::zeros(n), None).unwrap();
        let x = gibbs_maximizer(&p).unwrap();
        let diff = (x.matrix()
            - CMatrix::identity(n, n) * Complex64::new(1.0 / n as f64, 0.0))
        .norm();
        assert!(diff <= 1e-12);
    }

    #[test]
    fn maximizer_recovers_w_when_k_is_zero() {
        let w = pd_diag(&[0.25, 0.75]);
        let p = GibbsProblem::new(HermitianMatrix::zeros(2), Some(w.clone())).unwrap();
        let x = gibbs_maximizer(&p).unwrap();
        assert!((x.matrix() - w.matrix()).norm() <= 1e-12);
    }

    #[test]
    fn ascent_stays_at_the_maximizer() {
        let p = GibbsProblem::new(
            HermitianMatrix::from_real_diagonal(&[0.3, -0.8, 1.0]),
            Some(pd_diag(&[0.5, 1.0, 2.0])),
        )
        .unwrap();
        let star = gibbs_maximizer(&p).unwrap();
        let run = mirror_ascent(&p, &star, 50, 0.5).unwrap();
        assert!(run.converged);
        assert!((run.state.matrix() - star.matrix()).norm() <= 1e-9);
        assert!(run.final_gap.abs() <= 1e-9);
    }

    #[test]
    fn ascent_converges_to_uniform_for_zero_k() {
        let n = 3;
        let p = GibbsProblem::new(HermitianMatrix::zeros(n), None).unwrap();
        let x0 = DensityMatrix::new(pd_diag(&[0.7, 0.2, 0.1])).unwrap();
        let run = mirror_ascent(&p, &x0, 500, 0.5).unwrap();
        assert!(run.converged);
        assert_abs_diff_eq!(
            run.trace.last().unwrap().objective,
            (n as f64).ln(),
            epsilon = 1e-6
        );
        let target = CMatrix::identity(n, n) * Complex64::new(1.0 / n as f64, 0.0);
        assert!((run.state.matrix() - target).norm() <= 1e-6);
    }

    #[test]
    fn ascent_objective_is_monotone() {
        let p = GibbsProblem::new(
            HermitianMatrix::from_real_diagonal(&[1.2, -0.3]),
            Some(pd_diag(&[2.0, 0.5])),
        )
        .unwrap();
        let x0 = DensityMatrix::new(pd_diag(&[0.9, 0.1])).unwrap();
        let run = mirror_ascent(&p, &x0, 200, 0.5).unwrap();
        for pair in run.trace.windows(2) {
            assert!(pair[1].objective >= pair[0].objective - 1e-10);
        }
        assert!(run.converged);
    }

    #[test]
    fn path_rejects_escape_from_the_cone() {
        let y0 = pd_diag(&[1.0, 1.0]);
        let direction = HermitianMatrix::from_real_diagonal(&[-2.0, 0.0]);
        assert!(ScalarPath::new(
            HermitianMatrix::zeros(2),
            y0,
            direction,
            (-1.0, 1.0)
        )
        .is_err());
    }

    #[test]
    fn concavity_probe_is_zero_for_identical_points() {
        let h = HermitianMatrix::from_real_diagonal(&[0.4, -0.2]);
        let y = pd_diag(&[1.0, 2.0]);
        let gap = concavity_probe(&h, &[y.clone(), y]).unwrap();
        assert!(gap.abs() <= 1e-12);
    }

    #[test]
    fn concavity_probe_commuting_family_is_linear() {
        // All-diagonal instances make F linear in Y, so every midpoint gap
        // is zero to round-off.
        let h = HermitianMatrix::from_real_diagonal(&[0.5, -1.0]);
        let points = vec![
            pd_diag(&[1.0, 2.0]),
            pd_diag(&[2.0, 1.0]),
            pd_diag(&[0.5, 0.25]),
        ];
        let gap = concavity_probe(&h, &points).unwrap();
        assert!(gap.abs() <= 1e-12, "gap {gap}");
    }

    #[test]
    fn curvature_probe_constant_path_is_flat() {
        let path = ScalarPath::new(
            HermitianMatrix::from_real_diagonal(&[0.3, 0.9]),
            pd_diag(&[1.0, 2.0]),
            HermitianMatrix::zeros(2),
            (-1.0, 1.0),
        )
        .unwrap();
        let probe = second_derivative_probe(&path, 0.0, 1e-4).unwrap();
        assert_eq!(probe.d2_f, 0.0);
        assert_eq!(probe.d2_log_f, 0.0);
        assert_eq!(probe.identity_gap, 0.0);
    }

    #[test]
    fn curvature_probe_rejects_window_out_of_range() {
        let path = ScalarPath::new(
            HermitianMatrix::zeros(2),
            pd_diag(&[1.0, 2.0]),
            HermitianMatrix::zeros(2),
            (-1.0, 1.0),
        )
        .unwrap();
        assert!(matches!(
            second_derivative_probe(&path, 0.95, 0.1),
            Err(Error::StepOutOfRange { .. })
        ));
    }

    #[test]
    fn gibbs_problem_rejects_dim_mismatch() {
        assert!(GibbsProblem::new(
            HermitianMatrix::zeros(2),
            Some(pd_diag(&[1.0, 1.0, 1.0]))
        )
        .is_err());
    }
}
