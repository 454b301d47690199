//! Deterministic, seeded generation of test instances: Hermitian matrices,
//! positive definite and density matrices, Haar unitaries, and the map
//! families used by the inequality campaigns.
//!
//! Every sampler is a pure function of its RNG; campaigns derive one RNG per
//! (seed, stream, trial) triple so results are independent of scheduling.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hermitian::{
    hermitize, CMatrix, DensityMatrix, HermitianMatrix, PositiveDefiniteMatrix,
};
use crate::maps::PositiveMapRep;
use crate::variational::{GibbsProblem, ScalarPath};

/// Hard cap on sampled dimensions; eigendecompositions stay trivially fast.
pub const MAX_DIM: usize = 16;

/// Default operator-norm cap for sampled Hermitian matrices.
pub const DEFAULT_SPECTRUM_SCALE: f64 = 2.0;

/// Default cap on the condition number of sampled positive definite matrices.
pub const DEFAULT_CONDITION_CAP: f64 = 1e4;

/// Seeded sampling parameters for a campaign.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Inclusive `(n_min, n_max)` with `1 <= n_min <= n_max <= 16`.
    pub dim_range: (usize, usize),
    /// Cap on `|eigenvalues|` of sampled Hermitian matrices.
    pub spectrum_scale: f64,
    /// Cap on `lambda_max / lambda_min` of sampled positive definite matrices.
    pub condition_cap: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            dim_range: (2, 8),
            spectrum_scale: DEFAULT_SPECTRUM_SCALE,
            condition_cap: DEFAULT_CONDITION_CAP,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.dim_range;
        if lo < 1 || lo > hi || hi > MAX_DIM {
            return Err(Error::InvalidConfig(format!(
                "dim_range must satisfy 1 <= n_min <= n_max <= {MAX_DIM}, got ({lo}, {hi})"
            )));
        }
        if self.condition_cap < 1.0 || self.condition_cap.is_nan() {
            return Err(Error::InvalidConfig(format!(
                "condition_cap must be >= 1, got {}",
                self.condition_cap
            )));
        }
        if self.spectrum_scale < 0.0 || self.spectrum_scale.is_nan() {
            return Err(Error::InvalidConfig(format!(
                "spectrum_scale must be >= 0, got {}",
                self.spectrum_scale
            )));
        }
        Ok(())
    }
}

/// RNG for one trial, derived from `(seed, stream, trial)` so parallel
/// campaigns are order-independent and replayable.
pub fn trial_rng(seed: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&trial.to_le_bytes());
    key[24..32].copy_from_slice(b"trcineq\0");
    ChaCha8Rng::from_seed(key)
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `rows x cols` matrix of i.i.d. standard complex Gaussians.
pub fn random_complex_gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(gauss(rng) * inv_sqrt2, gauss(rng) * inv_sqrt2)
    })
}

/// Hermitized complex Gaussian, rescaled so the operator norm is at most `scale`.
pub fn random_hermitian(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Result<HermitianMatrix> {
    if scale < 0.0 || scale.is_nan() {
        return Err(Error::InvalidConfig(format!(
            "spectrum scale must be >= 0, got {scale}"
        )));
    }
    let g = random_complex_gaussian(n, n, rng);
    let h = hermitize(&g)?;
    let op = h.op_norm()?;
    if op > scale {
        // Cap; scale = 0 maps everything to the zero matrix.
        Ok(h.scale(scale / op))
    } else {
        Ok(h)
    }
}

/// Haar-distributed unitary via QR of a Gaussian with phase correction.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = random_complex_gaussian(n, n, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            d / d.norm()
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// Positive definite matrix `U diag(lambda) U†` with eigenvalues drawn
/// log-uniformly from `[cap^{-1/2}, cap^{1/2}]`, so every eigenvalue ratio is
/// at most `condition_cap`.
pub fn random_pd(
    n: usize,
    condition_cap: f64,
    rng: &mut ChaCha8Rng,
) -> Result<PositiveDefiniteMatrix> {
    if condition_cap < 1.0 || condition_cap.is_nan() {
        return Err(Error::InvalidConfig(format!(
            "condition_cap must be >= 1, got {condition_cap}"
        )));
    }
    let u = random_unitary(n, rng);
    let mut lambdas: Vec<f64> = (0..n)
        .map(|_| condition_cap.powf(rng.random::<f64>() - 0.5))
        .collect();
    lambdas.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    PositiveDefiniteMatrix::from_spectral(u, DVector::from_vec(lambdas))
}

/// Strictly positive density matrix with the default condition cap.
pub fn random_density(n: usize, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    random_density_with_cap(n, DEFAULT_CONDITION_CAP, rng)
}

/// Strictly positive density matrix: a conditioned PD draw normalized to unit trace.
pub fn random_density_with_cap(
    n: usize,
    condition_cap: f64,
    rng: &mut ChaCha8Rng,
) -> Result<DensityMatrix> {
    let pd = random_pd(n, condition_cap, rng)?;
    DensityMatrix::normalize(&pd)
}

/// Which unital completely positive family to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitalCpForm {
    /// `X -> sum_i w_i U_i X U_i†`: unital and trace-preserving.
    MixedUnitary,
    /// Adjoint of a Stinespring-dilated channel: unital, generally not
    /// trace-preserving.
    StinespringAdjoint,
}

/// Random unital completely positive map on `M_n`.
pub fn random_unital_cp(
    n: usize,
    kraus_count: usize,
    form: UnitalCpForm,
    rng: &mut ChaCha8Rng,
) -> Result<PositiveMapRep> {
    if kraus_count == 0 {
        return Err(Error::InvalidConfig(
            "kraus_count must be >= 1".to_string(),
        ));
    }
    match form {
        UnitalCpForm::MixedUnitary => {
            let raw: Vec<f64> = (0..kraus_count)
                .map(|_| rng.random::<f64>() + 1e-3)
                .collect();
            let total: f64 = raw.iter().sum();
            let kraus = raw
                .into_iter()
                .map(|w| {
                    let u = random_unitary(n, rng);
                    u * Complex64::new((w / total).sqrt(), 0.0)
                })
                .collect();
            PositiveMapRep::kraus_cp(kraus)
        }
        UnitalCpForm::StinespringAdjoint => {
            Ok(random_tp_channel(n, kraus_count.max(2), rng)?.adjoint())
        }
    }
}

/// Random trace-preserving channel on `M_n` from a Stinespring isometry with
/// `env_dim` Kraus operators.
pub fn random_tp_channel(
    n: usize,
    env_dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PositiveMapRep> {
    let env = env_dim.max(1);
    let g = random_complex_gaussian(n * env, n, rng);
    let isometry = g.qr().q();
    let kraus = (0..env)
        .map(|i| CMatrix::from(isometry.view((i * n, 0), (n, n))))
        .collect();
    PositiveMapRep::kraus_cp(kraus)
}

/// Random unital completely positive map `M_n -> M_m` for arbitrary target
/// dimension: a compression `X -> V†(X (x) I_k)V` of the ampliation by a Haar
/// isometry `V`, written in Kraus form.
pub fn random_unital_cp_rect(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<PositiveMapRep> {
    // The environment must be large enough that the isometry exists
    // (n*k >= m) and that the adjoint image generically has full rank
    // (k*m >= n); otherwise `Phi†(Y)` is singular by construction.
    let k = m.div_ceil(n).max(n.div_ceil(m)) + 1;
    let g = random_complex_gaussian(n * k, m, rng);
    let isometry = g.qr().q();
    let kraus = (0..k)
        .map(|i| {
            CMatrix::from_fn(m, n, |a, q| isometry[(q * k + i, a)].conj())
        })
        .collect();
    PositiveMapRep::kraus_cp(kraus)
}

/// Threshold below which an antisymmetric Choi bound certifies a map as not
/// completely positive.
pub const NONCP_CERT_TOL: f64 = 1e-6;

/// Random unital positive map on `M_n` certified not completely positive:
/// a convex mixture putting weight at least 1/2 on the transpose (or a
/// transpose-composed channel), re-drawn with a heavier transpose weight until
/// the Choi test certifies non-CP; the pure transpose is the fixed point of
/// that escalation.
pub fn random_unital_positive_noncp(n: usize, rng: &mut ChaCha8Rng) -> Result<PositiveMapRep> {
    if n < 2 {
        return Err(Error::NonCpDim { dim: n });
    }
    let mut weight = 0.5 + 0.4 * rng.random::<f64>();
    for _ in 0..8 {
        let variant = rng.random_range(0..3u8);
        let transpose_part = match variant {
            0 | 1 => PositiveMapRep::transpose(n),
            _ => PositiveMapRep::composition(
                PositiveMapRep::transpose(n),
                random_unital_cp(n, 2, UnitalCpForm::MixedUnitary, rng)?,
            )?,
        };
        let cp_part = match variant {
            0 => random_unital_cp(n, 1 + rng.random_range(0..3usize), UnitalCpForm::MixedUnitary, rng)?,
            _ => random_unital_cp(n, 2, UnitalCpForm::StinespringAdjoint, rng)?,
        };
        let candidate = PositiveMapRep::convex_mixture(
            vec![weight, 1.0 - weight],
            vec![transpose_part, cp_part],
        )?;
        if candidate.antisym_choi_bound()? < -NONCP_CERT_TOL {
            return Ok(candidate);
        }
        weight = 0.5 * (1.0 + weight);
    }
    Ok(PositiveMapRep::transpose(n))
}

/// The completely depolarizing channel `X -> Tr(X) I/n` in Kraus form.
pub fn completely_depolarizing(n: usize) -> PositiveMapRep {
    let scale = Complex64::new((n as f64).sqrt().recip(), 0.0);
    let mut kraus = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut k = CMatrix::zeros(n, n);
            k[(i, j)] = Complex64::new(1.0, 0.0);
            kraus.push(k * scale);
        }
    }
    PositiveMapRep::kraus_cp(kraus).expect("nonempty Kraus list")
}

/// Random Gibbs problem: `K` within the spectrum scale and, when requested, a
/// conditioned positive definite `W`.
pub fn random_gibbs_problem(
    n: usize,
    spectrum_scale: f64,
    condition_cap: f64,
    with_w: bool,
    rng: &mut ChaCha8Rng,
) -> Result<GibbsProblem> {
    let k = random_hermitian(n, spectrum_scale, rng)?;
    let w = if with_w {
        Some(random_pd(n, condition_cap, rng)?)
    } else {
        None
    };
    GibbsProblem::new(k, w)
}

/// Random interior line through the positive definite cone: base point `Y0`,
/// direction capped at `0.45 * lambda_min(Y0)` in operator norm, probed over
/// `t in [-1, 1]` so every point keeps a safe spectral margin.
pub fn random_scalar_path(
    n: usize,
    spectrum_scale: f64,
    condition_cap: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ScalarPath> {
    let h = random_hermitian(n, spectrum_scale, rng)?;
    let y0 = random_pd(n, condition_cap, rng)?;
    let raw = random_hermitian(n, 1.0, rng)?;
    let op = raw.op_norm()?;
    let direction = if op == 0.0 {
        raw
    } else {
        raw.scale(0.45 * y0.min_eig() / op)
    };
    ScalarPath::new(h, y0, direction, (-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MAP_CERT_TOL;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_scale_yields_zero_matrix() {
        let mut rng = trial_rng(1, 0, 0);
        let h = random_hermitian(4, 0.0, &mut rng).unwrap();
        assert_eq!(h.frobenius_norm(), 0.0);
    }

    #[test]
    fn hermitian_draws_replay_bit_identically() {
        let a = random_hermitian(5, 2.0, &mut trial_rng(7, 3, 11)).unwrap();
        let b = random_hermitian(5, 2.0, &mut trial_rng(7, 3, 11)).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = random_hermitian(5, 2.0, &mut trial_rng(7, 3, 12)).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn hermitian_draw_respects_operator_norm_cap() {
        let mut rng = trial_rng(2, 0, 0);
        for _ in 0..20 {
            let h = random_hermitian(6, 1.5, &mut rng).unwrap();
            assert!(h.op_norm().unwrap() <= 1.5 + 1e-12);
        }
    }

    #[test]
    fn unitary_is_orthonormal() {
        let mut rng = trial_rng(3, 0, 0);
        for n in [1usize, 2, 5, 8] {
            let u = random_unitary(n, &mut rng);
            let resid = (&u * u.adjoint() - CMatrix::identity(n, n)).norm();
            assert!(resid <= 1e-10, "unitarity residual {resid}");
        }
    }

    #[test]
    fn unitary_replays() {
        let a = random_unitary(4, &mut trial_rng(9, 1, 5));
        let b = random_unitary(4, &mut trial_rng(9, 1, 5));
        assert_eq!(a, b);
    }

    #[test]
    fn pd_eigenvalue_ratio_within_cap_over_ten_thousand_draws() {
        let cap = 100.0;
        for trial in 0..10_000u64 {
            let mut rng = trial_rng(4, 0, trial);
            let n = 2 + (trial % 5) as usize;
            let y = random_pd(n, cap, &mut rng).unwrap();
            assert!(y.max_eig() / y.min_eig() <= cap * (1.0 + 1e-9));
        }
    }

    #[test]
    fn condition_cap_one_forces_identity() {
        let mut rng = trial_rng(5, 0, 0);
        let y = random_pd(4, 1.0, &mut rng).unwrap();
        let diff = y.base().sub(&HermitianMatrix::identity(4)).unwrap();
        assert!(diff.frobenius_norm() <= 1e-12);
    }

    #[test]
    fn density_has_unit_trace() {
        let mut rng = trial_rng(6, 0, 0);
        for _ in 0..50 {
            let x = random_density(4, &mut rng).unwrap();
            assert_abs_diff_eq!(x.pd().trace(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_kraus_mixed_unitary_is_conjugation() {
        let mut rng = trial_rng(7, 0, 0);
        let map = random_unital_cp(3, 1, UnitalCpForm::MixedUnitary, &mut rng).unwrap();
        assert!(map.is_unital(MAP_CERT_TOL));
        assert!(map.is_trace_preserving(MAP_CERT_TOL));
    }

    #[test]
    fn unital_cp_families_are_unital_and_cp() {
        let mut rng = trial_rng(8, 0, 0);
        for form in [UnitalCpForm::MixedUnitary, UnitalCpForm::StinespringAdjoint] {
            for _ in 0..10 {
                let map = random_unital_cp(3, 3, form, &mut rng).unwrap();
                assert!(map.is_unital(MAP_CERT_TOL));
                assert!(map.is_cp(MAP_CERT_TOL).unwrap());
            }
        }
    }

    #[test]
    fn rect_unital_cp_is_unital() {
        let mut rng = trial_rng(9, 0, 0);
        for (n, m) in [(2usize, 3usize), (3, 5), (4, 7), (5, 2)] {
            let map = random_unital_cp_rect(n, m, &mut rng).unwrap();
            assert_eq!(map.in_dim(), n);
            assert_eq!(map.out_dim(), m);
            assert!(map.is_unital(MAP_CERT_TOL));
            assert!(map.is_cp(MAP_CERT_TOL).unwrap());
        }
    }

    #[test]
    fn tp_channel_preserves_trace() {
        let mut rng = trial_rng(10, 0, 0);
        let map = random_tp_channel(4, 3, &mut rng).unwrap();
        assert!(map.is_trace_preserving(MAP_CERT_TOL));
    }

    #[test]
    fn noncp_sampler_emits_certified_noncp_unital_maps() {
        let mut rng = trial_rng(11, 0, 0);
        for _ in 0..25 {
            let map = random_unital_positive_noncp(3, &mut rng).unwrap();
            assert!(map.is_unital(MAP_CERT_TOL));
            let min = map.choi_min_eig().unwrap();
            assert!(min < -NONCP_CERT_TOL, "choi min eig {min} not certified");
        }
    }

    #[test]
    fn noncp_sampler_keeps_majority_weight_on_the_transpose_part() {
        let mut rng = trial_rng(15, 0, 0);
        for _ in 0..50 {
            match random_unital_positive_noncp(3, &mut rng).unwrap() {
                PositiveMapRep::ConvexMixture { weights, .. } => {
                    assert!(weights[0] >= 0.5, "transpose weight {}", weights[0]);
                    assert!(weights[1] < 1.0);
                }
                PositiveMapRep::Transpose { .. } => {}
                other => panic!("unexpected form {other:?}"),
            }
        }
    }

    #[test]
    fn noncp_sampler_rejects_dim_one() {
        let mut rng = trial_rng(12, 0, 0);
        assert!(matches!(
            random_unital_positive_noncp(1, &mut rng),
            Err(Error::NonCpDim { dim: 1 })
        ));
    }

    #[test]
    fn depolarizing_is_tp_and_sends_everything_to_maximally_mixed() {
        let map = completely_depolarizing(3);
        assert!(map.is_trace_preserving(MAP_CERT_TOL));
        let mut rng = trial_rng(13, 0, 0);
        let x = random_density(3, &mut rng).unwrap();
        let image = map.apply(x.matrix()).unwrap();
        let target = CMatrix::identity(3, 3) * Complex64::new(1.0 / 3.0, 0.0);
        assert!((image - target).norm() <= 1e-12);
    }

    #[test]
    fn scalar_path_stays_positive_definite() {
        let mut rng = trial_rng(14, 0, 0);
        let path = random_scalar_path(4, 2.0, 100.0, &mut rng).unwrap();
        for t in [-1.0, -0.5, 0.0, 0.7, 1.0] {
            assert!(path.point(t).is_ok());
        }
    }

    #[test]
    fn config_validation_rejects_bad_ranges() {
        let mut cfg = SamplerConfig {
            dim_range: (0, 4),
            ..SamplerConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.dim_range = (2, 32);
        assert!(cfg.validate().is_err());
        cfg.dim_range = (5, 3);
        assert!(cfg.validate().is_err());
        cfg = SamplerConfig::default();
        cfg.condition_cap = 0.5;
        assert!(cfg.validate().is_err());
    }
}
