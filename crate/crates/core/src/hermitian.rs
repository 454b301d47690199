//! Dense complex Hermitian linear algebra: eigendecomposition, spectral matrix
//! functions, the trace functional `Tr exp(H + log Y)`, and entropies (nats).
//!
//! Everything here works on explicit small dense matrices. Matrix functions go
//! through a full eigendecomposition rather than scaling-and-squaring: spectra
//! are small (dim <= 16) and `exp` and `log` share one decomposition of
//! `H + log Y`. Outputs of spectral calculus are re-symmetrized to suppress
//! round-off asymmetry.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout.
pub type CMatrix = DMatrix<Complex64>;

/// Relative tolerance for the `A = A†` check on [`HermitianMatrix`] inputs.
pub const HERM_TOL: f64 = 1e-12;

/// Coefficient of the strict-positivity floor: `floor = 1e-10 * max(1, |lambda|_max)`.
/// Matrices at or below the floor are rejected as numerically too close to the
/// boundary of the positive-definite cone, never regularized.
pub const PD_FLOOR_COEFF: f64 = 1e-10;

/// Absolute tolerance on `|Tr - 1|` for [`DensityMatrix`].
pub const DENSITY_TRACE_TOL: f64 = 1e-12;

/// Relative tolerance on eigendecomposition residuals (unitarity and reconstruction).
pub const EIG_RESIDUAL_TOL: f64 = 1e-10;

/// Matrix unit `E_ij` of dimension `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut e = CMatrix::zeros(n, n);
    e[(i, j)] = Complex64::new(1.0, 0.0);
    e
}

/// Hilbert-Schmidt inner product `<A, B> = Tr[A† B]`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..a.ncols().min(b.ncols()) {
        for i in 0..a.nrows().min(b.nrows()) {
            acc += a[(i, j)].conj() * b[(i, j)];
        }
    }
    acc
}

/// Real part of `Tr[A B]` without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)] * b[(j, i)];
            acc += z.re;
        }
    }
    acc
}

/// Unitary conjugation `U A U†`.
pub fn unitary_conjugate(a: &CMatrix, u: &CMatrix) -> CMatrix {
    u * a * u.adjoint()
}

fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Symmetric projection `(A + A†)/2` of a square complex matrix.
///
/// Idempotent on Hermitian input up to round-off; exact fixed point of the
/// zero matrix.
pub fn hermitize(a: &CMatrix) -> Result<HermitianMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    ensure_finite(a)?;
    Ok(HermitianMatrix::symmetrize_unchecked(a))
}

/// Square complex matrix with `A = A†` within [`HERM_TOL`], the carrier for the
/// `H` and `K` arguments of the trace functional and for perturbation directions.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    mat: CMatrix,
}

impl HermitianMatrix {
    /// Validates squareness, finiteness, and `‖A − A†‖_F <= HERM_TOL * max(1, ‖A‖_F)`.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        ensure_finite(&mat)?;
        let scale = mat.norm().max(1.0);
        let residual = (&mat - mat.adjoint()).norm();
        let tol = HERM_TOL * scale;
        if residual > tol {
            return Err(Error::NotHermitian { residual, tol });
        }
        // Project exactly onto the Hermitian subspace so downstream spectral
        // calculus sees a bit-symmetric matrix.
        Ok(Self::symmetrize_unchecked(&mat))
    }

    fn symmetrize_unchecked(mat: &CMatrix) -> Self {
        let half = Complex64::new(0.5, 0.0);
        let sym = (mat + mat.adjoint()) * half;
        Self { mat: sym }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: CMatrix::identity(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self { mat: m }
    }

    /// Block-diagonal direct sum of Hermitian parts.
    pub fn direct_sum(parts: &[&HermitianMatrix]) -> Self {
        let total: usize = parts.iter().map(|p| p.dim()).sum();
        let mut m = CMatrix::zeros(total, total);
        let mut offset = 0;
        for p in parts {
            let d = p.dim();
            m.view_mut((offset, offset), (d, d)).copy_from(&p.mat);
            offset += d;
        }
        Self { mat: m }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Operator norm `max |lambda|`, via eigendecomposition.
    pub fn op_norm(&self) -> Result<f64> {
        let eig = eigh(self)?;
        Ok(eig
            .eigenvalues()
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs())))
    }

    /// Trace, which is real for Hermitian matrices.
    pub fn trace_re(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self {
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self {
            mat: &self.mat - &other.mat,
        })
    }

    /// Real scalar multiple (stays Hermitian).
    pub fn scale(&self, t: f64) -> HermitianMatrix {
        Self {
            mat: &self.mat * Complex64::new(t, 0.0),
        }
    }

    /// `U A U†` for a unitary `U`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<HermitianMatrix> {
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: u.ncols(),
                right: self.dim(),
            });
        }
        hermitize(&unitary_conjugate(&self.mat, u))
    }
}

/// Spectral factorization `A = U diag(lambda) U†` with real ascending
/// eigenvalues and unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: DVector<f64>,
    unitary: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    /// `U diag(lambda) U†`.
    pub fn reconstruct(&self) -> CMatrix {
        self.assemble(|l| l)
    }

    /// `U diag(f(lambda)) U†` as a raw matrix; caller symmetrizes.
    fn assemble(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.unitary.clone();
        for j in 0..self.dim() {
            let fj = Complex64::new(f(self.eigenvalues[j]), 0.0);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fj);
        }
        scaled * self.unitary.adjoint()
    }

    /// Spectral calculus `f(A) = U diag(f(lambda)) U†`, re-symmetrized.
    ///
    /// Fails if `f` produces a non-finite value at any eigenvalue.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        for &l in self.eigenvalues.iter() {
            if !f(l).is_finite() {
                return Err(Error::FnUndefined { eigenvalue: l });
            }
        }
        Ok(HermitianMatrix::symmetrize_unchecked(&self.assemble(&f)))
    }
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalue order.
///
/// The result is validated against the unitarity and reconstruction residual
/// bounds; a decomposition that fails them is reported as a solver failure
/// with condition diagnostics.
pub fn eigh(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let norm = a.frobenius_norm();
    let se = a
        .mat
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 8192)
        .ok_or(Error::EigenFailed {
            dim: n,
            norm,
            residual: f64::NAN,
        })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[i]
            .partial_cmp(&se.eigenvalues[j])
            .expect("real eigenvalues")
    });
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
    let unitary = se.eigenvectors.select_columns(order.iter());

    let decomp = EigenDecomposition {
        eigenvalues,
        unitary,
    };

    let unit_residual =
        (&decomp.unitary * decomp.unitary.adjoint() - CMatrix::identity(n, n)).norm();
    let recon_residual = (decomp.reconstruct() - &a.mat).norm();
    if unit_residual > EIG_RESIDUAL_TOL * n as f64
        || recon_residual > EIG_RESIDUAL_TOL * norm.max(1.0)
    {
        return Err(Error::EigenFailed {
            dim: n,
            norm,
            residual: unit_residual.max(recon_residual),
        });
    }
    Ok(decomp)
}

/// Spectral calculus for an arbitrary real scalar function on the spectrum.
pub fn mat_fn(a: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    eigh(a)?.apply_fn(f)
}

/// Strictly positive definite matrix: Hermitian with all eigenvalues above the
/// floor `1e-10 * max(1, |lambda|_max)`. Carries its eigendecomposition so
/// that `log` and trace functionals reuse it.
#[derive(Debug, Clone)]
pub struct PositiveDefiniteMatrix {
    base: HermitianMatrix,
    eig: EigenDecomposition,
}

impl PositiveDefiniteMatrix {
    pub fn new(base: HermitianMatrix) -> Result<Self> {
        let eig = eigh(&base)?;
        Self::from_decomposition(base, eig)
    }

    fn from_decomposition(base: HermitianMatrix, eig: EigenDecomposition) -> Result<Self> {
        let abs_max = eig
            .eigenvalues()
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs()));
        let floor = PD_FLOOR_COEFF * abs_max.max(1.0);
        let min_eig = eig.min_eigenvalue();
        if min_eig <= floor {
            return Err(Error::PdFloorViolation { min_eig, floor });
        }
        Ok(Self { base, eig })
    }

    /// Trusted spectral constructor: `U diag(lambda) U†` with `lambda` ascending.
    pub(crate) fn from_spectral(unitary: CMatrix, eigenvalues: DVector<f64>) -> Result<Self> {
        let eig = EigenDecomposition {
            eigenvalues,
            unitary,
        };
        let base = HermitianMatrix::symmetrize_unchecked(&eig.reconstruct());
        ensure_finite(&base.mat)?;
        Self::from_decomposition(base, eig)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn matrix(&self) -> &CMatrix {
        self.base.matrix()
    }

    pub fn eig(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn min_eig(&self) -> f64 {
        self.eig.min_eigenvalue()
    }

    pub fn max_eig(&self) -> f64 {
        self.eig.max_eigenvalue()
    }

    pub fn pd_floor(&self) -> f64 {
        let abs_max = self
            .eig
            .eigenvalues()
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs()));
        PD_FLOOR_COEFF * abs_max.max(1.0)
    }

    pub fn trace(&self) -> f64 {
        self.base.trace_re()
    }

    /// Spectral logarithm. Safe by the strict-positivity invariant.
    pub fn log(&self) -> HermitianMatrix {
        self.eig
            .apply_fn(f64::ln)
            .expect("log is finite on a strictly positive spectrum")
    }

    /// Positive rescaling `t * Y`, reusing the cached spectrum.
    pub fn scale(&self, t: f64) -> Result<PositiveDefiniteMatrix> {
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::NonPositiveScale { t });
        }
        let eigenvalues = self.eig.eigenvalues() * t;
        Self::from_spectral(self.eig.unitary().clone(), eigenvalues)
    }

    pub fn add(&self, other: &PositiveDefiniteMatrix) -> Result<PositiveDefiniteMatrix> {
        PositiveDefiniteMatrix::new(self.base.add(&other.base)?)
    }

    pub fn conjugate_by(&self, u: &CMatrix) -> Result<PositiveDefiniteMatrix> {
        PositiveDefiniteMatrix::new(self.base.conjugate_by(u)?)
    }
}

/// Strictly positive density matrix: positive definite with unit trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pd: PositiveDefiniteMatrix,
}

impl DensityMatrix {
    pub fn new(pd: PositiveDefiniteMatrix) -> Result<Self> {
        let trace = pd.trace();
        if (trace - 1.0).abs() > DENSITY_TRACE_TOL {
            return Err(Error::NotUnitTrace {
                trace,
                tol: DENSITY_TRACE_TOL,
            });
        }
        Ok(Self { pd })
    }

    /// Normalize a positive definite matrix to unit trace.
    pub fn normalize(pd: &PositiveDefiniteMatrix) -> Result<Self> {
        Self::new(pd.scale(1.0 / pd.trace())?)
    }

    pub fn dim(&self) -> usize {
        self.pd.dim()
    }

    pub fn pd(&self) -> &PositiveDefiniteMatrix {
        &self.pd
    }

    pub fn matrix(&self) -> &CMatrix {
        self.pd.matrix()
    }

    /// Spectrum of the state, i.e. its classical probability weights.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        self.pd.eig().eigenvalues()
    }

    pub fn log(&self) -> HermitianMatrix {
        self.pd.log()
    }
}

/// Spectral exponential; strictly positive definite by construction.
pub fn mat_exp(a: &HermitianMatrix) -> Result<PositiveDefiniteMatrix> {
    let eig = eigh(a)?;
    let max = eig.max_eigenvalue();
    if max.exp().is_infinite() {
        return Err(Error::NonFinite);
    }
    // exp preserves the ascending order of the cached spectrum.
    let eigenvalues = eig.eigenvalues().map(f64::exp);
    PositiveDefiniteMatrix::from_spectral(eig.unitary().clone(), eigenvalues)
}

/// Spectral logarithm of a strictly positive definite matrix.
pub fn mat_log(y: &PositiveDefiniteMatrix) -> HermitianMatrix {
    y.log()
}

/// The trace functional `F(H, Y) = Tr exp(H + log Y)`, strictly positive.
///
/// The sum `H + log Y` is symmetrized before exponentiating.
pub fn trace_exp_log(h: &HermitianMatrix, y: &PositiveDefiniteMatrix) -> Result<f64> {
    if h.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: h.dim(),
            right: y.dim(),
        });
    }
    let exponent = h.add(&y.log())?;
    let eig = eigh(&exponent)?;
    let total: f64 = eig.eigenvalues().iter().map(|&l| l.exp()).sum();
    if !total.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(total)
}

/// `log Tr exp(K)` evaluated stably via log-sum-exp on the spectrum.
pub fn log_trace_exp(k: &HermitianMatrix) -> Result<f64> {
    let eig = eigh(k)?;
    let max = eig.max_eigenvalue();
    let sum: f64 = eig.eigenvalues().iter().map(|&l| (l - max).exp()).sum();
    Ok(max + sum.ln())
}

/// von Neumann entropy `S(X) = -Tr[X log X]` in nats; lies in `[0, log dim]`.
pub fn entropy(x: &DensityMatrix) -> f64 {
    -x.eigenvalues().iter().map(|&p| p * p.ln()).sum::<f64>()
}

/// Relative entropy `D(X||Y) = Tr[X (log X - log Y)]` in nats, for strictly
/// positive density matrices of equal dimension.
pub fn relative_entropy(x: &DensityMatrix, y: &DensityMatrix) -> Result<f64> {
    relative_entropy_pd(x, y.pd())
}

/// Relative entropy with a positive definite (not necessarily unit-trace)
/// second argument, evaluated verbatim as `Tr[X log X] - Tr[X log W]`.
pub fn relative_entropy_pd(x: &DensityMatrix, w: &PositiveDefiniteMatrix) -> Result<f64> {
    if x.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: w.dim(),
        });
    }
    let x_log_x: f64 = x.eigenvalues().iter().map(|&p| p * p.ln()).sum();
    let x_log_w = trace_product_re(x.matrix(), w.log().matrix());
    Ok(x_log_x - x_log_w)
}
