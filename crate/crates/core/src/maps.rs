//! Structured representations of positive linear maps `Phi: M_n -> M_m`
//! with application, Hilbert-Schmidt adjoints, and certification of the
//! class hierarchy (completely positive, Schwarz, positive).
//!
//! Every constructible form is a positive map by construction: Kraus sums
//! are completely positive, the entrywise transpose is positive, and convex
//! mixtures, compositions, and block embeddings preserve positivity. That
//! way a failed inequality campaign indicts the numerics, not the map.
//!
//! Adjoints are computed symbolically per representation form; a dense
//! superoperator never appears outside the Choi matrix.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::hermitian::{
    eigh, hermitize, matrix_unit, CMatrix, HermitianMatrix,
};

/// Default absolute tolerance for unital / trace-preserving / CP certification.
pub const MAP_CERT_TOL: f64 = 1e-10;

/// A positive linear map `M_n -> M_m`, stored by how it was built.
#[derive(Debug, Clone)]
pub enum PositiveMapRep {
    /// Completely positive map `X -> sum_i A_i X A_i†` with `m x n` Kraus operators.
    KrausCp { kraus: Vec<CMatrix> },
    /// Entrywise transpose in the standard basis (positive, not completely positive).
    Transpose { dim: usize },
    /// Convex combination of maps with matching dimensions.
    ConvexMixture {
        weights: Vec<f64>,
        parts: Vec<PositiveMapRep>,
    },
    /// `outer . inner`.
    Composition {
        outer: Box<PositiveMapRep>,
        inner: Box<PositiveMapRep>,
    },
    /// `X -> diag(X, ..., X)` with `copies` diagonal blocks, into `M_{copies*dim}`.
    BlockEmbed { dim: usize, copies: usize },
}

impl PositiveMapRep {
    /// Kraus form, validated for a nonempty list of equal-shape operators.
    pub fn kraus_cp(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyKraus)?;
        let (rows, cols) = (first.nrows(), first.ncols());
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyKraus);
        }
        for (index, k) in kraus.iter().enumerate() {
            if k.nrows() != rows || k.ncols() != cols {
                return Err(Error::KrausShape {
                    index,
                    rows: k.nrows(),
                    cols: k.ncols(),
                    expected_rows: rows,
                    expected_cols: cols,
                });
            }
        }
        Ok(Self::KrausCp { kraus })
    }

    /// The identity channel on `M_n`.
    pub fn identity(dim: usize) -> Self {
        Self::KrausCp {
            kraus: vec![CMatrix::identity(dim, dim)],
        }
    }

    pub fn transpose(dim: usize) -> Self {
        Self::Transpose { dim }
    }

    /// Convex mixture with nonnegative weights summing to 1 within 1e-12.
    pub fn convex_mixture(weights: Vec<f64>, parts: Vec<PositiveMapRep>) -> Result<Self> {
        if parts.is_empty() || weights.len() != parts.len() {
            return Err(Error::InvalidConfig(format!(
                "mixture needs matching nonempty weights and parts, got {} and {}",
                weights.len(),
                parts.len()
            )));
        }
        for &w in &weights {
            if w < 0.0 || !w.is_finite() {
                return Err(Error::NegativeWeight { weight: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::WeightsNotNormalized { sum, tol: 1e-12 });
        }
        let (in_dim, out_dim) = (parts[0].in_dim(), parts[0].out_dim());
        for p in &parts[1..] {
            if p.in_dim() != in_dim || p.out_dim() != out_dim {
                return Err(Error::MixtureDims {
                    left_in: in_dim,
                    left_out: out_dim,
                    right_in: p.in_dim(),
                    right_out: p.out_dim(),
                });
            }
        }
        Ok(Self::ConvexMixture { weights, parts })
    }

    /// `outer . inner`, validated so the dimensions chain.
    pub fn composition(outer: PositiveMapRep, inner: PositiveMapRep) -> Result<Self> {
        if inner.out_dim() != outer.in_dim() {
            return Err(Error::CompositionDims {
                inner_out: inner.out_dim(),
                outer_in: outer.in_dim(),
            });
        }
        Ok(Self::Composition {
            outer: Box::new(outer),
            inner: Box::new(inner),
        })
    }

    /// The block embedding `X -> diag(X, ..., X)` with `copies >= 2`.
    pub fn block_embed_map(dim: usize, copies: usize) -> Result<Self> {
        if copies < 2 {
            return Err(Error::BlockCopies { copies });
        }
        Ok(Self::BlockEmbed { dim, copies })
    }

    pub fn in_dim(&self) -> usize {
        match self {
            Self::KrausCp { kraus } => kraus[0].ncols(),
            Self::Transpose { dim } => *dim,
            Self::ConvexMixture { parts, .. } => parts[0].in_dim(),
            Self::Composition { inner, .. } => inner.in_dim(),
            Self::BlockEmbed { dim, .. } => *dim,
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Self::KrausCp { kraus } => kraus[0].nrows(),
            Self::Transpose { dim } => *dim,
            Self::ConvexMixture { parts, .. } => parts[0].out_dim(),
            Self::Composition { outer, .. } => outer.out_dim(),
            Self::BlockEmbed { dim, copies } => dim * copies,
        }
    }

    /// Apply the map to a square matrix of the input dimension.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != x.ncols() {
            return Err(Error::NotSquare {
                rows: x.nrows(),
                cols: x.ncols(),
            });
        }
        if x.nrows() != self.in_dim() {
            return Err(Error::DimensionMismatch {
                left: x.nrows(),
                right: self.in_dim(),
            });
        }
        Ok(match self {
            Self::KrausCp { kraus } => {
                let m = self.out_dim();
                let mut acc = CMatrix::zeros(m, m);
                for k in kraus {
                    acc += k * x * k.adjoint();
                }
                acc
            }
            Self::Transpose { .. } => x.transpose(),
            Self::ConvexMixture { weights, parts } => {
                let m = self.out_dim();
                let mut acc = CMatrix::zeros(m, m);
                for (w, p) in weights.iter().zip(parts) {
                    acc += p.apply(x)? * Complex64::new(*w, 0.0);
                }
                acc
            }
            Self::Composition { outer, inner } => outer.apply(&inner.apply(x)?)?,
            Self::BlockEmbed { dim, copies } => {
                let m = dim * copies;
                let mut out = CMatrix::zeros(m, m);
                for b in 0..*copies {
                    out.view_mut((b * dim, b * dim), (*dim, *dim)).copy_from(x);
                }
                out
            }
        })
    }

    /// Apply to a Hermitian matrix; the image is symmetrized (positive maps
    /// carry Hermitian to Hermitian, so this only removes round-off).
    pub fn apply_hermitian(&self, h: &HermitianMatrix) -> Result<HermitianMatrix> {
        hermitize(&self.apply(h.matrix())?)
    }

    /// Hilbert-Schmidt adjoint `Phi†` with `<Phi(A), B> = <A, Phi†(B)>`,
    /// computed symbolically per form: Kraus lists conjugate, the transpose is
    /// self-adjoint, mixtures pass through, compositions reverse, and the
    /// block embedding dualizes to the sum of diagonal blocks (a Kraus map of
    /// block selectors, so the sum carries no floating error beyond addition).
    pub fn adjoint(&self) -> PositiveMapRep {
        match self {
            Self::KrausCp { kraus } => Self::KrausCp {
                kraus: kraus.iter().map(|k| k.adjoint()).collect(),
            },
            Self::Transpose { dim } => Self::Transpose { dim: *dim },
            Self::ConvexMixture { weights, parts } => Self::ConvexMixture {
                weights: weights.clone(),
                parts: parts.iter().map(|p| p.adjoint()).collect(),
            },
            Self::Composition { outer, inner } => Self::Composition {
                outer: Box::new(inner.adjoint()),
                inner: Box::new(outer.adjoint()),
            },
            Self::BlockEmbed { dim, copies } => {
                let mut kraus = Vec::with_capacity(*copies);
                for b in 0..*copies {
                    let mut sel = CMatrix::zeros(*dim, dim * copies);
                    sel.view_mut((0, b * dim), (*dim, *dim))
                        .copy_from(&CMatrix::identity(*dim, *dim));
                    kraus.push(sel);
                }
                Self::KrausCp { kraus }
            }
        }
    }

    /// `‖Phi(I) - I‖_F`.
    pub fn unital_residual(&self) -> f64 {
        let n = self.in_dim();
        let m = self.out_dim();
        let image = self
            .apply(&CMatrix::identity(n, n))
            .expect("identity has the input dimension");
        (image - CMatrix::identity(m, m)).norm()
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unital_residual() <= tol
    }

    /// Max over the matrix-unit basis of `|Tr Phi(E_ij) - Tr E_ij|`.
    pub fn trace_preserving_residual(&self) -> f64 {
        let n = self.in_dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let image = self
                    .apply(&matrix_unit(n, i, j))
                    .expect("matrix unit has the input dimension");
                let expected = if i == j { 1.0 } else { 0.0 };
                let tr = image.trace();
                let dev = ((tr.re - expected).powi(2) + tr.im.powi(2)).sqrt();
                worst = worst.max(dev);
            }
        }
        worst
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preserving_residual() <= tol
    }

    /// Choi matrix `sum_ij E_ij (x) Phi(E_ij)`, of dimension `n*m`.
    ///
    /// The map is completely positive iff this is positive semidefinite.
    pub fn choi(&self) -> Result<HermitianMatrix> {
        let n = self.in_dim();
        let m = self.out_dim();
        let mut c = CMatrix::zeros(n * m, n * m);
        for i in 0..n {
            for j in 0..n {
                let block = self.apply(&matrix_unit(n, i, j))?;
                c.view_mut((i * m, j * m), (m, m)).copy_from(&block);
            }
        }
        hermitize(&c)
    }

    /// Smallest eigenvalue of the Choi matrix.
    pub fn choi_min_eig(&self) -> Result<f64> {
        Ok(eigh(&self.choi()?)?.min_eigenvalue())
    }

    /// Choi positivity test at the given absolute tolerance.
    pub fn is_cp(&self, tol: f64) -> Result<bool> {
        Ok(self.choi_min_eig()? >= -tol)
    }

    /// Minimum of the Choi quadratic form over the antisymmetric pair vectors
    /// `(|ij> - |ji>)/sqrt(2)`, for square maps. An upper bound on the Choi
    /// minimum eigenvalue, so a value below `-tol` certifies non-CP without
    /// the full `nm x nm` eigendecomposition. Evaluates to exactly -1 on the
    /// transpose map.
    pub fn antisym_choi_bound(&self) -> Result<f64> {
        let n = self.in_dim();
        if self.out_dim() != n {
            return Err(Error::DimensionMismatch {
                left: self.out_dim(),
                right: n,
            });
        }
        if n < 2 {
            return Err(Error::NonCpDim { dim: n });
        }
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let e_ii = self.apply(&matrix_unit(n, i, i))?;
                let e_jj = self.apply(&matrix_unit(n, j, j))?;
                let e_ij = self.apply(&matrix_unit(n, i, j))?;
                let e_ji = self.apply(&matrix_unit(n, j, i))?;
                // <a|C|a> for a = (|ij> - |ji>)/sqrt(2), using
                // <ij|C|kl> = <j|Phi(E_ik)|l>.
                let q = 0.5
                    * (e_ii[(j, j)].re + e_jj[(i, i)].re - e_ij[(j, i)].re - e_ji[(i, j)].re);
                best = best.min(q);
            }
        }
        Ok(best)
    }
}

/// Block embedding of a Hermitian matrix: `diag(H, ..., H)` with `copies >= 2`.
pub fn block_embed(h: &HermitianMatrix, copies: usize) -> Result<HermitianMatrix> {
    let map = PositiveMapRep::block_embed_map(h.dim(), copies)?;
    map.apply_hermitian(h)
}

/// Outcome of a randomized Schwarz-inequality probe.
///
/// A probe, not a proof: absence of violation is reported as "witnessed",
/// never as a certificate.
#[derive(Debug, Clone)]
pub struct SchwarzProbe {
    /// True when no sampled `A` pushed `Phi(A†A) - Phi(A)†Phi(A)` below `-tol`.
    pub witnessed: bool,
    /// Most negative eigenvalue of the Schwarz gap seen over all trials.
    pub worst_violation: f64,
    /// The sample achieving `worst_violation`, kept when a violation was found.
    pub witness: Option<CMatrix>,
}

/// Sample random `A` in `M_n` and check `Phi(A†A) >= Phi(A)†Phi(A)`.
///
/// Requires a unital map (the Schwarz condition is stated for unital maps).
pub fn schwarz_probe(
    map: &PositiveMapRep,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<SchwarzProbe> {
    let residual = map.unital_residual();
    if residual > MAP_CERT_TOL {
        return Err(Error::NotUnital {
            residual,
            tol: MAP_CERT_TOL,
        });
    }
    let n = map.in_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for _ in 0..trials {
        let a = random_complex(n, &mut rng);
        let gap_raw = map.apply(&(a.adjoint() * &a))? - {
            let fa = map.apply(&a)?;
            fa.adjoint() * fa
        };
        let gap = hermitize(&gap_raw)?;
        let min = eigh(&gap)?.min_eigenvalue();
        if min < worst {
            worst = min;
            if min < -tol {
                witness = Some(a);
            }
        }
    }
    Ok(SchwarzProbe {
        witnessed: worst >= -tol,
        worst_violation: worst,
        witness,
    })
}

fn random_complex(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

/// Class certification summary for a map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapCertificate {
    pub is_unital: bool,
    pub is_trace_preserving: bool,
    pub is_cp: bool,
    pub schwarz_witnessed: bool,
    /// Absolute tolerance used for every constituent test.
    pub tol: f64,
}

/// Run all class tests at one tolerance. The Schwarz entry is false for
/// non-unital maps (the probe precondition fails) and for witnessed violations.
pub fn certify(
    map: &PositiveMapRep,
    schwarz_trials: usize,
    seed: u64,
    tol: f64,
) -> Result<MapCertificate> {
    let is_unital = map.is_unital(tol);
    let schwarz_witnessed = if is_unital {
        schwarz_probe(map, schwarz_trials, seed, tol)?.witnessed
    } else {
        false
    };
    Ok(MapCertificate {
        is_unital,
        is_trace_preserving: map.is_trace_preserving(tol),
        is_cp: map.is_cp(tol)?,
        schwarz_witnessed,
        tol,
    })
}

/// Eigenvalues of the Choi matrix, ascending. Exposed for class-hierarchy tests.
pub fn choi_spectrum(map: &PositiveMapRep) -> Result<DVector<f64>> {
    Ok(eigh(&map.choi()?)?.eigenvalues().clone())
}
