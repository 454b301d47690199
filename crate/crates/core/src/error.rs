//! Shared error taxonomy for the numerical kernel and the checkers built on it.

use thiserror::Error;

/// Errors for matrix construction, map algebra, sampling, and inequality checks.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("not Hermitian: asymmetry {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("eigensolver failed on a {dim}x{dim} matrix (norm {norm:.3e}, residual {residual:.3e})")]
    EigenFailed { dim: usize, norm: f64, residual: f64 },

    #[error("positive-definite floor violated: min eigenvalue {min_eig:.3e} <= floor {floor:.3e}")]
    PdFloorViolation { min_eig: f64, floor: f64 },

    #[error("trace {trace} is not 1 within {tol:.1e}")]
    NotUnitTrace { trace: f64, tol: f64 },

    #[error("scalar function undefined (non-finite) at eigenvalue {eigenvalue}")]
    FnUndefined { eigenvalue: f64 },

    #[error("Kraus list is empty")]
    EmptyKraus,

    #[error("Kraus operator {index} is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    KrausShape {
        index: usize,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },

    #[error("mixture weights sum to {sum}, expected 1 within {tol:.1e}")]
    WeightsNotNormalized { sum: f64, tol: f64 },

    #[error("mixture weight {weight} is negative")]
    NegativeWeight { weight: f64 },

    #[error("mixture parts disagree on dimensions: {left_in}->{left_out} vs {right_in}->{right_out}")]
    MixtureDims {
        left_in: usize,
        left_out: usize,
        right_in: usize,
        right_out: usize,
    },

    #[error("composition does not chain: inner produces dim {inner_out}, outer consumes dim {outer_in}")]
    CompositionDims { inner_out: usize, outer_in: usize },

    #[error("block embedding needs at least 2 copies, got {copies}")]
    BlockCopies { copies: usize },

    #[error("map is not unital: residual {residual:.3e} exceeds {tol:.3e}")]
    NotUnital { residual: f64, tol: f64 },

    #[error("map is not trace-preserving: residual {residual:.3e} exceeds {tol:.3e}")]
    NotTracePreserving { residual: f64, tol: f64 },

    #[error("adjoint image left the positive-definite cone: min eigenvalue {min_eig:.3e} <= floor {floor:.3e}")]
    AdjointNotPd { min_eig: f64, floor: f64 },

    #[error("map image left the positive-definite cone: min eigenvalue {min_eig:.3e} <= floor {floor:.3e}")]
    ImageNotPd { min_eig: f64, floor: f64 },

    #[error("non-CP sampling needs dimension >= 2, got {dim}")]
    NonCpDim { dim: usize },

    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),

    #[error("probe window [{lo}, {hi}] leaves the path range [{range_lo}, {range_hi}]")]
    StepOutOfRange {
        lo: f64,
        hi: f64,
        range_lo: f64,
        range_hi: f64,
    },

    #[error("mixing parameter {lambda} must lie in (0, 1)")]
    LambdaRange { lambda: f64 },

    #[error("scale factor {t} must be positive")]
    NonPositiveScale { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
