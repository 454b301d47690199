//! Numerical verification kernel for the trace functional
//! `F(H, Y) = Tr exp(H + log Y)` and its monotonicity, concavity, and
//! entropy-inequality structure.
//!
//! The crate provides four layers:
//!
//! - [`hermitian`]: dense complex Hermitian linear algebra — validated
//!   Hermitian/positive-definite/density types, eigendecomposition, spectral
//!   matrix functions, the trace functional, and entropies in nats.
//! - [`maps`]: structured positive linear maps (Kraus, transpose, mixtures,
//!   compositions, block embeddings) with symbolic Hilbert-Schmidt adjoints
//!   and class certification (unital, trace-preserving, completely positive,
//!   Schwarz-probed).
//! - [`variational`]: the Gibbs variational principle as value, objective,
//!   closed-form maximizer, and an independent entropic mirror-ascent solver,
//!   plus concavity and curvature probes along lines in the positive cone.
//! - [`ineq`]: slack-computing checkers for every inequality under test.
//!
//! [`sample`] supplies deterministic seeded instances for all of the above;
//! the wire formats live in [`json`].

#![forbid(unsafe_code)]

pub mod error;
pub mod hermitian;
pub mod ineq;
pub mod json;
pub mod maps;
pub mod sample;
pub mod variational;

pub use error::{Error, Result};
pub use hermitian::{
    eigh, entropy, hermitize, mat_exp, mat_fn, mat_log, relative_entropy, relative_entropy_pd,
    trace_exp_log, CMatrix, DensityMatrix, EigenDecomposition, HermitianMatrix,
    PositiveDefiniteMatrix,
};
pub use ineq::{
    check_concavity, check_dpi, check_golden_thompson, check_homogeneity, check_monotonicity,
    check_proof_chain, check_superadditivity, ConcavityCheck, ProofChainSample, SlackResult,
    DEFAULT_SLACK_TOL, EQUALITY_TOL,
};
pub use maps::{block_embed, certify, schwarz_probe, MapCertificate, PositiveMapRep, SchwarzProbe};
pub use sample::{SamplerConfig, UnitalCpForm};
pub use variational::{
    concavity_probe, gibbs_maximizer, gibbs_objective, gibbs_value, mirror_ascent, CurvatureProbe,
    GibbsProblem, MirrorAscentResult, ScalarPath,
};
