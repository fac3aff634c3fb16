//! Verification toolkit for quantum channels and bipartite states.
//!
//! - [`linalg`]: dense complex matrices, Kronecker products, partial
//!   transpose/trace, Hermitian spectra and PSD tests.
//! - [`channels`]: Kraus channels, Choi matrices, composition, TP/PPT tests
//!   and seeded random channels.
//! - [`states`]: Schmidt rank, PPT, realignment, local supports and
//!   decomposition validation.
//! - [`separability`]: certificate-producing separability tests.
//! - [`fixtures`]: the 4⊗4 worked example and its end-to-end verification.
//! - [`suite`]: randomized property suites with replayable per-trial seeds.

pub mod channels;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod random;
pub mod report;
pub mod separability;
pub mod states;
pub mod suite;

pub use channels::{compose, random_cptp, sample_ppt_channel, KrausChannel};
pub use error::{Error, Result};
pub use linalg::{
    hermitian_eigenvalues, is_psd, kron, partial_trace, partial_transpose, BipartiteOperator,
    ComplexMatrix, Subsystem, Tolerance,
};
pub use num_complex::Complex64;
pub use report::{Check, Status, VerificationReport};
pub use separability::{
    certify_block_split, certify_convex_split, certify_peres_horodecki, certify_schmidt2_pipeline,
    SeparabilityCertificate, Verdict,
};
pub use states::{
    is_ppt_state, local_support_dims, realignment_norm, schmidt_rank, validate_decomposition,
    PureDecomposition, PureStateVector,
};
