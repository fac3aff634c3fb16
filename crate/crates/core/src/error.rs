use thiserror::Error;

use crate::separability::Verdict;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix dimensions must be positive (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("entry count {found} does not match {rows}x{cols}")]
    EntryCount {
        rows: usize,
        cols: usize,
        found: usize,
    },

    #[error("tolerance must be a positive finite number (got {0})")]
    InvalidTolerance(f64),

    #[error("matrix is not Hermitian: ||H - H^dag||_F = {defect:e}")]
    NotHermitian { defect: f64 },

    #[error("operator is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("Kraus list is empty")]
    EmptyKraus,

    #[error("Kraus operator {index} has shape {found:?}, expected {expected:?}")]
    KrausShape {
        index: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("state vector has zero norm")]
    ZeroVector,

    #[error("invalid decomposition: {0}")]
    MalformedDecomposition(String),

    #[error("decomposition does not reproduce the state: ||rho - sum p_j |a_j><a_j| ||_F = {defect:e}")]
    DecompositionMismatch { defect: f64 },

    #[error("decomposition component {index} has Schmidt rank {rank} (at most 2 allowed)")]
    SchmidtRankTooLarge { index: usize, rank: usize },

    #[error("channel output dimension {d_out} exceeds 3")]
    OutputTooLarge { d_out: usize },

    #[error("no parts supplied")]
    NoParts,

    #[error("part {index} is not certified (verdict {verdict:?})")]
    ChildNotCertified { index: usize, verdict: Verdict },

    #[error("parts do not sum to the supplied total: residual {residual:e}")]
    SumMismatch { residual: f64 },
}

pub(crate) fn mismatch(
    context: &'static str,
    expected: impl ToString,
    found: impl ToString,
) -> Error {
    Error::DimensionMismatch {
        context,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
