//! Crate-wide error type.

/// Failures surfaced by decompositions, samplers, and evaluators.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error(
        "rank deficiency at column {column}: pivot {pivot:.3e} is below threshold {threshold:.3e}"
    )]
    RankDeficient {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.6e} (tolerance -{tolerance:.3e})")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error(
        "quaternion spectrum failed to collapse into degenerate pairs: {a:.12e} vs {b:.12e}"
    )]
    PairCollapse { a: f64, b: f64 },

    #[error(
        "complex matrix has lost the paired block structure: deviation {deviation:.3e} exceeds {tolerance:.3e}"
    )]
    BlockStructure { deviation: f64, tolerance: f64 },

    #[error("entry ({row}, {col}) does not belong to the field with beta = {beta}")]
    FieldMembership { row: usize, col: usize, beta: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
