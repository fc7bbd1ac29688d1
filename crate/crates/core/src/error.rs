use thiserror::Error;

/// Errors produced by the matrix kernels, the refinement driver and the I/O layer.
///
/// Row and column indices carried by variants are zero-based; the `Display`
/// output reports them one-based, as a user reading a matrix file would count.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("entry ({}, {}) is not finite", .row + 1, .col + 1)]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not upper triangular: entry ({}, {}) = {value:e} lies below the diagonal", .row + 1, .col + 1)]
    NotUpperTriangular { row: usize, col: usize, value: f64 },

    #[error("matrix is singular: diagonal entry ({0}, {0}) is zero", .index + 1)]
    Singular { index: usize },

    #[error("index out of range: {index} for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("matrix order must be at least {min}, got {n}")]
    TooSmall { n: usize, min: usize },

    #[error("{op} sweep requires {expected} half-sweep index, state is at l = {l}")]
    WrongParity {
        op: &'static str,
        expected: &'static str,
        l: usize,
    },

    #[error("orthogonal factors were not accumulated for this refinement")]
    FactorsNotAccumulated,

    #[error("refinement history is empty or has no completed double sweep")]
    MissingHistory,

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("infeasible test matrix specification: {0}")]
    InfeasibleSpec(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
