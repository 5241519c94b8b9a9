use thiserror::Error;

/// Errors produced by sketching and reconstruction routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("matrix is not positive definite: pivot {pivot:.3e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("singular triangular factor: zero diagonal at index {0}")]
    SingularFactor(usize),

    #[error("{0} failed to converge within the iteration limit")]
    NoConvergence(&'static str),

    #[error("materialization cap exceeded: n = {n} > cap = {cap}")]
    MaterializeCap { n: usize, cap: usize },

    #[error("fixed-rank reconstruction failed after {attempts} shift escalations")]
    ReconstructionFailed { attempts: usize },

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
