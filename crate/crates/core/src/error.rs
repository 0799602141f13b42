use thiserror::Error;

/// Errors raised by lattice, operator and report operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("dimensions must be positive")]
    EmptyDimension,

    #[error("enumeration limit exceeded: dimension {dim} is above the cap of {cap}")]
    EnumerationLimit { dim: usize, cap: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("{0} must be positive")]
    NotPositive(&'static str),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("partition strategy produced no partitions")]
    EmptyStrategy,

    #[error("superoperator has no factor form")]
    NoFactorForm,

    #[error("invalid norm exponent {0}; expected a value in [1, inf]")]
    InvalidExponent(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
