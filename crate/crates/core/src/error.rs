use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MgcError {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("insufficient sample: need at least {needed} observations, got {got}")]
    InsufficientSample { needed: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("oracle refused: n = {n} exceeds the bound {bound}")]
    OracleBound { n: usize, bound: usize },

    #[error("oracle cross-check failed: {0}")]
    OracleMismatch(String),

    #[error("unknown simulation '{name}'; valid names: {valid}")]
    UnknownSimulation { name: String, valid: String },
}

pub type Result<T> = std::result::Result<T, MgcError>;
