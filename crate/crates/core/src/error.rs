use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid density model: {0}")]
    InvalidModel(String),

    #[error("general position violated: {0}")]
    GeneralPosition(String),

    #[error("point count {n} exceeds the exact-method cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("not doubly increasing: {0}")]
    NotMonotone(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("projection did not converge after {iterations} sweeps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
