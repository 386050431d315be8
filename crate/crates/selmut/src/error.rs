//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SelmutError {
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("eigensolver did not converge: residual {residual:.3e} after {iterations} iterations")]
    EigenNoConvergence { residual: f64, iterations: usize },
    #[error("linear solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    LinearNoConvergence { residual: f64, iterations: usize },
    #[error("time step dt = {dt} violates the positivity (M-matrix) condition")]
    DtTooLarge { dt: f64 },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SelmutError>;
