use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected at most {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("quadrature did not converge after {evaluations} evaluations (estimate {estimate:e}, residual {residual:e})")]
    Quadrature {
        estimate: f64,
        residual: f64,
        evaluations: usize,
    },

    #[error("root finding failed: residual {residual:e} exceeds {tolerance:e}")]
    RootFinding { residual: f64, tolerance: f64 },

    #[error("iteration did not converge in {iterations} steps (last estimate {last:e})")]
    NoConvergence { last: f64, iterations: usize },

    #[error("eigensolver failed: {0}")]
    Eigen(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
