use thiserror::Error;

/// Errors raised by set construction, the potential solver and the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver failure: {reason} (condition estimate {condition:.3e})")]
    SolverFailure { reason: String, condition: f64 },

    #[error("Riesz weight {weight:.3e} at t = {node} is negative beyond the clamp tolerance")]
    Nonpositive { node: f64, weight: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
