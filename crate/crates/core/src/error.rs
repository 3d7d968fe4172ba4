use thiserror::Error;

use crate::marginal::SolverDiagnostics;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible marginal constraints: {message}")]
    Infeasible {
        message: String,
        diagnostics: Box<SolverDiagnostics>,
    },

    #[error("input error at {path}: {message}")]
    Input { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Input-side errors (malformed files, bad parameters) as opposed to
    /// numerical failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Input { .. } | Error::Validation(_) | Error::Dimension(_)
        )
    }
}
