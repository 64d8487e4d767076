//! Crate-wide error type.

/// Errors produced by solvers, assemblers and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative method failed to reach its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// Structurally invalid input (grid too coarse, mismatched sizes, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// Malformed file or configuration text.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn convergence(msg: impl Into<String>) -> Self {
        Error::Convergence(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
