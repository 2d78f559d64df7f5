use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{message} ({diagnostics})")]
    NotConverged { message: String, diagnostics: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("grid too coarse: {0}")]
    Grid(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn not_converged(message: impl Into<String>, diagnostics: impl Into<String>) -> Self {
        Error::NotConverged {
            message: message.into(),
            diagnostics: diagnostics.into(),
        }
    }

    /// True for errors that stem from bad input rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Domain(_) | Error::Unsupported(_))
    }
}
