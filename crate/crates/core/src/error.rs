use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented invariant (dimensions, ordering, definiteness).
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical routine failed: divergence, singular matrix, non-convergence.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for failures of numerical routines as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}
