use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter or argument falls outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine could not reach its requested tolerance.
    #[error("numerical error: {message} (achieved error estimate {achieved:e})")]
    Numeric { message: String, achieved: f64 },

    /// Malformed prior specification string. `position` is a byte offset.
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    /// Bad or missing configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
