use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mfm_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// `row` and `column` are 1-based and count the header line, if any.
    #[error("{path}: row {row}, column {column}: {message}")]
    Data {
        path: String,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Input { path: String, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
