use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] clusterkrig_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A cell that is not a number. `row` counts data rows from 1; the
    /// header is not a row.
    #[error("{path}: row {row}, column '{column}': cannot parse '{value}' as a number")]
    NonNumeric { path: PathBuf, row: usize, column: String, value: String },

    #[error("{path}: no column named '{column}' (have: {available})")]
    MissingColumn { path: PathBuf, column: String, available: String },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl BenchError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl std::fmt::Display) -> Self {
        BenchError::Format { path: path.into(), message: message.to_string() }
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        BenchError::Config(message.into())
    }
}
