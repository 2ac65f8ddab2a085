use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}, column {column}: {message}")]
    Parse { path: PathBuf, row: usize, column: usize, message: String },
    #[error("unknown dataset `{0}` (expected breast-cancer, heart-disease, ionosphere or sonar)")]
    UnknownDataset(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("config key `{key}`: {message}")]
    ConfigValue { key: String, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Solver(#[from] ogaprox::Error),
    #[error(transparent)]
    Run(#[from] ogaprox::RunError),
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub fn value(key: &str, message: impl Into<String>) -> Self {
        HarnessError::ConfigValue { key: key.to_string(), message: message.into() }
    }

    /// Exit code of the binary: 2 for failed checks and rejected input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Validation(_)
            | HarnessError::Config { .. }
            | HarnessError::ConfigValue { .. }
            | HarnessError::UnknownDataset(_) => 2,
            _ => 1,
        }
    }
}
