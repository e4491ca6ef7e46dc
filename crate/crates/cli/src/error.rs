use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const MISMATCH: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const CAPACITY: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cheesemap::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("every requested structure was skipped: {0}")]
    AllSkipped(String),
    #[error("{0} verification mismatch(es)")]
    Mismatch(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cheesemap::Error as E;
        match self {
            CliError::Core(E::Capacity { .. }) | CliError::AllSkipped(_) => exit::CAPACITY,
            CliError::Core(E::Io { .. } | E::Las { .. } | E::Xyz { .. }) => exit::IO,
            CliError::Core(_) | CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => exit::IO,
            CliError::Mismatch(_) => exit::MISMATCH,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
