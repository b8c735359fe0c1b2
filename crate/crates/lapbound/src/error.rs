use std::io;
use std::path::PathBuf;

use lapbound_core::Error as CoreError;

/// Process exit codes of the command line tool.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const RESOURCE_GUARD: i32 = 2;
    pub const CHECK_FAILED: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
    /// A certificate or report failed its own re-check.
    #[error("check failed: {0}")]
    Check(String),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Core(CoreError::ResourceGuard(_)) => exit::RESOURCE_GUARD,
            AppError::Core(CoreError::Internal(_) | CoreError::NotConverged(_)) | AppError::Check(_) => {
                exit::CHECK_FAILED
            }
            _ => exit::VALIDATION,
        }
    }
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;
