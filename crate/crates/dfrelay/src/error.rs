use std::io;
use std::path::PathBuf;

/// Errors surfaced by the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Model(#[from] dfrelay_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}:{line}: {message}")]
    ConfigFile {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl AppError {
    /// Process exit code: 2 for bad input, 3 for size and resource limits,
    /// 1 for IO failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Model(e) if e.is_resource() => 3,
            AppError::Model(_) | AppError::Usage(_) | AppError::ConfigFile { .. } => 2,
            AppError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
