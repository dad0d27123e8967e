use std::path::PathBuf;

/// Errors of the file formats and the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] kornforge_core::Error),
}

pub type AppResult<T> = Result<T, AppError>;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        AppError::Parse { source_name: source_name.to_string(), line, message: message.into() }
    }

    /// Numerical failures exit with 3, everything else the user can fix with 2.
    pub fn exit_code(&self) -> i32 {
        use kornforge_core::Error as E;
        match self {
            AppError::Core(
                E::IndefiniteRhs { .. }
                | E::NoConvergence { .. }
                | E::SolveFailed(_)
                | E::SingularFaceMass
                | E::SingularCkGram,
            ) => exit::NUMERICAL,
            _ => exit::USAGE,
        }
    }
}
