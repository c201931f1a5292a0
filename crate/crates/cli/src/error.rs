use thiserror::Error;

/// Failure classes, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input, invalid arguments.
    #[error("input error: {0}")]
    Input(String),
    /// Positions the beacon layout cannot resolve.
    #[error("coverage check failed: {0}")]
    Coverage(String),
    #[error(transparent)]
    Domain(#[from] zigloc_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Coverage(_) | CliError::Domain(_) => 3,
            CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}
