use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("{failed} of {total} checks failed")]
    CheckFailed { failed: usize, total: usize },
    #[error(transparent)]
    Core(#[from] metagibbs::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for failed checks, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed { .. } => 2,
            _ => 1,
        }
    }
}
