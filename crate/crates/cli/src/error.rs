use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("precondition failure: {0}")]
    Precondition(String),
    #[error(transparent)]
    Core(#[from] curvesmith::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 3 for unmet preconditions, 4 for I/O, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io { .. } => 4,
            Self::Precondition(_) | Self::Core(curvesmith::Error::PreconditionFailure(_)) => 3,
            Self::Json { .. } | Self::Core(_) => 1,
        }
    }
}
