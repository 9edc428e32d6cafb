use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] plsmooth::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Load {
        path: PathBuf,
        #[source]
        source: plsmooth::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Inconclusive core errors map to 2, everything else to 1.
    pub fn exit_code(&self) -> u8 {
        let core = match self {
            CliError::Core(e) | CliError::Load { source: e, .. } => Some(e),
            _ => None,
        };
        match core {
            Some(plsmooth::Error::Inconclusive(_)) => 2,
            Some(plsmooth::Error::Stage { source, .. }) if matches!(**source, plsmooth::Error::Inconclusive(_)) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
