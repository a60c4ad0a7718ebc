use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] infosep_core::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub const PARSE: u8 = 2;
    pub const IO: u8 = 3;
    pub const VERIFICATION: u8 = 4;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Write { .. } => Self::IO,
            CliError::Parse(_) => Self::PARSE,
            CliError::Core(infosep_core::Error::InsufficientStatistic { .. }) => Self::VERIFICATION,
            CliError::Core(_) => Self::PARSE,
            CliError::Verification(_) => Self::VERIFICATION,
        }
    }
}
