use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input not found: {}", .0.display())]
    MissingInput(PathBuf),

    #[error("malformed config: {0}")]
    Config(String),

    #[error(transparent)]
    Module(#[from] lrp_core::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 3 for a missing input, 4 for a malformed config, 5 for anything that
    /// fails while running.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::MissingInput(_) => 3,
            CliError::Config(_) => 4,
            CliError::Module(_) | CliError::Io(_) => 5,
        })
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
