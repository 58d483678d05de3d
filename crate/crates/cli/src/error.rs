use thiserror::Error;

/// Failures of a CLI command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Solver(_) | CliError::Io(_) => 4,
        }
    }
}

impl From<swipt_core::Error> for CliError {
    fn from(e: swipt_core::Error) -> Self {
        use swipt_core::Error as E;
        match e {
            E::Config(_) | E::InvalidInput(_) => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
