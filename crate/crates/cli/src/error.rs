use thiserror::Error;

/// Failures of a subcommand, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed input or options: exit 2.
    #[error("{0}")]
    Parse(String),
    /// A numerical routine failed: exit 1.
    #[error(transparent)]
    Numeric(#[from] lobound::Error),
    /// A check ran and did not pass: exit 1.
    #[error("{0}")]
    Failed(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Numeric(lobound::Error::InvalidDensity(_)) => 2,
            CliError::Numeric(_) | CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}
