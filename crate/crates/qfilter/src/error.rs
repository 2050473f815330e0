use std::process::ExitCode;

use qfilter_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A precondition on the configuration or model failed before or while
    /// building the scenario.
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("I/O failure: {0}")]
    Io(String),
    /// A numerical invariant broke during computation.
    #[error("invariant failure: {0}")]
    Invariant(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 1 invariant failure, 2 validation, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn to_exit(&self) -> ExitCode {
        ExitCode::from(self.exit_code())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::PositivityViolated { .. } | CoreError::Annihilated { .. } => CliError::Invariant(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
