use thiserror::Error;

use qwitness_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    /// Classifies a library error, prefixing the coordinate it occurred at.
    pub fn from_core(e: &CoreError, at: &str) -> Self {
        let msg = if at.is_empty() {
            e.to_string()
        } else {
            format!("{at}: {e}")
        };
        match e {
            CoreError::InvalidModel(_)
            | CoreError::Capacity { .. }
            | CoreError::InvalidOperator(_)
            | CoreError::SiteOutOfRange { .. }
            | CoreError::NegativeTemperature(_) => CliError::Config(msg),
            e if e.is_data() => CliError::Data(msg),
            _ => CliError::Numeric(msg),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::from_core(&e, "")
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}
