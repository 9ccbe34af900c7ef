use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] crflow_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(crflow_core::Error::InvalidConfig(_) | crflow_core::Error::InvalidGrid(_) | crflow_core::Error::InvalidMetric(_)) => 2,
            CliError::Core(crflow_core::Error::NonInvertibleOperator(_)) => 3,
            CliError::Core(crflow_core::Error::NumericalBreakdown(_)) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
