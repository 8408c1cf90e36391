use serde::Serialize;
use thiserror::Error;

use hill_core::integrator::IntegratorError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or a config that violates the schema.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] hill_core::Error),
    #[error("integration failed: {0}")]
    Integration(IntegratorError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Output(String),
    /// The integration stopped early; the partial trajectory was written.
    #[error("trajectory truncated: {0}")]
    Truncated(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

/// Machine-readable error document written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: ErrorBody,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Model(e) => e.kind(),
            CliError::Integration(e) => e.kind(),
            CliError::Io(_) => "io",
            CliError::Output(_) => "output",
            CliError::Truncated(_) => "truncated",
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            error: ErrorBody {
                kind: self.kind().to_string(),
                message: self.to_string(),
                exit_code: self.exit_code(),
            },
        }
    }
}
