use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{operation} failed: {source}")]
    Compute {
        operation: &'static str,
        #[source]
        source: pnp_steric::Error,
    },

    #[error("non-finite value in table {table}, column {column}, row {row}")]
    NonFinite { table: String, column: String, row: usize },

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot serialise the report: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn compute(operation: &'static str) -> impl FnOnce(pnp_steric::Error) -> CliError {
        move |source| CliError::Compute { operation, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            _ => EXIT_SOLVER,
        }
    }
}
