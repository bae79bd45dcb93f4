//! Command-line front end: configuration, mode pipelines and CSV/JSON
//! emission for the `pnp-steric` binary.

pub mod args;
pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod run;

pub use config::{parse_config, RunConfig};
pub use error::{CliError, Result};
pub use report::{RunReport, Table};
pub use run::run;
