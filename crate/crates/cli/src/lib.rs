//! Library side of the `mfm` command: data ingestion, run configuration
//! and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod output;

pub use config::{RunConfig, Scale};
pub use error::{CliError, Result};
pub use ingest::{ingest_csv, load_data, parse_csv};
