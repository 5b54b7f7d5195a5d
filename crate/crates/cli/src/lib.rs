//! File-level front end for `mkd-core`: CSV ingestion and emission, flat
//! configuration files, run manifests and the subcommands of the `mkd`
//! binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod grids;
pub mod ingest;
pub mod manifest;
pub mod output;

pub use commands::{aggregate, compare, compare_series, downscale, evaluate, forecast, ModelChoice, RunContext};
pub use config::Settings;
pub use error::{CliError, CliResult};
pub use ingest::{ingest_csv, Ingested, Schema};
pub use manifest::{verify_manifest, Clock, RunManifest};
