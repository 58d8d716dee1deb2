//! Library side of the `quatflow` binary: configuration parsing, snapshot
//! and diagnostics I/O, named presets, the run manifest and the subcommand
//! implementations. Kept as a library so integration and acceptance tests
//! can drive everything in-process.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod ndjson;
pub mod presets;
pub mod snapshot;

pub use config::{parse_config, CliConfig};
pub use error::{CliError, CliResult};
