//! Subcommand implementations.

pub mod analyze;
pub mod decompose;
pub mod norms;
pub mod simulate;
