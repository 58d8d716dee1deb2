//! CLI error type and process exit codes.

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Exit code for clean completion.
pub const EXIT_OK: i32 = 0;
/// Exit code for any configuration, I/O or analysis error.
pub const EXIT_ERROR: i32 = 1;
/// Exit code when a simulation ends in blow-up.
pub const EXIT_BLOW_UP: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot {path}: {kind}")]
    Snapshot {
        path: String,
        kind: SnapshotErrorKind,
    },

    #[error("{0}")]
    Core(#[from] quatflow_core::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),
}

/// Distinct snapshot failure modes; each maps to a different message so a
/// truncated file is never mistaken for a checksum problem.
#[derive(Debug, Error)]
pub enum SnapshotErrorKind {
    #[error("bad magic (not a QFLD snapshot)")]
    BadMagic,

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u16, expected: u16 },

    #[error("file truncated: needed {needed} bytes, found {got}")]
    Truncated { needed: u64, got: u64 },

    #[error("payload checksum mismatch (stored {stored:#018x}, computed {computed:#018x})")]
    ChecksumMismatch { stored: u64, computed: u64 },

    #[error("invalid header: {0}")]
    BadHeader(String),

    #[error("grid mismatch: snapshot is {found}, expected {expected}")]
    DimensionMismatch { found: String, expected: String },
}
