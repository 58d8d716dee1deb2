//! Run manifest: one JSON document written exactly once, last, after every
//! other output of a run exists. Lists every emitted file so nothing is
//! orphaned.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the resolved configuration text.
    pub config_digest: String,
    pub artifact_version: String,
    pub started_at: String,
    pub finished_at: String,
    /// "completed", "blow_up" or "error".
    pub outcome: String,
    /// Paths of every emitted file, relative to the output directory.
    pub files: Vec<String>,
}

/// SHA-256 hex digest of a text blob.
pub fn digest_text(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(64);
    for b in hash {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

impl RunManifest {
    pub fn write(&self, output_dir: &Path) -> CliResult<()> {
        let path = output_dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }
}
