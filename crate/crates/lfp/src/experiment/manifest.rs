//! Run manifests: enough provenance to replay any experiment bit-for-bit.
//!
//! A manifest records the command, toolkit version, seeds, SHA-256 hashes of
//! every dataset the run consumed or produced, and a full echo of the
//! configuration. Re-running a suite from its manifest must reproduce
//! identical CSV outputs; the manifest itself contains no timestamps or
//! other run-varying state.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LfpError, Result};

/// Hex-encoded SHA-256 digest.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Provenance record written next to every experiment's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seeds: Vec<u64>,
    /// File name (relative to the run directory) -> SHA-256 of its bytes.
    pub dataset_hashes: BTreeMap<String, String>,
    /// Full configuration echo; replaying it reproduces the run.
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, seeds: &[u64], config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            seeds: seeds.to_vec(),
            dataset_hashes: BTreeMap::new(),
            config: serde_json::to_value(config)?,
        })
    }

    /// Records the hash of a dataset by its run-relative file name.
    pub fn record_dataset(&mut self, name: &str, bytes: &[u8]) {
        self.dataset_hashes
            .insert(name.to_string(), sha256_hex(bytes));
    }

    /// Deterministic pretty JSON (struct field order is fixed; hashes are
    /// sorted by file name).
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Writes `manifest.json` into `dir`, creating the directory if needed.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        std::fs::write(&path, self.to_json()?)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Recovers the typed configuration for a replay.
    pub fn config_as<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.config.clone()).map_err(|e| {
            LfpError::Config(format!("manifest config does not match schema: {e}"))
        })
    }
}
