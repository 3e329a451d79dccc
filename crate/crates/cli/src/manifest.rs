//! Run manifests: every output directory gets exactly one manifest holding
//! the resolved configuration, the seed, input digests, and the list of
//! primary output files — enough to re-run the experiment bit-identically.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    /// Base seed for randomized subcommands; absent for deterministic ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Full resolved configuration of the run.
    pub config: serde_json::Value,
    /// sha256 of every input file, keyed by the path as given.
    pub input_digests: BTreeMap<String, String>,
    pub timestamp: String,
    /// Primary output files, relative to the output directory.
    pub primary_outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        seed: Option<u64>,
        config: serde_json::Value,
        input_digests: BTreeMap<String, String>,
        primary_outputs: Vec<String>,
    ) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            input_digests,
            timestamp: chrono::Utc::now().to_rfc3339(),
            primary_outputs,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("malformed manifest {}: {e}", path.display())))
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(format!("sha256:{}", hex::encode(Sha256::digest(&bytes))))
}

/// Create the output directory, write every named file, then the manifest.
pub fn write_outputs(
    out_dir: &Path,
    files: &[(&str, String)],
    manifest: &RunManifest,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", out_dir.display())))?;
    for (name, content) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    let manifest_json = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Input(format!("manifest serialization: {e}")))?;
    std::fs::write(out_dir.join(MANIFEST_FILE), manifest_json + "\n")
        .map_err(|e| CliError::Input(format!("cannot write manifest: {e}")))?;
    Ok(())
}

pub fn to_json_value<T: Serialize>(value: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(value).map_err(|e| CliError::Input(format!("config serialization: {e}")))
}

pub fn pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Input(format!("serialization: {e}")))
}

/// Draw an entropy seed when the flag is absent; the caller records it in
/// the manifest either way.
pub fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.unwrap_or_else(|| {
        use std::time::{SystemTime, UNIX_EPOCH};
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .unwrap_or_default();
        now.as_nanos() as u64 ^ std::process::id() as u64
    })
}

