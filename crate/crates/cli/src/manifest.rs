//! Provenance record written next to every command's outputs.

use anyhow::{Context, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use tacsim_core::canonical::sha256_hex;

use crate::config::Config;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct SeedProtocol {
    pub seeds: Vec<u64>,
    pub generator: &'static str,
    /// Stream index of the engine draws for every seed.
    pub engine_stream: u64,
    /// Stream index the opponent policy is reset with.
    pub policy_stream: u64,
}

impl SeedProtocol {
    pub fn new(seeds: Vec<u64>) -> Self {
        SeedProtocol { seeds, generator: "chacha8 keyed by seed (little-endian u64)", engine_stream: 0, policy_stream: 1 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub command_line: Vec<String>,
    pub config_digest: String,
    pub config: Config,
    pub scenario_digests: BTreeMap<String, String>,
    pub plan_digests: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opponent: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_protocol: Option<SeedProtocol>,
    /// Output file (relative to the output directory) to SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
}

/// Collects output files of a run and writes the manifest last.
pub struct RunOutput {
    dir: PathBuf,
    manifest: RunManifest,
}

impl RunOutput {
    pub fn create(dir: &Path, command: &str, config: &Config) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(RunOutput {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                tool: "tacsim",
                version: env!("CARGO_PKG_VERSION"),
                command: command.to_string(),
                command_line: std::env::args().collect(),
                config_digest: config.digest(),
                config: config.clone(),
                scenario_digests: BTreeMap::new(),
                plan_digests: BTreeMap::new(),
                opponent: None,
                seed_protocol: None,
                outputs: BTreeMap::new(),
            },
        })
    }

    pub fn manifest_mut(&mut self) -> &mut RunManifest {
        &mut self.manifest
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write `bytes` to `name` under the output directory and record its digest.
    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        let bytes = bytes.as_ref();
        std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.manifest.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn finish(self) -> Result<PathBuf> {
        let path = self.dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&self.manifest)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}
