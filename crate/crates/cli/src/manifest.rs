//! Run manifest: resolved config echo, wall-clock bounds, tool version, and
//! SHA-256 digests of every emitted file. Written atomically after success.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub config: Value,
    pub seed: u64,
    pub started_utc: String,
    pub finished_utc: String,
    pub outputs: Vec<OutputDigest>,
    pub summary: Value,
}

pub struct ManifestBuilder {
    subcommand: &'static str,
    config: Value,
    seed: u64,
    started: chrono::DateTime<chrono::Utc>,
    outputs: Vec<OutputDigest>,
}

impl ManifestBuilder {
    pub fn new(subcommand: &'static str, config: Value, seed: u64) -> Self {
        Self {
            subcommand,
            config,
            seed,
            started: chrono::Utc::now(),
            outputs: Vec::new(),
        }
    }

    /// Digest a file just written under the output directory.
    pub fn add_output(&mut self, out_dir: &Path, rel: &str) -> Result<(), CliError> {
        let bytes = fs::read(out_dir.join(rel))?;
        self.outputs.push(OutputDigest {
            path: rel.to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    /// Write `manifest.json` atomically (temp file + rename).
    pub fn finish(self, out_dir: &Path, summary: Value) -> Result<(), CliError> {
        let manifest = RunManifest {
            tool: "latfkg",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            config: self.config,
            seed: self.seed,
            started_utc: self.started.to_rfc3339(),
            finished_utc: chrono::Utc::now().to_rfc3339(),
            outputs: self.outputs,
            summary,
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::invalid(format!("manifest serialization: {e}")))?;
        let tmp = out_dir.join("manifest.json.tmp");
        fs::write(&tmp, text.as_bytes())?;
        fs::rename(&tmp, out_dir.join("manifest.json"))?;
        Ok(())
    }
}
