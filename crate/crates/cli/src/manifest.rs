//! Run manifest: every invocation records its command line, resolved
//! configuration, constants version, produced files and wall-clock time.

use anyhow::Result;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub profile: String,
    pub format: String,
    pub seed: u64,
    pub constants_version: &'static str,
    pub outputs: Vec<String>,
    pub wall_clock_ms: u128,
}

pub struct ManifestBuilder {
    start: Instant,
    command: Vec<String>,
    profile: String,
    format: String,
    seed: u64,
    outputs: Vec<PathBuf>,
}

impl ManifestBuilder {
    pub fn new(command: Vec<String>, profile: String, format: String, seed: u64) -> Self {
        Self {
            start: Instant::now(),
            command,
            profile,
            format,
            seed,
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Write `run_manifest.json` into `out_dir` and return its path.
    pub fn write(self, out_dir: &Path) -> Result<PathBuf> {
        let manifest = RunManifest {
            command: self.command,
            profile: self.profile,
            format: self.format,
            seed: self.seed,
            constants_version: kramers::constants::CONSTANTS_VERSION,
            outputs: self
                .outputs
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            wall_clock_ms: self.start.elapsed().as_millis(),
        };
        let path = out_dir.join("run_manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}
