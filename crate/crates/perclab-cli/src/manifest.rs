//! Run manifest: the resolved configuration plus checksums of every file
//! the run wrote. Re-running with the embedded configuration must
//! reproduce each output byte-exactly, whatever the worker count.

use crate::config::RunConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub subcommand: String,
    pub config: RunConfig,
    pub outputs: Vec<OutputRecord>,
    pub wall_seconds: f64,
    pub workers: usize,
}

/// Collects outputs, hashing as it writes.
pub struct OutputSink {
    dir: PathBuf,
    records: Vec<OutputRecord>,
}

impl OutputSink {
    pub fn new(dir: &str) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputSink {
            dir: PathBuf::from(dir),
            records: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        let mut f = std::fs::File::create(&path)?;
        f.write_all(bytes)?;
        let mut h = Sha256::new();
        h.update(bytes);
        self.records.push(OutputRecord {
            path: name.to_string(),
            sha256: hex::encode(h.finalize()),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(
        self,
        subcommand: &str,
        config: &RunConfig,
        wall_seconds: f64,
        workers: usize,
    ) -> std::io::Result<RunManifest> {
        let manifest = RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config: config.clone(),
            outputs: self.records,
            wall_seconds,
            workers,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("serializable");
        std::fs::write(self.dir.join("manifest.json"), text + "\n")?;
        Ok(manifest)
    }
}

/// Verify the checksums recorded in a manifest against files on disk.
pub fn verify_outputs(manifest: &RunManifest, dir: &Path) -> Result<(), String> {
    for rec in &manifest.outputs {
        let path = dir.join(&rec.path);
        let bytes = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut h = Sha256::new();
        h.update(&bytes);
        let got = hex::encode(h.finalize());
        if got != rec.sha256 {
            return Err(format!(
                "checksum mismatch for {}: manifest {} vs disk {got}",
                rec.path, rec.sha256
            ));
        }
    }
    Ok(())
}
