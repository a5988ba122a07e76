use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Convergence summary of one solve inside a run.
#[derive(Debug, Clone, Serialize)]
pub struct SubRun {
    pub label: String,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one CLI invocation, written next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub started: String,
    pub finished: Option<String>,
    pub config: serde_json::Value,
    pub runs: Vec<SubRun>,
    pub outputs: Vec<OutputFile>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn start(config: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().collect(),
            started: now(),
            finished: None,
            config,
            runs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path) -> std::io::Result<()> {
        let bytes = std::fs::read(path)?;
        self.outputs.push(OutputFile { path: path.to_path_buf(), bytes: bytes.len() as u64, sha256: sha256_hex(&bytes) });
        Ok(())
    }

    /// Stamps the finish time and writes the manifest as pretty JSON.
    pub fn finish(mut self, path: &Path) -> std::io::Result<()> {
        self.finished = Some(now());
        let mut text = serde_json::to_string_pretty(&self).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(path, text)
    }
}

/// `out.json` -> `out.json.manifest.json`
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
