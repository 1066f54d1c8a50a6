//! `manifest.json`: what a command did and which files it wrote.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GridInfo {
    pub m: usize,
    pub dx: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TimestepInfo {
    pub cfl: f64,
    pub max_dt: f64,
    pub diffusion_number: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub grid: Option<GridInfo>,
    pub timestep: Option<TimestepInfo>,
    /// Paths relative to the output directory, including the manifest itself.
    pub files: Vec<String>,
    pub wall_clock_seconds: f64,
    pub exit_status: i32,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    #[serde(skip)]
    out_dir: PathBuf,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn new(command: &str, out_dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: BTreeMap::new(),
            seed: None,
            grid: None,
            timestep: None,
            files: Vec::new(),
            wall_clock_seconds: 0.0,
            exit_status: 0,
            warnings: Vec::new(),
            error: None,
            out_dir: out_dir.to_path_buf(),
            started: Some(Instant::now()),
        }
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Absolute path for `relative`, recorded in the file list.
    pub fn file(&mut self, relative: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == relative) {
            self.files.push(relative.to_string());
        }
        self.out_dir.join(relative)
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        if !self.warnings.contains(&message) {
            self.warnings.push(message);
        }
    }

    /// Stamps the wall clock and writes `manifest.json`.
    pub fn write(&mut self) -> io::Result<PathBuf> {
        if let Some(t0) = self.started {
            self.wall_clock_seconds = t0.elapsed().as_secs_f64();
        }
        let path = self.file(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        std::fs::write(&path, json + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_itself_and_every_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("simulate", dir.path());
        let a = m.file("a.csv");
        std::fs::write(&a, "x\n").unwrap();
        m.file("a.csv");
        m.warn("closure drift");
        m.warn("closure drift");
        m.write().unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap())
                .unwrap();
        assert_eq!(v["files"], serde_json::json!(["a.csv", "manifest.json"]));
        assert_eq!(v["warnings"].as_array().unwrap().len(), 1);
        assert_eq!(v["exit_status"], 0);
    }
}
