//! Deterministic run manifests: every artifact a run writes, with a content
//! digest, so identical configs can be checked for byte-identical outputs.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config: RunConfig,
    pub toolkit_version: String,
    pub duration_seconds: f64,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, json + "\n")?;
        Ok(path)
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

/// Writes artifacts into a run directory and records their digests.
pub struct ArtifactWriter {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.artifacts.push(Artifact { path: name.to_string(), sha256: sha256_hex(contents.as_bytes()) });
        Ok(())
    }

    /// Record a file some other component already wrote into the run
    /// directory.
    pub fn record(&mut self, name: &str) -> io::Result<()> {
        let bytes = fs::read(self.dir.join(name))?;
        self.artifacts.push(Artifact { path: name.to_string(), sha256: sha256_hex(&bytes) });
        Ok(())
    }

    pub fn into_artifacts(self) -> Vec<Artifact> {
        self.artifacts
    }
}

/// Fixed 17-significant-digit formatting for every numeric CSV field, so
/// outputs are byte-stable and round-trip exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
