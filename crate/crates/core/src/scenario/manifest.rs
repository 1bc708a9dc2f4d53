//! Result-directory manifest: every written file with its SHA-256.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::json::to_json_string;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_NAME: &str = "qpot";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the manifest's directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub config_sha256: String,
    pub files: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn new(scenario: &str, config_sha256: String) -> Self {
        Manifest {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            scenario: scenario.to_string(),
            config_sha256,
            files: Vec::new(),
        }
    }

    /// Hash `dir/rel` and add (or replace) its entry; entries stay sorted by path.
    pub fn record(&mut self, dir: &Path, rel: &str) -> Result<()> {
        let bytes = fs::read(dir.join(rel))?;
        let entry = ManifestEntry { path: rel.to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 };
        self.files.retain(|e| e.path != rel);
        self.files.push(entry);
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(())
    }

    pub fn get(&self, rel: &str) -> Option<&ManifestEntry> {
        self.files.iter().find(|e| e.path == rel)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join(MANIFEST_FILE), to_json_string(self)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))
            .map_err(|e| Error::Parse(format!("{}: {e}", dir.join(MANIFEST_FILE).display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{MANIFEST_FILE}: {e}")))
    }

    /// Files whose current hash differs from the recorded one (or that are missing).
    pub fn mismatches(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|e| fs::read(dir.join(&e.path)).map(|b| sha256_hex(&b) != e.sha256).unwrap_or(true))
            .map(|e| e.path.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn record_and_detect_changes() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.csv"), "1\n").unwrap();
        fs::write(dir.path().join("a.csv"), "2\n").unwrap();
        let mut m = Manifest::new("box", sha256_hex(b"cfg"));
        m.record(dir.path(), "b.csv").unwrap();
        m.record(dir.path(), "a.csv").unwrap();
        assert_eq!(m.files[0].path, "a.csv");
        m.write(dir.path()).unwrap();
        let back = Manifest::load(dir.path()).unwrap();
        assert_eq!(back, m);
        assert!(back.mismatches(dir.path()).is_empty());
        fs::write(dir.path().join("a.csv"), "3\n").unwrap();
        assert_eq!(back.mismatches(dir.path()), vec!["a.csv".to_string()]);
    }
}
