//! Provenance manifests: what ran, with which settings, and what it wrote.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Command;
use crate::engine::Backend;
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

impl OutputDigest {
    pub fn of(file: &str, contents: &[u8]) -> Self {
        OutputDigest {
            file: file.to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
            bytes: contents.len() as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub command: Command,
    /// Effective configuration, including command-line overrides.
    pub config: String,
    pub backends: Vec<Backend>,
    /// Largest Bloch-component difference when two backends ran.
    pub backend_discrepancy: Option<f64>,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(command: Command, config: String, backends: Vec<Backend>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            command,
            config,
            backends,
            backend_discrepancy: None,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn digest(&self, file: &str) -> Option<&OutputDigest> {
        self.outputs.iter().find(|o| o.file == file)
    }

    /// Files whose digests differ from `other`, or that only one run wrote.
    pub fn mismatches(&self, other: &RunManifest) -> Vec<String> {
        let mut out: Vec<String> = self
            .outputs
            .iter()
            .filter(|o| other.digest(&o.file).is_none_or(|p| p.sha256 != o.sha256))
            .map(|o| o.file.clone())
            .collect();
        out.extend(
            other
                .outputs
                .iter()
                .filter(|o| self.digest(&o.file).is_none())
                .map(|o| o.file.clone()),
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_bytes() {
        let d = OutputDigest::of("x.csv", b"abc");
        assert_eq!(d.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(d.bytes, 3);
    }

    #[test]
    fn mismatches_are_symmetric_in_coverage() {
        let mut a = RunManifest::new(Command::Simulate, String::new(), vec![]);
        let mut b = a.clone();
        a.outputs = vec![OutputDigest::of("a", b"1"), OutputDigest::of("b", b"2")];
        b.outputs = vec![OutputDigest::of("a", b"1"), OutputDigest::of("c", b"3")];
        assert_eq!(a.mismatches(&b), vec!["b".to_string(), "c".to_string()]);
        assert!(a.mismatches(&a).is_empty());
    }
}
