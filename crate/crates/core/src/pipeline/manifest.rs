//! Run manifest: per-stage status with content digests of every file
//! consumed or produced, so reruns can prove cache validity.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ran,
    /// Inputs and outputs matched the previous run; nothing executed.
    Cached,
    /// Output was supplied externally; the stage did not execute.
    Provided,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    /// Logical input name → sha256 hex digest.
    pub inputs: BTreeMap<String, String>,
    /// Output path (relative to the run directory) → sha256 hex digest.
    pub outputs: BTreeMap<String, String>,
    pub wall_ms: u128,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    pub config_digest: String,
    /// Stages in execution order.
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn new(seed: u64, config_digest: String) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_digest,
            stages: Vec::new(),
        }
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Option<Self> {
        let text = std::fs::read_to_string(path).ok()?;
        serde_json::from_str(&text).ok()
    }
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    hex(&h.finalize())
}

pub fn digest_file(path: &Path) -> Result<String, PipelineError> {
    let bytes = std::fs::read(path)
        .map_err(|e| PipelineError::Io(std::io::Error::new(e.kind(), format!("{path:?}: {e}"))))?;
    Ok(digest_bytes(&bytes))
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(2 * bytes.len());
    for b in bytes {
        use std::fmt::Write;
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// True when every recorded output file still exists with an unchanged
/// digest.
pub fn outputs_intact(record: &StageRecord, root: &Path) -> bool {
    !record.outputs.is_empty()
        && record.outputs.iter().all(|(rel, want)| {
            digest_file(&root.join(rel)).map(|got| got == *want).unwrap_or(false)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_hex() {
        let d = digest_bytes(b"abc");
        assert_eq!(
            d,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new(7, "cfg".into());
        m.stages.push(StageRecord {
            name: "md".into(),
            status: StageStatus::Ran,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::from([("md/cycles.csv".to_string(), "00".to_string())]),
            wall_ms: 12,
        });
        let path = dir.path().join("manifest.json");
        m.save(&path).unwrap();
        let back = RunManifest::load(&path).unwrap();
        assert_eq!(back.seed, 7);
        assert_eq!(back.stage("md").unwrap().outputs.len(), 1);
        assert!(back.stage("fit").is_none());
    }

    #[test]
    fn outputs_intact_checks_content() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("a.txt");
        std::fs::write(&f, "hello").unwrap();
        let rec = StageRecord {
            name: "x".into(),
            status: StageStatus::Ran,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::from([("a.txt".to_string(), digest_file(&f).unwrap())]),
            wall_ms: 0,
        };
        assert!(outputs_intact(&rec, dir.path()));
        std::fs::write(&f, "tampered").unwrap();
        assert!(!outputs_intact(&rec, dir.path()));
    }
}
