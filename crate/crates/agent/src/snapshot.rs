//! Serialized model state for every committed version.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use scd_core::ScdModel;
use serde::{Deserialize, Serialize};

use crate::error::{AgentError, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub version: u64,
    pub bytes: Vec<u8>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnapshotInfo {
    pub version: u64,
    pub timestamp: u64,
    pub digest: String,
}

#[derive(Debug, Default)]
pub struct SnapshotStore {
    entries: BTreeMap<u64, Snapshot>,
    dir: Option<PathBuf>,
}

pub fn snapshot_file_name(version: u64) -> String {
    format!("model-v{version:06}.json")
}

impl SnapshotStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Store mirrored to `dir`; snapshot files already present are loaded.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let mut entries = BTreeMap::new();
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            let Some(version) = parse_file_name(&path) else {
                continue;
            };
            let bytes = std::fs::read(&path)?;
            let model = ScdModel::from_bytes(&bytes)?;
            if model.version() != version {
                return Err(AgentError::Config(format!(
                    "{} holds version {}",
                    path.display(),
                    model.version()
                )));
            }
            let timestamp = entry_time(&path);
            entries.insert(
                version,
                Snapshot {
                    version,
                    digest: model.digest(),
                    bytes,
                    timestamp,
                },
            );
        }
        Ok(Self {
            entries,
            dir: Some(dir),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Records the model's current version. Versions must increase.
    pub fn record(&mut self, model: &ScdModel) -> Result<&Snapshot> {
        let version = model.version();
        if let Some(last) = self.latest_version() {
            if version <= last {
                return Err(AgentError::Config(format!(
                    "version {version} is not newer than snapshot {last}"
                )));
            }
        }
        let bytes = model.to_bytes();
        if let Some(dir) = &self.dir {
            std::fs::write(dir.join(snapshot_file_name(version)), &bytes)?;
        }
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let snap = Snapshot {
            version,
            bytes,
            timestamp,
            digest: model.digest(),
        };
        Ok(self.entries.entry(version).or_insert(snap))
    }

    pub fn get(&self, version: u64) -> Result<&Snapshot> {
        self.entries
            .get(&version)
            .ok_or(AgentError::UnknownVersion(version))
    }

    pub fn load(&self, version: u64) -> Result<ScdModel> {
        Ok(ScdModel::from_bytes(&self.get(version)?.bytes)?)
    }

    pub fn contains(&self, version: u64) -> bool {
        self.entries.contains_key(&version)
    }

    pub fn latest_version(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    /// Largest stored version below `version`.
    pub fn previous(&self, version: u64) -> Option<u64> {
        self.entries.range(..version).next_back().map(|(v, _)| *v)
    }

    pub fn list(&self) -> Vec<SnapshotInfo> {
        self.entries
            .values()
            .map(|s| SnapshotInfo {
                version: s.version,
                timestamp: s.timestamp,
                digest: s.digest.clone(),
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn parse_file_name(path: &Path) -> Option<u64> {
    let name = path.file_name()?.to_str()?;
    name.strip_prefix("model-v")?
        .strip_suffix(".json")?
        .parse()
        .ok()
}

fn entry_time(path: &Path) -> u64 {
    std::fs::metadata(path)
        .and_then(|m| m.modified())
        .ok()
        .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
        .map_or(0, |d| d.as_secs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use scd_core::{Corpus, InfluenceProfile};

    fn model(version: u64) -> ScdModel {
        let mut c = Corpus::new();
        c.ingest_plaintext("a b. c.", "d").unwrap();
        let mut m = scd_core::estimate_usem(
            c,
            &scd_core::MergeConfig::new(1),
            InfluenceProfile::Constant,
        )
        .unwrap();
        m.set_version(version);
        m
    }

    #[test]
    fn versions_increase() {
        let mut s = SnapshotStore::in_memory();
        s.record(&model(0)).unwrap();
        s.record(&model(2)).unwrap();
        assert!(s.record(&model(2)).is_err());
        assert_eq!(s.previous(2), Some(0));
        assert_eq!(s.load(2).unwrap().to_bytes(), model(2).to_bytes());
        assert!(matches!(s.load(1), Err(AgentError::UnknownVersion(1))));
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut s = SnapshotStore::open(dir.path()).unwrap();
            s.record(&model(0)).unwrap();
            s.record(&model(1)).unwrap();
        }
        assert!(dir.path().join("model-v000001.json").exists());
        let s = SnapshotStore::open(dir.path()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.get(1).unwrap().bytes, model(1).to_bytes());
    }
}
