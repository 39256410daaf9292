//! Service configuration (TOML).

use std::path::{Path, PathBuf};

use scd_core::{load_corpus, InfluenceProfile, IngestConfig, MergeConfig, ScdModel};
use serde::Deserialize;

use crate::agent::{Agent, Thresholds};
use crate::error::{AgentError, Result};
use crate::snapshot::SnapshotStore;

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    /// Model file; loaded when it exists, otherwise written after building.
    pub model: Option<PathBuf>,
    /// Corpus to build a model from when no model file is available.
    pub corpus: Option<PathBuf>,
    /// `key = value` ingestion settings for XML corpora.
    pub ingest_config: Option<PathBuf>,
    pub snapshot_dir: Option<PathBuf>,
    #[serde(default)]
    pub profile: InfluenceProfile,
    /// SCD count for building a model from the corpus.
    pub usem_k: Option<usize>,
    pub label_words: Option<usize>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

impl ServiceConfig {
    /// Reads a config file. Relative paths are taken relative to its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.model,
            &mut cfg.corpus,
            &mut cfg.ingest_config,
            &mut cfg.snapshot_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| AgentError::Config(e.to_string()))?;
        if cfg.model.is_none() && cfg.corpus.is_none() {
            return Err(AgentError::Config(
                "either model or corpus must be set".into(),
            ));
        }
        if cfg.thresholds.refresh == 0 || cfg.thresholds.fresh == 0 {
            return Err(AgentError::Config("thresholds must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn ingest(&self) -> Result<IngestConfig> {
        match &self.ingest_config {
            Some(p) => Ok(std::fs::read_to_string(p)?.parse()?),
            None => Ok(IngestConfig::default()),
        }
    }

    /// Loads the model file, or builds a model from the corpus.
    pub fn load_model(&self) -> Result<ScdModel> {
        if let Some(path) = self.model.as_ref().filter(|p| p.exists()) {
            return Ok(ScdModel::read_from(path)?);
        }
        let corpus_path = self.corpus.as_ref().ok_or_else(|| {
            AgentError::Config("model file missing and no corpus configured".into())
        })?;
        let corpus = load_corpus(corpus_path, &self.ingest()?)?;
        let k = self
            .usem_k
            .ok_or_else(|| AgentError::Config("usem_k is required to build a model".into()))?;
        let mut model = scd_core::estimate_usem(corpus, &MergeConfig::new(k), self.profile)?;
        if let Some(n) = self.label_words {
            model.set_label_words(n);
        }
        if let Some(path) = &self.model {
            model.write_to(path)?;
        }
        Ok(model)
    }

    pub fn build_agent(&self) -> Result<Agent> {
        let store = match &self.snapshot_dir {
            Some(dir) => SnapshotStore::open(dir)?,
            None => SnapshotStore::in_memory(),
        };
        Agent::new(self.load_model()?, store, self.thresholds)
    }
}
