//! Faulty, refreshed and baseline models for one target SCD count.

use scd_core::{estimate_usem, refresh, Corpus, InfluenceProfile, MergeConfig, ScdModel, WindowId};
use serde::{Deserialize, Serialize};

use crate::align::distance_vector;
use crate::error::Result;
use crate::metrics::{avg_distance, proportion_diff, EPSILON};
use crate::pairs::{choose_faulty_pairs, DEFAULT_DISSIMILARITY_CAP};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkflowConfig {
    pub k: usize,
    pub fraction: f64,
    pub seed: u64,
    pub cap: f64,
    pub profile: InfluenceProfile,
}

impl WorkflowConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            fraction: 0.125,
            seed,
            cap: DEFAULT_DISSIMILARITY_CAP,
            profile: InfluenceProfile::Constant,
        }
    }
}

/// One row of metrics.csv. `fb`, `fr` and `rb` stand for the distance
/// vectors faulty/baseline, faulty/refreshed and refreshed/baseline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub pd_fb: f64,
    pub pd_fr: f64,
    pub pd_rb: f64,
    pub avg_fb: f64,
    pub avg_fr: f64,
    pub avg_rb: f64,
}

impl MetricsRow {
    pub fn improved(&self) -> bool {
        self.avg_rb < self.avg_fb
    }
}

#[derive(Clone, Debug)]
pub struct WorkflowOutcome {
    pub pairs: Vec<(WindowId, WindowId)>,
    /// Pairs no longer sharing an SCD, or whose member had nowhere to go.
    pub skipped: Vec<(WindowId, WindowId)>,
    pub faulty: ScdModel,
    pub refreshed: ScdModel,
    pub baseline: ScdModel,
    pub h_fb: Vec<f64>,
    pub h_fr: Vec<f64>,
    pub h_rb: Vec<f64>,
    pub metrics: MetricsRow,
}

pub fn run_workflow(corpus: &Corpus, cfg: &WorkflowConfig) -> Result<WorkflowOutcome> {
    let pairs = if cfg.fraction == 0.0 {
        Vec::new()
    } else {
        choose_faulty_pairs(corpus, cfg.fraction, cfg.seed, cfg.cap)?
    };
    run_with_pairs(corpus, cfg, pairs)
}

/// The workflow with the injected pairs given; `fraction`, `seed` and `cap` are unused.
pub fn run_with_pairs(
    corpus: &Corpus,
    cfg: &WorkflowConfig,
    pairs: Vec<(WindowId, WindowId)>,
) -> Result<WorkflowOutcome> {
    let faulty = estimate_usem(
        corpus.clone(),
        &MergeConfig::new(cfg.k).with_faulty_pairs(pairs.clone()),
        cfg.profile,
    )?;

    let mut refreshed = faulty.clone();
    let mut skipped = Vec::new();
    for &(a, b) in &pairs {
        let shared = refreshed
            .association(a)
            .filter(|t| refreshed.association(b) == Some(*t));
        let Some(t) = shared else {
            tracing::info!(%a, %b, "pair no longer shares an SCD");
            skipped.push((a, b));
            continue;
        };
        match refresh(&mut refreshed, b, Some(t)) {
            Ok(_) => {}
            Err(scd_core::Error::NoReceivingScd(_)) => {
                tracing::info!(%a, %b, "no SCD can receive the sentence");
                skipped.push((a, b));
            }
            Err(e) => return Err(e.into()),
        }
    }

    let baseline = estimate_usem(corpus.clone(), &MergeConfig::new(cfg.k), cfg.profile)?;
    let h_fb = distance_vector(&faulty, &baseline)?;
    let h_fr = distance_vector(&faulty, &refreshed)?;
    let h_rb = distance_vector(&refreshed, &baseline)?;
    let metrics = MetricsRow {
        k: cfg.k,
        pd_fb: proportion_diff(&h_fb, EPSILON),
        pd_fr: proportion_diff(&h_fr, EPSILON),
        pd_rb: proportion_diff(&h_rb, EPSILON),
        avg_fb: avg_distance(&h_fb, EPSILON),
        avg_fr: avg_distance(&h_fr, EPSILON),
        avg_rb: avg_distance(&h_rb, EPSILON),
    };
    Ok(WorkflowOutcome {
        pairs,
        skipped,
        faulty,
        refreshed,
        baseline,
        h_fb,
        h_fr,
        h_rb,
        metrics,
    })
}
