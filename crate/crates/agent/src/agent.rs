//! The retrieval agent: one model, one counter store, versioned history.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use scd_core::refresh::{fresh_remove_sentence, refresh, RefreshReport};
use scd_core::usem::partition_windows;
use scd_core::{
    label_surrogate, AdditionalData, FactoredRelation, Label, Preserved, ScdId, ScdModel, WindowId,
    WordVector,
};
use serde::{Deserialize, Serialize};

use crate::counters::{CounterKey, CounterSnapshot, CounterStore, Counts};
use crate::error::{AgentError, Result};
use crate::feedback::{AddData, AddDataReport, FeedbackEvent, FeedbackOutcome};
use crate::ifi::{self, IfiReport, DEFAULT_THETA_FRESH, DEFAULT_THETA_REFRESH};
use crate::query::{self, IrResponse, Query, ResponseSentence};
use crate::snapshot::{SnapshotInfo, SnapshotStore};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Thresholds {
    pub refresh: u64,
    pub fresh: u64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            refresh: DEFAULT_THETA_REFRESH,
            fresh: DEFAULT_THETA_FRESH,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScdView {
    pub scd_id: ScdId,
    pub label: Option<Label>,
    pub relations: Vec<FactoredRelation>,
    pub sentences: Vec<ResponseSentence>,
    pub counts: Counts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SentenceView {
    pub window_id: WindowId,
    pub doc_id: String,
    pub position: usize,
    pub text: String,
    pub scd_id: Option<ScdId>,
    /// Labels and relations held by the sentence itself.
    pub items: Vec<Preserved>,
    pub counts: Counts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RestoreOutcome {
    pub version: u64,
    pub restored_from: u64,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VersionList {
    pub current: u64,
    pub versions: Vec<SnapshotInfo>,
}

pub struct Agent {
    model: ScdModel,
    counters: Mutex<CounterStore>,
    snapshots: SnapshotStore,
    thresholds: Thresholds,
    next_response: AtomicU64,
    updates: Vec<RefreshReport>,
    update_log: Option<PathBuf>,
}

impl Agent {
    /// Takes over `model` and records it as the first snapshot. If the store
    /// already knows a different state under that version, the model is
    /// committed as the next version instead.
    pub fn new(
        mut model: ScdModel,
        mut snapshots: SnapshotStore,
        thresholds: Thresholds,
    ) -> Result<Self> {
        let known = snapshots
            .get(model.version())
            .is_ok_and(|s| s.bytes == model.to_bytes());
        if !known {
            if let Some(last) = snapshots.latest_version() {
                if last >= model.version() {
                    model.set_version(last + 1);
                }
            }
            snapshots.record(&model)?;
        }
        let update_log = snapshots.dir().map(|d| d.join("updates.jsonl"));
        Ok(Self {
            model,
            counters: Mutex::new(CounterStore::new()),
            snapshots,
            thresholds,
            next_response: AtomicU64::new(1),
            updates: Vec::new(),
            update_log,
        })
    }

    pub fn in_memory(model: ScdModel) -> Result<Self> {
        Self::new(model, SnapshotStore::in_memory(), Thresholds::default())
    }

    pub fn model(&self) -> &ScdModel {
        &self.model
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn counters(&self) -> CounterStore {
        self.counters.lock().expect("counter lock").clone()
    }

    pub fn counter_snapshot(&self) -> CounterSnapshot {
        CounterSnapshot::from(&*self.counters.lock().expect("counter lock"))
    }

    pub fn set_counts(&self, key: CounterKey, counts: Counts) {
        self.counters.lock().expect("counter lock").set(key, counts);
    }

    pub fn reset_counters(&self) {
        self.counters.lock().expect("counter lock").clear();
    }

    pub fn snapshots(&self) -> &SnapshotStore {
        &self.snapshots
    }

    pub fn versions(&self) -> VersionList {
        VersionList {
            current: self.model.version(),
            versions: self.snapshots.list(),
        }
    }

    /// Refreshes applied so far, oldest first.
    pub fn updates(&self) -> &[RefreshReport] {
        &self.updates
    }

    /// Answers a query. Only response counters change.
    pub fn answer_query(&self, q: &Query) -> Result<IrResponse> {
        let id = self.next_response.fetch_add(1, Ordering::Relaxed);
        let mut counters = self.counters.lock().expect("counter lock");
        query::answer_query(&self.model, &mut counters, q, id)
    }

    pub fn perceive(&mut self, event: FeedbackEvent) -> Result<FeedbackOutcome> {
        let mut out = FeedbackOutcome {
            kind: event.kind().to_owned(),
            ..FeedbackOutcome::default()
        };
        match event {
            FeedbackEvent::FaultySentence { window_id } => {
                out.fresh = Some(fresh_remove_sentence(&mut self.model, window_id)?);
                self.commit()?;
            }
            FeedbackEvent::FaultyAssociation { window_id, scd_id } => {
                let report = refresh(&mut self.model, window_id, scd_id)?;
                self.commit()?;
                self.log_update(&report)?;
                out.refresh = Some(report);
            }
            FeedbackEvent::RevertChanges { version } => {
                let target = match version {
                    Some(v) => v,
                    None => self.snapshots.previous(self.model.version()).ok_or(
                        AgentError::UnknownVersion(self.model.version().saturating_sub(1)),
                    )?,
                };
                out.restored_from = Some(self.restore(target)?.restored_from);
            }
            FeedbackEvent::NewQuery => {}
            FeedbackEvent::SelectScd { scd_id } => {
                if self.model.scd(scd_id).is_none() {
                    return Err(scd_core::Error::UnknownScd(scd_id).into());
                }
                self.counters
                    .lock()
                    .expect("counter lock")
                    .select(CounterKey::Scd(scd_id));
            }
            FeedbackEvent::SelectSentence { window_id } => {
                if !self.model.corpus().contains(window_id) {
                    return Err(scd_core::Error::UnknownSentence(window_id).into());
                }
                let owner = self.model.association(window_id);
                let mut counters = self.counters.lock().expect("counter lock");
                counters.select(CounterKey::Sentence(window_id));
                if let Some(t) = owner {
                    counters.select(CounterKey::Scd(t));
                }
            }
            FeedbackEvent::AddData(add) => {
                out.added = Some(self.add_data(add)?);
            }
        }
        out.version = self.model.version();
        Ok(out)
    }

    /// Runs one IFI pass with the given or configured thresholds.
    pub fn enhance_scds(
        &mut self,
        theta_refresh: Option<u64>,
        theta_fresh: Option<u64>,
    ) -> Result<IfiReport> {
        let tr = theta_refresh.unwrap_or(self.thresholds.refresh);
        let tf = theta_fresh.unwrap_or(self.thresholds.fresh);
        if tr == 0 || tf == 0 {
            return Err(AgentError::InvalidRequest(
                "thresholds must be at least 1".into(),
            ));
        }
        let mut counters = self.counters.lock().expect("counter lock").clone();
        let snapshots = &mut self.snapshots;
        let result = ifi::enhance_scds(&mut self.model, &mut counters, tr, tf, |m| {
            snapshots.record(m).map(|_| ())
        });
        *self.counters.lock().expect("counter lock") = counters;
        let report = result?;
        for action in &report.actions {
            if let ifi::IfiAction::Refresh(r) = action {
                self.log_update(r)?;
            }
        }
        Ok(report)
    }

    /// Replaces the live model by the state of `version`, committed as a new version.
    pub fn restore(&mut self, version: u64) -> Result<RestoreOutcome> {
        let mut restored = self.snapshots.load(version)?;
        restored.set_version(self.model.version() + 1);
        self.model = restored;
        self.commit()?;
        Ok(RestoreOutcome {
            version: self.model.version(),
            restored_from: version,
            digest: self.model.digest(),
        })
    }

    /// Ingests documents, estimates SCDs for their sentences and adds manual
    /// SCDs and relations, all as one new version.
    pub fn add_data(&mut self, add: AddData) -> Result<AddDataReport> {
        if add.documents.is_empty() && add.manual_scds.is_empty() && add.relations.is_empty() {
            return Err(AgentError::InvalidRequest(
                "AddData carries nothing to add".into(),
            ));
        }
        let mut work = self.model.clone();
        let base_version = work.version();
        let (n_model, k_model) = (work.corpus().sentence_count(), work.scd_count());
        let mut report = AddDataReport::default();
        for d in &add.documents {
            report
                .windows
                .extend(work.ingest_document(&d.text, &d.doc_id)?);
            report.documents.push(d.doc_id.clone());
        }
        if !report.windows.is_empty() {
            let n_new = report.windows.len();
            let k = match add.target_k {
                Some(k) => k,
                None => default_new_k(n_new, n_model, k_model),
            };
            for group in partition_windows(&work, &report.windows, k)? {
                let mut row = WordVector::zeros(work.matrix().dim());
                for w in &group {
                    row.add_assign(&work.vectorize_window(*w)?);
                }
                let label = label_surrogate(&row, work.label_words(), work.corpus().vocabulary())?;
                let data = AdditionalData {
                    label: Some(Label::primary(label)),
                    relations: Vec::new(),
                };
                report.created_scds.push(work.add_scd(&group, data)?);
            }
        }
        for m in add.manual_scds {
            let windows: BTreeSet<WindowId> = m.windows.into_iter().collect();
            let data = AdditionalData {
                label: m.label.map(Label::primary),
                relations: m.relations,
            };
            report.created_scds.push(work.add_scd(&windows, data)?);
        }
        for r in add.relations {
            work.add_relation(r.scd, FactoredRelation::new(r.factor, r.kind, r.target)?)?;
        }
        work.set_version(base_version + 1);
        self.model = work;
        self.commit()?;
        Ok(report)
    }

    pub fn scd_view(&self, id: ScdId) -> Result<ScdView> {
        let scd = self.model.scd(id).ok_or(scd_core::Error::UnknownScd(id))?;
        let vocab = self.model.corpus().vocabulary();
        Ok(ScdView {
            scd_id: id,
            label: scd.data.label.clone(),
            relations: scd.data.relations.clone(),
            sentences: scd
                .windows
                .iter()
                .filter_map(|w| self.model.corpus().sentence(*w))
                .map(|s| ResponseSentence {
                    window_id: s.window_id,
                    doc_id: s.doc_id.clone(),
                    position: s.position,
                    text: s.text(vocab),
                })
                .collect(),
            counts: self.counters.lock().expect("counter lock").scd(id),
        })
    }

    pub fn sentence_view(&self, window: WindowId) -> Result<SentenceView> {
        let s = self
            .model
            .corpus()
            .sentence(window)
            .ok_or(scd_core::Error::UnknownSentence(window))?;
        Ok(SentenceView {
            window_id: window,
            doc_id: s.doc_id.clone(),
            position: s.position,
            text: s.text(self.model.corpus().vocabulary()),
            scd_id: self.model.association(window),
            items: self.model.sentence_items(window).to_vec(),
            counts: self.counters.lock().expect("counter lock").sentence(window),
        })
    }

    fn commit(&mut self) -> Result<()> {
        self.snapshots.record(&self.model)?;
        Ok(())
    }

    fn log_update(&mut self, report: &RefreshReport) -> Result<()> {
        let line = serde_json::to_string(report).expect("report serializes");
        tracing::info!(target: "scd_agent::updates", "{line}");
        if let Some(path) = &self.update_log {
            let mut f = std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)?;
            writeln!(f, "{line}")?;
        }
        self.updates.push(report.clone());
        Ok(())
    }
}

/// SCD count for `n_new` added sentences, keeping the model's sentences-per-SCD ratio.
pub fn default_new_k(n_new: usize, n_model: usize, k_model: usize) -> usize {
    if n_model == 0 || k_model == 0 {
        return n_new;
    }
    let k = (n_new as f64 * k_model as f64 / n_model as f64).round() as usize;
    k.clamp(1, n_new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use scd_core::{Corpus, InfluenceProfile, MergeConfig};

    fn agent() -> Agent {
        let mut c = Corpus::new();
        c.ingest_plaintext(
            "apple pear. apple plum. car bus. car train bus. apple car.",
            "d",
        )
        .unwrap();
        let m =
            scd_core::estimate_usem(c, &MergeConfig::new(2), InfluenceProfile::Constant).unwrap();
        Agent::in_memory(m).unwrap()
    }

    #[test]
    fn select_sentence_counts_scd_too() {
        let mut a = agent();
        let w = a.model().corpus().window_ids()[0];
        let t = a.model().association(w).unwrap();
        a.perceive(FeedbackEvent::SelectSentence { window_id: w })
            .unwrap();
        assert_eq!(a.counters().sentence(w), Counts { rc: 1, sc: 1 });
        assert_eq!(a.counters().scd(t), Counts { rc: 1, sc: 1 });
        let version = a.model().version();
        a.perceive(FeedbackEvent::NewQuery).unwrap();
        assert_eq!(a.model().version(), version);
    }

    #[test]
    fn revert_after_refresh() {
        let mut a = agent();
        let before = a.model().to_bytes();
        let w = a.model().corpus().window_ids()[4];
        let out = a
            .perceive(FeedbackEvent::FaultyAssociation {
                window_id: w,
                scd_id: None,
            })
            .unwrap();
        assert_eq!(out.version, 1);
        assert_eq!(a.updates().len(), 1);
        let out = a
            .perceive(FeedbackEvent::RevertChanges { version: None })
            .unwrap();
        assert_eq!((out.version, out.restored_from), (2, Some(0)));
        let mut m = a.model().clone();
        m.set_version(0);
        assert_eq!(m.to_bytes(), before);
        assert!(matches!(
            a.perceive(FeedbackEvent::RevertChanges { version: Some(9) }),
            Err(AgentError::UnknownVersion(9))
        ));
    }

    #[test]
    fn add_data_builds_scds_for_new_documents() {
        let mut a = agent();
        let k_before = a.model().scd_count();
        let report = a
            .add_data(AddData {
                documents: vec![crate::feedback::NewDocument {
                    doc_id: "n".into(),
                    text: "ship boat. ship sea boat. sky sun.".into(),
                }],
                ..AddData::default()
            })
            .unwrap();
        assert_eq!(report.windows.len(), 3);
        // 3 new sentences at 5 sentences per 2 SCDs
        assert_eq!(default_new_k(3, 5, 2), 1);
        assert_eq!(report.created_scds.len(), 1);
        assert_eq!(a.model().scd_count(), k_before + 1);
        assert_eq!(a.model().version(), 1);
        a.model().check_consistency().unwrap();
        assert_eq!(a.versions().versions.len(), 2);
    }

    #[test]
    fn unknown_targets() {
        let mut a = agent();
        assert!(matches!(
            a.perceive(FeedbackEvent::SelectScd { scd_id: ScdId(99) }),
            Err(AgentError::Core(scd_core::Error::UnknownScd(_)))
        ));
        assert!(matches!(
            a.perceive(FeedbackEvent::FaultySentence {
                window_id: WindowId(99)
            }),
            Err(AgentError::Core(scd_core::Error::UnknownSentence(_)))
        ));
    }
}
