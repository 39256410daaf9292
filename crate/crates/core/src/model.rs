//! The SCD-based model: corpus, SCD matrix and SCD set, versioned.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::ids::{ScdId, WindowId};
use crate::influence::{vectorize, InfluenceProfile};
use crate::matrix::ScdMatrix;
use crate::scd::{AdditionalData, FactoredRelation, Label, Preserved, RelationTarget, Scd};
use crate::sem::estimate_sem;
use crate::vector::WordVector;

pub const MODEL_FORMAT: &str = "scd-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Number of top words in surrogate labels unless configured otherwise.
pub const DEFAULT_LABEL_WORDS: usize = 3;

/// Tolerance of the row-consistency check for non-integer influence profiles.
const CONSISTENCY_TOLERANCE: f64 = 1e-9;

/// Corpus `D`, matrix `δ(D)` and SCD set `g(D)`, plus items that were shifted
/// onto individual sentences by relation-preserving updates.
#[derive(Clone, Debug, PartialEq)]
pub struct ScdModel {
    pub(crate) corpus: Corpus,
    pub(crate) matrix: ScdMatrix,
    pub(crate) scds: BTreeMap<ScdId, Scd>,
    pub(crate) sentence_items: BTreeMap<WindowId, Vec<Preserved>>,
    pub(crate) profile: InfluenceProfile,
    pub(crate) label_words: usize,
    pub(crate) version: u64,
    pub(crate) next_scd_id: u64,
}

impl ScdModel {
    /// Model over `corpus` without any SCDs.
    pub fn empty(corpus: Corpus, profile: InfluenceProfile) -> Self {
        let dim = corpus.vocabulary().len();
        Self {
            corpus,
            matrix: ScdMatrix::new(dim),
            scds: BTreeMap::new(),
            sentence_items: BTreeMap::new(),
            profile,
            label_words: DEFAULT_LABEL_WORDS,
            version: 0,
            next_scd_id: 1,
        }
    }

    /// Builds a model from a given SCD set, estimating the matrix with SEM.
    pub fn from_annotations(
        corpus: Corpus,
        annotations: Vec<Scd>,
        profile: InfluenceProfile,
    ) -> Result<Self> {
        let mut owner: BTreeMap<WindowId, ScdId> = BTreeMap::new();
        let mut scds = BTreeMap::new();
        for scd in &annotations {
            if scd.windows.is_empty() {
                return Err(Error::Config(format!("{} references no sentence", scd.id)));
            }
            for w in &scd.windows {
                if let Some(prev) = owner.insert(*w, scd.id) {
                    return Err(Error::AlreadyAssociated {
                        window: *w,
                        scd: prev,
                    });
                }
            }
            if scds.insert(scd.id, scd.clone()).is_some() {
                return Err(Error::Config(format!("duplicate SCD id {}", scd.id)));
            }
        }
        let matrix = estimate_sem(&corpus, &annotations, profile)?;
        let next_scd_id = scds.keys().last().map_or(1, |id| id.0 + 1);
        Ok(Self {
            corpus,
            matrix,
            scds,
            sentence_items: BTreeMap::new(),
            profile,
            label_words: DEFAULT_LABEL_WORDS,
            version: 0,
            next_scd_id,
        })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn matrix(&self) -> &ScdMatrix {
        &self.matrix
    }

    pub fn scds(&self) -> impl Iterator<Item = &Scd> + '_ {
        self.scds.values()
    }

    pub fn scd(&self, id: ScdId) -> Option<&Scd> {
        self.scds.get(&id)
    }

    pub fn scd_ids(&self) -> Vec<ScdId> {
        self.scds.keys().copied().collect()
    }

    pub fn scd_count(&self) -> usize {
        self.scds.len()
    }

    pub fn profile(&self) -> InfluenceProfile {
        self.profile
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn label_words(&self) -> usize {
        self.label_words
    }

    pub fn set_label_words(&mut self, n: usize) {
        self.label_words = n.max(1);
    }

    /// Items held directly by a sentence.
    pub fn sentence_items(&self, window: WindowId) -> &[Preserved] {
        self.sentence_items
            .get(&window)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn all_sentence_items(&self) -> impl Iterator<Item = (WindowId, &[Preserved])> + '_ {
        self.sentence_items.iter().map(|(w, v)| (*w, v.as_slice()))
    }

    /// The SCD referencing `window`, if any.
    pub fn association(&self, window: WindowId) -> Option<ScdId> {
        self.scds
            .values()
            .find(|s| s.windows.contains(&window))
            .map(|s| s.id)
    }

    /// Map from every associated window to its SCD.
    pub fn associations(&self) -> BTreeMap<WindowId, ScdId> {
        self.scds
            .values()
            .flat_map(|s| s.windows.iter().map(move |w| (*w, s.id)))
            .collect()
    }

    /// SCDs referencing at least one sentence of the document at `doc_index`, `g(d)`.
    pub fn scds_of_document(&self, doc_index: usize) -> Vec<ScdId> {
        let Some(doc) = self.corpus.documents().get(doc_index) else {
            return Vec::new();
        };
        let windows: BTreeSet<WindowId> = doc.sentences.iter().map(|s| s.window_id).collect();
        self.scds
            .values()
            .filter(|s| s.windows.iter().any(|w| windows.contains(w)))
            .map(|s| s.id)
            .collect()
    }

    pub fn vectorize_window(&self, window: WindowId) -> Result<WordVector> {
        let sentence = self
            .corpus
            .sentence(window)
            .ok_or(Error::UnknownSentence(window))?;
        vectorize(sentence, self.profile, self.corpus.vocabulary())
    }

    /// Fresh accumulation of the SCD's row from its current sentences.
    pub fn compute_row(&self, id: ScdId) -> Result<WordVector> {
        let scd = self.scds.get(&id).ok_or(Error::UnknownScd(id))?;
        let mut row = WordVector::zeros(self.corpus.vocabulary().len());
        for w in &scd.windows {
            let sentence = self.corpus.sentence(*w).ok_or(Error::DanglingReference {
                scd: id,
                window: *w,
            })?;
            row.add_assign(&vectorize(
                sentence,
                self.profile,
                self.corpus.vocabulary(),
            )?);
        }
        Ok(row)
    }

    /// Recomputes and stores the row of `id`.
    pub fn rebuild_row(&mut self, id: ScdId) -> Result<WordVector> {
        let row = self.compute_row(id)?;
        self.matrix.insert_row(id, row.clone());
        Ok(row)
    }

    /// Verifies every structural invariant, including that each stored row
    /// equals the sum of its sentence vectors.
    pub fn check_consistency(&self) -> Result<()> {
        let row_ids: BTreeSet<ScdId> = self.matrix.ids().collect();
        let scd_ids: BTreeSet<ScdId> = self.scds.keys().copied().collect();
        if row_ids != scd_ids {
            return Err(Error::Inconsistent(format!(
                "matrix rows {row_ids:?} differ from SCD set {scd_ids:?}"
            )));
        }
        if self.matrix.dim() != self.corpus.vocabulary().len() {
            return Err(Error::Inconsistent(format!(
                "matrix has {} columns, vocabulary {} words",
                self.matrix.dim(),
                self.corpus.vocabulary().len()
            )));
        }
        let mut seen = BTreeMap::new();
        for scd in self.scds.values() {
            if scd.windows.is_empty() {
                return Err(Error::Inconsistent(format!(
                    "{} references no sentence",
                    scd.id
                )));
            }
            if scd.id.0 >= self.next_scd_id {
                return Err(Error::Inconsistent(format!("{} beyond id counter", scd.id)));
            }
            for w in &scd.windows {
                if !self.corpus.contains(*w) {
                    return Err(Error::Inconsistent(format!(
                        "{} references missing {w}",
                        scd.id
                    )));
                }
                if let Some(other) = seen.insert(*w, scd.id) {
                    return Err(Error::Inconsistent(format!(
                        "{w} referenced by both {other} and {}",
                        scd.id
                    )));
                }
            }
            let stored = self.matrix.row(scd.id).expect("row ids checked above");
            if stored.iter().any(|(_, x)| x < 0.0) {
                return Err(Error::Inconsistent(format!(
                    "negative entry in row {}",
                    scd.id
                )));
            }
            let fresh = self.compute_row(scd.id)?;
            let exact = self.profile == InfluenceProfile::Constant;
            let ok = if exact {
                fresh.bit_eq(stored)
            } else {
                fresh.max_abs_diff(stored) <= CONSISTENCY_TOLERANCE * fresh.sum().max(1.0)
            };
            if !ok {
                return Err(Error::Inconsistent(format!(
                    "row {} differs from the sum of its sentence vectors",
                    scd.id
                )));
            }
            let factors = scd
                .data
                .relations
                .iter()
                .map(|r| r.factor)
                .chain(scd.data.label.iter().map(|l| l.factor));
            for f in factors {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(Error::Inconsistent(format!("{} holds factor {f}", scd.id)));
                }
            }
        }
        Ok(())
    }

    /// SEM accumulation for one sentence: associates an unassociated sentence
    /// with `scd` and adds its vector to the row.
    pub fn sem_add(&mut self, scd: ScdId, window: WindowId) -> Result<()> {
        if !self.scds.contains_key(&scd) {
            return Err(Error::UnknownScd(scd));
        }
        if let Some(owner) = self.association(window) {
            return Err(Error::AlreadyAssociated { window, scd: owner });
        }
        let v = self.vectorize_window(window)?;
        self.matrix
            .row_mut(scd)
            .expect("row exists for every SCD")
            .add_assign(&v);
        self.scds
            .get_mut(&scd)
            .expect("checked")
            .windows
            .insert(window);
        self.version += 1;
        Ok(())
    }

    /// Adds a document to the corpus. Its sentences start unassociated.
    pub fn ingest_document(&mut self, text: &str, doc_id: &str) -> Result<Vec<WindowId>> {
        let ids = self
            .corpus
            .ingest_plaintext(text, doc_id)?
            .sentences
            .iter()
            .map(|s| s.window_id)
            .collect();
        self.matrix.extend_dim(self.corpus.vocabulary().len());
        Ok(ids)
    }

    /// Adds a new SCD over `windows`. Windows already associated elsewhere are
    /// moved out of their previous SCD, which is removed if left empty.
    pub fn add_scd(&mut self, windows: &BTreeSet<WindowId>, data: AdditionalData) -> Result<ScdId> {
        if windows.is_empty() {
            return Err(Error::Config(
                "an SCD must reference at least one sentence".into(),
            ));
        }
        for w in windows {
            if !self.corpus.contains(*w) {
                return Err(Error::UnknownSentence(*w));
            }
        }
        for r in &data.relations {
            crate::scd::check_factor(r.factor)?;
        }
        let mut work = self.clone();
        for w in windows {
            if let Some(owner) = work.association(*w) {
                work.detach(owner, *w)?;
            }
        }
        let id = work.allocate_scd_id();
        work.scds
            .insert(id, Scd::new(id, windows.iter().copied()).with_data(data));
        work.rebuild_row(id)?;
        work.version += 1;
        *self = work;
        Ok(id)
    }

    /// Attaches a relation to an existing SCD.
    pub fn add_relation(&mut self, scd: ScdId, relation: FactoredRelation) -> Result<bool> {
        crate::scd::check_factor(relation.factor)?;
        let target = self.scds.get_mut(&scd).ok_or(Error::UnknownScd(scd))?;
        let added = target.data.add_relation(relation);
        self.version += 1;
        Ok(added)
    }

    pub fn set_label(&mut self, scd: ScdId, label: Option<Label>) -> Result<()> {
        let target = self.scds.get_mut(&scd).ok_or(Error::UnknownScd(scd))?;
        target.data.label = label;
        self.version += 1;
        Ok(())
    }

    /// Removes `window` from `scd`, decrementing the row; an emptied SCD is deleted.
    pub(crate) fn detach(&mut self, scd: ScdId, window: WindowId) -> Result<bool> {
        let v = self.vectorize_window(window)?;
        let entry = self.scds.get_mut(&scd).ok_or(Error::UnknownScd(scd))?;
        if !entry.windows.remove(&window) {
            return Err(Error::NotAssociated {
                window,
                scd: Some(scd),
            });
        }
        if entry.windows.is_empty() {
            self.scds.remove(&scd);
            self.matrix.remove_row(scd);
            self.drop_relations_to(&RelationTarget::Scd(scd));
            return Ok(true);
        }
        self.matrix
            .row_mut(scd)
            .expect("row exists for every SCD")
            .sub_assign(&v);
        Ok(false)
    }

    pub(crate) fn drop_relations_to(&mut self, target: &RelationTarget) {
        for scd in self.scds.values_mut() {
            scd.data.relations.retain(|r| &r.target != target);
        }
        for items in self.sentence_items.values_mut() {
            items.retain(|p| !matches!(p, Preserved::Relation(r) if &r.target == target));
        }
        self.sentence_items.retain(|_, items| !items.is_empty());
    }

    pub(crate) fn allocate_scd_id(&mut self) -> ScdId {
        let id = ScdId(self.next_scd_id);
        self.next_scd_id += 1;
        id
    }

    pub(crate) fn hold_on_sentence(&mut self, window: WindowId, item: Preserved) {
        let items = self.sentence_items.entry(window).or_default();
        if !items.contains(&item) {
            items.push(item);
        }
    }

    pub fn corpus_digest(&self) -> String {
        self.corpus.digest()
    }

    /// SHA-256 over the model content, excluding the version counter.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(&ModelContent::from(self)).expect("model serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Serialized model file. Equal models produce identical bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_owned(),
            format_version: MODEL_FORMAT_VERSION,
            version: self.version,
            corpus_digest: self.corpus.digest(),
            content: ModelContent::from(self),
        };
        serde_json::to_vec_pretty(&file).expect("model serializes")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let file: ModelFile = serde_json::from_slice(bytes)?;
        if file.format != MODEL_FORMAT || file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "{} v{}",
                file.format, file.format_version
            )));
        }
        let c = file.content;
        if c.corpus.digest() != file.corpus_digest {
            return Err(Error::ModelFormat("corpus digest mismatch".into()));
        }
        let mut matrix = ScdMatrix::new(c.corpus.vocabulary().len());
        for row in c.rows {
            let v = WordVector::from_pairs(matrix.dim(), row.entries)?;
            matrix.insert_row(row.scd, v);
        }
        let model = ScdModel {
            matrix,
            scds: c.scds.into_iter().map(|s| (s.id, s)).collect(),
            sentence_items: c.sentence_items,
            profile: c.profile,
            label_words: c.label_words,
            version: file.version,
            next_scd_id: c.next_scd_id,
            corpus: c.corpus,
        };
        Ok(model)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    pub(crate) fn bump_version(&mut self) {
        self.version += 1;
    }

    /// Sets the version counter; used when a restored state is committed anew.
    pub fn set_version(&mut self, version: u64) {
        self.version = version;
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ModelFile {
    format: String,
    format_version: u32,
    version: u64,
    corpus_digest: String,
    content: ModelContent,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ModelContent {
    profile: InfluenceProfile,
    label_words: usize,
    next_scd_id: u64,
    corpus: Corpus,
    scds: Vec<Scd>,
    rows: Vec<RowRecord>,
    #[serde(default)]
    sentence_items: BTreeMap<WindowId, Vec<Preserved>>,
}

#[derive(Serialize, Deserialize)]
struct RowRecord {
    scd: ScdId,
    entries: Vec<(crate::ids::WordId, f64)>,
}

impl From<&ScdModel> for ModelContent {
    fn from(m: &ScdModel) -> Self {
        ModelContent {
            profile: m.profile,
            label_words: m.label_words,
            next_scd_id: m.next_scd_id,
            corpus: m.corpus.clone(),
            scds: m.scds.values().cloned().collect(),
            rows: m
                .matrix
                .rows()
                .map(|(id, r)| RowRecord {
                    scd: id,
                    entries: r.iter().collect(),
                })
                .collect(),
            sentence_items: m.sentence_items.clone(),
        }
    }
}
