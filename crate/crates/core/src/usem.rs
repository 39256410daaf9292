//! Unsupervised SCD estimation by greedy merging of per-sentence SCDs.
//!
//! Every sentence starts as its own SCD. Optionally, configured window pairs
//! are merged first (used to plant faulty associations). Then the two most
//! cosine-similar SCDs are merged repeatedly until the target count remains.
//! Ties are broken by the lexicographically smallest `(smaller id, larger id)`
//! pair, and the merged SCD keeps the smaller id.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Vocabulary};
use crate::error::{Error, Result};
use crate::ids::{ScdId, WindowId};
use crate::influence::InfluenceProfile;
use crate::model::ScdModel;
use crate::scd::{Label, RelationTarget, Scd};
use crate::vector::{cosine_with_norms, WordVector};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MergeConfig {
    /// Number of SCDs at which merging stops.
    pub target_scd_count: usize,
    /// Window pairs merged into one SCD right after initialization.
    #[serde(default)]
    pub faulty_pairs: Vec<(WindowId, WindowId)>,
}

impl MergeConfig {
    pub fn new(target_scd_count: usize) -> Self {
        Self {
            target_scd_count,
            faulty_pairs: Vec::new(),
        }
    }

    pub fn with_faulty_pairs(mut self, pairs: Vec<(WindowId, WindowId)>) -> Self {
        self.faulty_pairs = pairs;
        self
    }

    fn validate(&self, corpus: &Corpus) -> Result<()> {
        let n = corpus.sentence_count();
        if n == 0 {
            return Err(Error::Config("corpus has no sentences".into()));
        }
        if self.target_scd_count == 0 {
            return Err(Error::Config("target SCD count must be at least 1".into()));
        }
        if self.target_scd_count > n {
            return Err(Error::Config(format!(
                "target SCD count {} exceeds sentence count {n}",
                self.target_scd_count
            )));
        }
        let mut seen = BTreeSet::new();
        for (a, b) in &self.faulty_pairs {
            for w in [a, b] {
                if !corpus.contains(*w) {
                    return Err(Error::UnknownSentence(*w));
                }
                if !seen.insert(*w) {
                    return Err(Error::Config(format!("{w} appears in more than one pair")));
                }
            }
        }
        if n - self.faulty_pairs.len() < self.target_scd_count {
            return Err(Error::Config(format!(
                "{} forced merges leave fewer than {} SCDs",
                self.faulty_pairs.len(),
                self.target_scd_count
            )));
        }
        Ok(())
    }
}

/// One merge performed by the estimator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub kept: ScdId,
    pub absorbed: ScdId,
    pub similarity: f64,
    /// Whether the merge was forced by a configured pair.
    pub forced: bool,
}

#[derive(Clone, Debug)]
pub struct UsemOutcome {
    pub model: ScdModel,
    pub trace: Vec<MergeStep>,
}

pub fn estimate_usem(
    corpus: Corpus,
    config: &MergeConfig,
    profile: InfluenceProfile,
) -> Result<ScdModel> {
    estimate_usem_traced(corpus, config, profile).map(|o| o.model)
}

/// Like [`estimate_usem`], also returning the sequence of merges.
pub fn estimate_usem_traced(
    corpus: Corpus,
    config: &MergeConfig,
    profile: InfluenceProfile,
) -> Result<UsemOutcome> {
    config.validate(&corpus)?;
    let mut model = ScdModel::empty(corpus, profile);
    let mut seeds = Vec::with_capacity(model.corpus.sentence_count());
    let mut scd_of = BTreeMap::new();
    for w in model.corpus.window_ids() {
        let id = model.allocate_scd_id();
        scd_of.insert(w, id);
        seeds.push(Seed {
            id,
            windows: [w].into(),
            row: model.vectorize_window(w)?,
        });
    }
    let forced: Vec<(ScdId, ScdId)> = config
        .faulty_pairs
        .iter()
        .map(|(a, b)| (scd_of[a], scd_of[b]))
        .collect();
    let (clusters, trace) = greedy_merge(seeds, &forced, config.target_scd_count);
    for c in clusters {
        let label = label_surrogate(&c.row, model.label_words, model.corpus.vocabulary())?;
        let mut scd = Scd::new(c.id, c.windows);
        scd.data.label = Some(Label::primary(label));
        model.scds.insert(c.id, scd);
        model.matrix.insert_row(c.id, c.row);
    }
    Ok(UsemOutcome { model, trace })
}

/// Starting cluster for the greedy procedure.
#[derive(Clone, Debug)]
pub(crate) struct Seed {
    pub id: ScdId,
    pub windows: BTreeSet<WindowId>,
    pub row: WordVector,
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    sim: f64,
    lo: usize,
    hi: usize,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        self.sim > other.sim || (self.sim == other.sim && (self.lo, self.hi) < (other.lo, other.hi))
    }
}

struct Greedy {
    seeds: Vec<Option<Seed>>,
    norms: Vec<f64>,
    sims: Vec<f64>,
    best: Vec<Option<Candidate>>,
    n: usize,
}

impl Greedy {
    fn new(mut seeds: Vec<Seed>) -> Self {
        seeds.sort_by_key(|s| s.id);
        let n = seeds.len();
        let norms: Vec<f64> = seeds.iter().map(|s| s.row.norm()).collect();
        let mut sims = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let s = cosine_with_norms(&seeds[i].row, norms[i], &seeds[j].row, norms[j]);
                sims[i * n + j] = s;
                sims[j * n + i] = s;
            }
        }
        let mut g = Greedy {
            seeds: seeds.into_iter().map(Some).collect(),
            norms,
            sims,
            best: vec![None; n],
            n,
        };
        for i in 0..n {
            g.recompute_best(i);
        }
        g
    }

    fn alive(&self) -> usize {
        self.seeds.iter().filter(|s| s.is_some()).count()
    }

    fn pair(&self, i: usize, j: usize) -> Candidate {
        Candidate {
            sim: self.sims[i * self.n + j],
            lo: i.min(j),
            hi: i.max(j),
        }
    }

    fn recompute_best(&mut self, i: usize) {
        let mut best: Option<Candidate> = None;
        for j in 0..self.n {
            if j == i || self.seeds[j].is_none() {
                continue;
            }
            let c = self.pair(i, j);
            if best.is_none_or(|b| c.beats(&b)) {
                best = Some(c);
            }
        }
        self.best[i] = best;
    }

    fn global_best(&self) -> Option<Candidate> {
        let mut best: Option<Candidate> = None;
        for (i, c) in self.best.iter().enumerate() {
            if self.seeds[i].is_none() {
                continue;
            }
            if let Some(c) = c {
                if best.is_none_or(|b| c.beats(&b)) {
                    best = Some(*c);
                }
            }
        }
        best
    }

    /// Merges `hi` into `lo` and refreshes the cached similarities.
    fn merge(&mut self, lo: usize, hi: usize, forced: bool) -> MergeStep {
        let similarity = self.sims[lo * self.n + hi];
        let absorbed = self.seeds[hi].take().expect("merge of a dead cluster");
        self.best[hi] = None;
        let kept = self.seeds[lo].as_mut().expect("merge into a dead cluster");
        kept.row.add_assign(&absorbed.row);
        kept.windows.extend(absorbed.windows);
        let (kept_id, kept_row) = (kept.id, kept.row.clone());
        self.norms[lo] = kept_row.norm();
        for k in 0..self.n {
            if k == lo {
                continue;
            }
            let Some(other) = &self.seeds[k] else {
                continue;
            };
            let s = cosine_with_norms(&kept_row, self.norms[lo], &other.row, self.norms[k]);
            self.sims[lo * self.n + k] = s;
            self.sims[k * self.n + lo] = s;
        }
        for k in 0..self.n {
            if k == lo || self.seeds[k].is_none() {
                continue;
            }
            match self.best[k] {
                Some(c) if c.lo == lo || c.hi == lo || c.lo == hi || c.hi == hi => {
                    self.recompute_best(k)
                }
                Some(c) => {
                    let candidate = self.pair(k, lo);
                    if candidate.beats(&c) {
                        self.best[k] = Some(candidate);
                    }
                }
                None => self.recompute_best(k),
            }
        }
        self.recompute_best(lo);
        MergeStep {
            kept: kept_id,
            absorbed: absorbed.id,
            similarity,
            forced,
        }
    }
}

/// Runs forced merges and then greedy merging down to `target` clusters.
pub(crate) fn greedy_merge(
    seeds: Vec<Seed>,
    forced: &[(ScdId, ScdId)],
    target: usize,
) -> (Vec<Seed>, Vec<MergeStep>) {
    let mut g = Greedy::new(seeds);
    let index: BTreeMap<ScdId, usize> = g
        .seeds
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.as_ref().map(|s| (s.id, i)))
        .collect();
    let mut trace = Vec::new();
    for (a, b) in forced {
        let (i, j) = (index[a], index[b]);
        trace.push(g.merge(i.min(j), i.max(j), true));
    }
    let mut alive = g.alive();
    while alive > target.max(1) {
        let Some(c) = g.global_best() else { break };
        trace.push(g.merge(c.lo, c.hi, false));
        alive -= 1;
    }
    (g.seeds.into_iter().flatten().collect(), trace)
}

/// Merges SCDs `a` and `b`. The smaller id survives with the union of
/// sentences, the summed row, a recomputed label and the union of relations.
/// Relations elsewhere that pointed at the absorbed SCD now point at the survivor.
pub fn merge_scds(model: &mut ScdModel, a: ScdId, b: ScdId) -> Result<ScdId> {
    if a == b {
        return Err(Error::Config(format!("cannot merge {a} with itself")));
    }
    for id in [a, b] {
        if !model.scds.contains_key(&id) {
            return Err(Error::UnknownScd(id));
        }
    }
    let (keep, drop) = (a.min(b), a.max(b));
    let absorbed = model.scds.remove(&drop).expect("checked");
    let absorbed_row = model
        .matrix
        .remove_row(drop)
        .expect("row exists for every SCD");
    let row = {
        let r = model
            .matrix
            .row_mut(keep)
            .expect("row exists for every SCD");
        r.add_assign(&absorbed_row);
        r.clone()
    };
    let label = label_surrogate(&row, model.label_words, model.corpus.vocabulary())?;
    let survivor = model.scds.get_mut(&keep).expect("checked");
    survivor.windows.extend(absorbed.windows);
    for r in absorbed.data.relations {
        survivor.data.add_relation(r);
    }
    survivor.data.label = Some(Label::primary(label));
    let from = RelationTarget::Scd(drop);
    let to = [RelationTarget::Scd(keep)];
    for scd in model.scds.values_mut() {
        scd.data.retarget(&from, &to);
    }
    for items in model.sentence_items.values_mut() {
        *items = items.iter().flat_map(|p| p.retarget(&from, &to)).collect();
    }
    model.bump_version();
    Ok(keep)
}

/// Stand-in label: the `n` highest-weighted words of a row, descending,
/// ties in vocabulary order, joined by spaces.
pub fn label_surrogate(row: &WordVector, n: usize, vocab: &Vocabulary) -> Result<String> {
    if n == 0 {
        return Err(Error::Config("label needs at least one word".into()));
    }
    if !row.iter().any(|(_, x)| x > 0.0) {
        return Err(Error::DegenerateRow("label source".into()));
    }
    let mut entries: Vec<_> = row.iter().filter(|(_, x)| *x > 0.0).collect();
    entries.sort_by(|(wa, xa), (wb, xb)| xb.total_cmp(xa).then(wa.cmp(wb)));
    let words: Vec<&str> = entries
        .iter()
        .take(n)
        .map(|(w, _)| {
            vocab
                .word(*w)
                .ok_or_else(|| Error::UnknownWord(w.to_string()))
        })
        .collect::<Result<_>>()?;
    Ok(words.join(" "))
}

/// Partitions `windows` of `model` with the greedy procedure, returning the
/// window groups (used to estimate SCDs for newly added material).
pub fn partition_windows(
    model: &ScdModel,
    windows: &[WindowId],
    target: usize,
) -> Result<Vec<BTreeSet<WindowId>>> {
    if target == 0 || target > windows.len() {
        return Err(Error::Config(format!(
            "target {target} not in 1..={}",
            windows.len()
        )));
    }
    let seeds = windows
        .iter()
        .enumerate()
        .map(|(i, w)| {
            Ok(Seed {
                id: ScdId(i as u64),
                windows: [*w].into(),
                row: model.vectorize_window(*w)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (clusters, _) = greedy_merge(seeds, &[], target);
    Ok(clusters.into_iter().map(|c| c.windows).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::WordId;

    fn corpus(sentences: &[&str]) -> Corpus {
        let mut c = Corpus::new();
        c.ingest_plaintext(&sentences.join(" "), "d").unwrap();
        c
    }

    #[test]
    fn identical_sentences_merge() {
        let c = corpus(&["a b.", "a b."]);
        let m = estimate_usem(c, &MergeConfig::new(1), InfluenceProfile::Constant).unwrap();
        assert_eq!(m.scd_count(), 1);
        let scd = m.scds().next().unwrap();
        assert_eq!(scd.len(), 2);
        assert_eq!(m.matrix().row(scd.id).unwrap().to_dense(), vec![2.0, 2.0]);
        m.check_consistency().unwrap();
    }

    #[test]
    fn identity_run_keeps_singletons() {
        let c = corpus(&["a b.", "c d.", "a c."]);
        let m = estimate_usem(c, &MergeConfig::new(3), InfluenceProfile::Constant).unwrap();
        assert_eq!(m.scd_count(), 3);
        assert!(m.scds().all(|s| s.len() == 1));
    }

    #[test]
    fn config_errors() {
        let c = corpus(&["a.", "b."]);
        assert!(matches!(
            estimate_usem(c.clone(), &MergeConfig::new(3), InfluenceProfile::Constant),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            estimate_usem(c.clone(), &MergeConfig::new(0), InfluenceProfile::Constant),
            Err(Error::Config(_))
        ));
        let ids = c.window_ids();
        let overlapping =
            MergeConfig::new(1).with_faulty_pairs(vec![(ids[0], ids[1]), (ids[1], ids[0])]);
        assert!(matches!(
            estimate_usem(c, &overlapping, InfluenceProfile::Constant),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn faulty_pair_shares_scd() {
        let c = corpus(&["a b.", "x y.", "a b c.", "x y z."]);
        let ids = c.window_ids();
        let cfg = MergeConfig::new(2).with_faulty_pairs(vec![(ids[0], ids[1])]);
        let out = estimate_usem_traced(c, &cfg, InfluenceProfile::Constant).unwrap();
        let m = out.model;
        assert_eq!(m.association(ids[0]), m.association(ids[1]));
        assert!(out.trace[0].forced);
        assert_eq!(out.trace[0].similarity, 0.0);
        m.check_consistency().unwrap();
    }

    #[test]
    fn merge_is_order_independent() {
        let c = corpus(&["a b.", "b c.", "d."]);
        let base = estimate_usem(c, &MergeConfig::new(3), InfluenceProfile::Constant).unwrap();
        let ids = base.scd_ids();
        let mut m1 = base.clone();
        let mut m2 = base.clone();
        assert_eq!(merge_scds(&mut m1, ids[0], ids[1]).unwrap(), ids[0]);
        assert_eq!(merge_scds(&mut m2, ids[1], ids[0]).unwrap(), ids[0]);
        assert_eq!(m1, m2);
        let row = m1.matrix().row(ids[0]).unwrap().clone();
        assert!(m1.rebuild_row(ids[0]).unwrap().bit_eq(&row));
        assert_eq!(row.to_dense(), vec![1.0, 2.0, 1.0, 0.0]);
        m1.check_consistency().unwrap();
    }

    #[test]
    fn merge_errors() {
        let c = corpus(&["a.", "b."]);
        let mut m = estimate_usem(c, &MergeConfig::new(2), InfluenceProfile::Constant).unwrap();
        assert!(matches!(
            merge_scds(&mut m, ScdId(1), ScdId(9)),
            Err(Error::UnknownScd(ScdId(9)))
        ));
        assert!(merge_scds(&mut m, ScdId(1), ScdId(1)).is_err());
    }

    #[test]
    fn surrogate_labels() {
        let vocab = Vocabulary::from(vec!["a".to_owned(), "b".to_owned(), "c".to_owned()]);
        let row = WordVector::from_pairs(3, [(WordId(0), 2.0), (WordId(1), 1.0)]).unwrap();
        assert_eq!(label_surrogate(&row, 1, &vocab).unwrap(), "a");
        let tie = WordVector::from_pairs(3, [(WordId(1), 1.0), (WordId(0), 1.0)]).unwrap();
        assert_eq!(label_surrogate(&tie, 2, &vocab).unwrap(), "a b");
        assert_eq!(label_surrogate(&tie, 5, &vocab).unwrap(), "a b");
        assert!(matches!(
            label_surrogate(&WordVector::zeros(3), 1, &vocab),
            Err(Error::DegenerateRow(_))
        ));
    }
}
