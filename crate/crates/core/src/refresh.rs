//! Removing sentences (FrESH) and relation-preserving repair of an SCD
//! that holds a misassociated sentence (ReFrESH).
//!
//! A refresh runs four steps on a working copy of the model and swaps it in
//! only when all of them succeed:
//!
//! 1. [`shift_relations`] moves the SCD's label and relations onto its sentences.
//! 2. [`disassemble`] deletes the SCD and its row.
//! 3. [`reassign`] places every former sentence in an existing or new SCD.
//! 4. [`propagate`] merges the shifted items into the receiving SCDs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{ScdId, WindowId};
use crate::model::ScdModel;
use crate::scd::{Label, Preserved, RelationTarget, Scd};
use crate::usem::label_surrogate;
use crate::vector::{cosine_similarity, WordVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FreshReport {
    pub version: u64,
    pub window: WindowId,
    /// SCD the sentence was removed from.
    pub scd: Option<ScdId>,
    /// Whether that SCD became empty and was deleted.
    pub scd_removed: bool,
}

/// Removes a sentence from the corpus and subtracts its vector from the row
/// of its SCD. Relations pointing at the sentence, and items it held, go with it.
pub fn fresh_remove_sentence(model: &mut ScdModel, window: WindowId) -> Result<FreshReport> {
    if !model.corpus.contains(window) {
        return Err(Error::UnknownSentence(window));
    }
    let mut work = model.clone();
    let scd = work.association(window);
    let scd_removed = match scd {
        Some(id) => work.detach(id, window)?,
        None => false,
    };
    work.drop_relations_to(&RelationTarget::Window(window));
    work.sentence_items.remove(&window);
    work.corpus.remove_sentence(window)?;
    work.bump_version();
    *model = work;
    Ok(FreshReport {
        version: model.version,
        window,
        scd,
        scd_removed,
    })
}

/// Step 1. Every correct sentence of `t` receives the label with its factor
/// and every relation with factor `(S-1)/S`. `removed` receives only the
/// relations, with factor `1/S`. `S` is the sentence count of `t`.
pub fn shift_relations(model: &mut ScdModel, t: ScdId, removed: WindowId) -> Result<()> {
    let scd = model.scds.get(&t).ok_or(Error::UnknownScd(t))?.clone();
    if !scd.windows.contains(&removed) {
        return Err(Error::NotAssociated {
            window: removed,
            scd: Some(t),
        });
    }
    let (f_removed, f_correct) = preservation_factors(scd.windows.len());
    for w in &scd.windows {
        if *w == removed {
            for r in &scd.data.relations {
                push_scaled(model, *w, Preserved::Relation(r.clone()), f_removed);
            }
        } else {
            if let Some(label) = &scd.data.label {
                push_scaled(model, *w, Preserved::Label(label.clone()), 1.0);
            }
            for r in &scd.data.relations {
                push_scaled(model, *w, Preserved::Relation(r.clone()), f_correct);
            }
        }
    }
    Ok(())
}

/// `(f_r, f_c) = (1/S, (S-1)/S)` for an SCD of `S` sentences.
pub fn preservation_factors(s: usize) -> (f64, f64) {
    let s = s as f64;
    (1.0 / s, (s - 1.0) / s)
}

/// Factor of an item with factor `f` arriving at an SCD that had `s`
/// sentences and gained `x`.
pub fn propagate_factor(f: f64, s: usize, x: usize) -> f64 {
    f * (x as f64 / (s + x) as f64)
}

fn push_scaled(model: &mut ScdModel, window: WindowId, item: Preserved, by: f64) {
    let scaled = item.scaled(by);
    // factors can underflow for long chains of shifts; such items carry no weight
    if scaled.factor() > 0.0 {
        model.hold_on_sentence(window, scaled);
    }
}

/// Step 2. Deletes `t` and its row. Relations that pointed at `t` now point
/// at each of its former sentences. Returns those sentences in window order.
pub fn disassemble(model: &mut ScdModel, t: ScdId) -> Result<Vec<WindowId>> {
    let scd = model.scds.remove(&t).ok_or(Error::UnknownScd(t))?;
    model.matrix.remove_row(t);
    let from = RelationTarget::Scd(t);
    let to: Vec<RelationTarget> = scd
        .windows
        .iter()
        .map(|w| RelationTarget::Window(*w))
        .collect();
    for other in model.scds.values_mut() {
        other.data.retarget(&from, &to);
    }
    for items in model.sentence_items.values_mut() {
        *items = items.iter().flat_map(|p| p.retarget(&from, &to)).collect();
    }
    Ok(scd.windows.into_iter().collect())
}

/// Where the former sentences of a disassembled SCD ended up.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Reassignment {
    /// SCD that received the misassociated sentence.
    pub receiving: ScdId,
    /// SCDs formed during this step, ascending.
    pub created: Vec<ScdId>,
    /// Sentences each SCD gained, in the order they were placed.
    pub gained: BTreeMap<ScdId, Vec<WindowId>>,
}

impl Reassignment {
    pub fn placement(&self) -> BTreeMap<WindowId, ScdId> {
        self.gained
            .iter()
            .flat_map(|(id, ws)| ws.iter().map(move |w| (*w, *id)))
            .collect()
    }
}

/// Step 3. `removed` joins the most similar remaining SCD. Each correct
/// sentence then either joins the most similar SCD or, when an unplaced
/// correct sentence is at least as similar, forms a new SCD with it.
/// Rows of all touched SCDs are rebuilt at the end.
pub fn reassign(
    model: &mut ScdModel,
    removed: WindowId,
    correct: &[WindowId],
) -> Result<Reassignment> {
    let mut vectors = BTreeMap::new();
    for w in correct.iter().chain([&removed]) {
        vectors.insert(*w, model.vectorize_window(*w)?);
    }
    let mut out = Reassignment::default();
    let mut unplaced: BTreeSet<WindowId> = correct.iter().copied().collect();
    if model.matrix.is_empty() {
        tracing::warn!(%removed, "no SCD left after disassembling; pairing sentences among themselves");
        for c in correct {
            if !unplaced.remove(c) {
                continue;
            }
            let peer = best_peer(*c, &unplaced, &vectors)?;
            let members: Vec<WindowId> = match peer {
                Some((p, _)) => {
                    unplaced.remove(&p);
                    vec![*c, p]
                }
                None => vec![*c],
            };
            let id = new_scd(model, &members, &vectors);
            out.created.push(id);
            out.gained.insert(id, members);
        }
        let (receiving, _) = match model.matrix.most_similar_row(&vectors[&removed], None) {
            Ok(found) => found,
            Err(Error::NoCandidate) => return Err(Error::NoReceivingScd(removed)),
            Err(e) => return Err(e),
        };
        join(model, receiving, removed, &vectors, &mut out);
        out.receiving = receiving;
    } else {
        let (receiving, _) = model.matrix.most_similar_row(&vectors[&removed], None)?;
        join(model, receiving, removed, &vectors, &mut out);
        out.receiving = receiving;
        for c in correct {
            if !unplaced.remove(c) {
                continue;
            }
            let (row, row_sim) = model.matrix.most_similar_row(&vectors[c], None)?;
            match best_peer(*c, &unplaced, &vectors)? {
                Some((p, peer_sim)) if peer_sim >= row_sim => {
                    unplaced.remove(&p);
                    let members = vec![*c, p];
                    let id = new_scd(model, &members, &vectors);
                    out.created.push(id);
                    out.gained.insert(id, members);
                }
                _ => join(model, row, *c, &vectors, &mut out),
            }
        }
    }
    let touched: Vec<ScdId> = out.gained.keys().copied().collect();
    for id in touched {
        model.rebuild_row(id)?;
    }
    Ok(out)
}

fn best_peer(
    c: WindowId,
    candidates: &BTreeSet<WindowId>,
    vectors: &BTreeMap<WindowId, WordVector>,
) -> Result<Option<(WindowId, f64)>> {
    let mut best: Option<(WindowId, f64)> = None;
    for p in candidates {
        if *p == c {
            continue;
        }
        let sim = cosine_similarity(&vectors[&c], &vectors[p])?;
        if best.is_none_or(|(_, b)| sim > b) {
            best = Some((*p, sim));
        }
    }
    Ok(best)
}

fn new_scd(
    model: &mut ScdModel,
    members: &[WindowId],
    vectors: &BTreeMap<WindowId, WordVector>,
) -> ScdId {
    let id = model.allocate_scd_id();
    let mut row = WordVector::zeros(model.matrix.dim());
    for w in members {
        row.add_assign(&vectors[w]);
    }
    model.scds.insert(id, Scd::new(id, members.iter().copied()));
    model.matrix.insert_row(id, row);
    id
}

fn join(
    model: &mut ScdModel,
    scd: ScdId,
    window: WindowId,
    vectors: &BTreeMap<WindowId, WordVector>,
    out: &mut Reassignment,
) {
    model
        .scds
        .get_mut(&scd)
        .expect("candidate rows belong to SCDs")
        .windows
        .insert(window);
    model
        .matrix
        .row_mut(scd)
        .expect("candidate rows exist")
        .add_assign(&vectors[&window]);
    out.gained.entry(scd).or_default().push(window);
}

/// Step 4. SCDs formed in this refresh take over the items of their
/// sentences unchanged and get a fresh surrogate label. Pre-existing SCDs
/// that gained `x` sentences on top of `S` receive the items with factors
/// scaled by `x/(S+x)`. Their label is kept, and the items stay on the sentences.
/// Labels arriving from sentences are stored as `label-hint` relations.
pub fn propagate(model: &mut ScdModel, assignment: &Reassignment) -> Result<()> {
    let created: BTreeSet<ScdId> = assignment.created.iter().copied().collect();
    for (id, windows) in &assignment.gained {
        let bundle: Vec<Preserved> = windows
            .iter()
            .flat_map(|w| model.sentence_items(*w).to_vec())
            .collect();
        if created.contains(id) {
            for w in windows {
                model.sentence_items.remove(w);
            }
            let label = label_surrogate(
                model.matrix.row(*id).expect("created SCD has a row"),
                model.label_words,
                model.corpus.vocabulary(),
            )?;
            let scd = model.scds.get_mut(id).expect("created SCD exists");
            for item in &bundle {
                scd.data.add_preserved(item);
            }
            scd.data.label = Some(Label::primary(label));
        } else {
            let scd = model.scds.get_mut(id).ok_or_else(|| {
                Error::InternalInconsistency(format!("{id} vanished during refresh"))
            })?;
            let x = windows.len();
            let before = scd.windows.len() - x;
            for item in &bundle {
                let scaled = item.scaled(propagate_factor(1.0, before, x));
                if scaled.factor() > 0.0 {
                    scd.data.add_preserved(&scaled);
                }
            }
        }
    }
    Ok(())
}

/// Outcome of one refresh, also used as an update-log record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RefreshReport {
    pub version: u64,
    pub removed: WindowId,
    pub stale: ScdId,
    pub receiving: ScdId,
    pub created: Vec<ScdId>,
    pub placement: BTreeMap<WindowId, ScdId>,
}

/// Repairs the SCD holding `removed`, which is taken to be misassociated.
/// `t` defaults to the SCD currently associated with the sentence.
/// On error the model is left untouched.
pub fn refresh(model: &mut ScdModel, removed: WindowId, t: Option<ScdId>) -> Result<RefreshReport> {
    if !model.corpus.contains(removed) {
        return Err(Error::UnknownSentence(removed));
    }
    let owner = model.association(removed);
    let t = match (t, owner) {
        (Some(t), Some(o)) if t == o => t,
        (Some(t), _) => {
            if !model.scds.contains_key(&t) {
                return Err(Error::UnknownScd(t));
            }
            return Err(Error::NotAssociated {
                window: removed,
                scd: Some(t),
            });
        }
        (None, Some(o)) => o,
        (None, None) => {
            return Err(Error::NotAssociated {
                window: removed,
                scd: None,
            })
        }
    };
    let mut work = model.clone();
    shift_relations(&mut work, t, removed)?;
    let former = disassemble(&mut work, t)?;
    let correct: Vec<WindowId> = former.into_iter().filter(|w| *w != removed).collect();
    let assignment = reassign(&mut work, removed, &correct)?;
    propagate(&mut work, &assignment)?;
    work.bump_version();
    #[cfg(debug_assertions)]
    work.check_consistency()?;
    *model = work;
    Ok(RefreshReport {
        version: model.version,
        removed,
        stale: t,
        receiving: assignment.receiving,
        created: assignment.created.clone(),
        placement: assignment.placement(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::influence::InfluenceProfile;
    use crate::scd::{AdditionalData, FactoredRelation, LABEL_HINT_KIND};

    /// t1 = {a b, a b c, x y}, t2 = {x y z}, t3 = {p q}
    fn toy() -> (ScdModel, Vec<WindowId>) {
        let mut corpus = Corpus::new();
        corpus
            .ingest_plaintext("a b. a b c. x y. x y z. p q.", "d")
            .unwrap();
        let w = corpus.window_ids();
        let model = ScdModel::from_annotations(
            corpus,
            vec![
                Scd::new(ScdId(1), [w[0], w[1], w[2]]).with_data(AdditionalData {
                    label: Some(Label::primary("ab")),
                    relations: vec![FactoredRelation::new(
                        1.0,
                        "see",
                        RelationTarget::Scd(ScdId(3)),
                    )
                    .unwrap()],
                }),
                Scd::new(ScdId(2), [w[3]]).with_data(AdditionalData {
                    label: Some(Label::primary("xyz")),
                    relations: vec![FactoredRelation::new(
                        0.5,
                        "near",
                        RelationTarget::Scd(ScdId(1)),
                    )
                    .unwrap()],
                }),
                Scd::new(ScdId(3), [w[4]]),
            ],
            InfluenceProfile::Constant,
        )
        .unwrap();
        (model, w)
    }

    #[test]
    fn factor_helpers() {
        assert_eq!(preservation_factors(3), (1.0 / 3.0, 2.0 / 3.0));
        assert_eq!(preservation_factors(1), (1.0, 0.0));
        assert!((propagate_factor(2.0 / 3.0, 4, 2) - 2.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn shift_factors() {
        let (mut m, w) = toy();
        shift_relations(&mut m, ScdId(1), w[2]).unwrap();
        let removed = m.sentence_items(w[2]);
        assert_eq!(removed.len(), 1);
        assert_eq!(removed[0].factor(), 1.0 / 3.0);
        let correct = m.sentence_items(w[0]);
        assert_eq!(correct.len(), 2);
        assert_eq!(correct[0], Preserved::Label(Label::primary("ab")));
        assert_eq!(correct[1].factor(), 2.0 / 3.0);
    }

    #[test]
    fn disassemble_retargets() {
        let (mut m, w) = toy();
        let former = disassemble(&mut m, ScdId(1)).unwrap();
        assert_eq!(former, vec![w[0], w[1], w[2]]);
        assert!(m.matrix().row(ScdId(1)).is_none());
        let rels = &m.scd(ScdId(2)).unwrap().data.relations;
        assert_eq!(rels.len(), 3);
        assert!(rels.iter().all(|r| r.factor == 0.5 && r.kind == "near"));
    }

    #[test]
    fn refresh_moves_faulty_sentence() {
        let (mut m, w) = toy();
        let report = refresh(&mut m, w[2], None).unwrap();
        assert_eq!(report.stale, ScdId(1));
        assert_eq!(report.receiving, ScdId(2));
        assert!(m.scd(ScdId(1)).is_none());
        assert_eq!(m.association(w[2]), Some(ScdId(2)));
        // the two "a b" sentences are each other's best match
        assert_eq!(report.created, vec![ScdId(4)]);
        let new = m.scd(ScdId(4)).unwrap();
        assert_eq!(new.windows, [w[0], w[1]].into());
        m.check_consistency().unwrap();
        assert_eq!(report.version, 1);
    }

    #[test]
    fn propagated_factors() {
        let (mut m, w) = toy();
        refresh(&mut m, w[2], None).unwrap();
        // created SCD: label hint with factor 1, relation with factor 2/3
        let created = &m.scd(ScdId(4)).unwrap().data;
        assert_eq!(created.label.as_ref().unwrap().text, "a b c");
        let hint = created
            .relations
            .iter()
            .find(|r| r.kind == LABEL_HINT_KIND)
            .unwrap();
        assert_eq!(
            (hint.factor, &hint.target),
            (1.0, &RelationTarget::Label("ab".into()))
        );
        assert!(created
            .relations
            .iter()
            .any(|r| r.kind == "see" && r.factor == 2.0 / 3.0));
        assert!(m.sentence_items(w[0]).is_empty());
        // receiving SCD had one sentence and gained one: scale 1/2
        let receiving = &m.scd(ScdId(2)).unwrap().data;
        assert_eq!(receiving.label, Some(Label::primary("xyz")));
        let see = receiving
            .relations
            .iter()
            .find(|r| r.kind == "see")
            .unwrap();
        assert_eq!(see.factor, (1.0 / 3.0) * 0.5);
        assert_eq!(m.sentence_items(w[2]).len(), 1);
        // relations of SCD 2 that pointed at SCD 1 now point at its sentences
        assert!(receiving
            .relations
            .iter()
            .filter(|r| r.kind == "near")
            .all(|r| matches!(r.target, RelationTarget::Window(_))));
    }

    #[test]
    fn refresh_errors_leave_model_untouched() {
        let (mut m, w) = toy();
        let before = m.clone();
        assert!(matches!(
            refresh(&mut m, w[2], Some(ScdId(2))),
            Err(Error::NotAssociated { .. })
        ));
        assert!(matches!(
            refresh(&mut m, WindowId(999), None),
            Err(Error::UnknownSentence(_))
        ));
        assert_eq!(m, before);
    }

    #[test]
    fn single_scd_fallback() {
        let mut corpus = Corpus::new();
        corpus.ingest_plaintext("a b. a b c. x y.", "d").unwrap();
        let w = corpus.window_ids();
        let mut m = ScdModel::from_annotations(
            corpus,
            vec![Scd::new(ScdId(1), w.clone())],
            InfluenceProfile::Constant,
        )
        .unwrap();
        let report = refresh(&mut m, w[2], None).unwrap();
        assert_eq!(report.created, vec![ScdId(2)]);
        assert_eq!(report.receiving, ScdId(2));
        assert_eq!(m.scd_count(), 1);
        m.check_consistency().unwrap();
    }

    #[test]
    fn lone_sentence_has_no_receiver() {
        let mut corpus = Corpus::new();
        corpus.ingest_plaintext("a b.", "d").unwrap();
        let w = corpus.window_ids();
        let mut m = ScdModel::from_annotations(
            corpus,
            vec![Scd::new(ScdId(1), w.clone())],
            InfluenceProfile::Constant,
        )
        .unwrap();
        assert!(matches!(
            refresh(&mut m, w[0], None),
            Err(Error::NoReceivingScd(_))
        ));
    }

    #[test]
    fn fresh_removes_sentence_and_relations() {
        let (mut m, w) = toy();
        m.add_relation(
            ScdId(3),
            FactoredRelation::new(1.0, "cites", RelationTarget::Window(w[4])).unwrap(),
        )
        .unwrap();
        let report = fresh_remove_sentence(&mut m, w[3]).unwrap();
        assert_eq!(report.scd, Some(ScdId(2)));
        assert!(report.scd_removed);
        assert!(!m.corpus().contains(w[3]));
        // SCD 3 had no relation to 2; the relation to w4 remains
        assert_eq!(m.scd(ScdId(3)).unwrap().data.relations.len(), 1);
        let report = fresh_remove_sentence(&mut m, w[4]).unwrap();
        assert!(report.scd_removed);
        m.check_consistency().unwrap();
        assert!(matches!(
            fresh_remove_sentence(&mut m, w[4]),
            Err(Error::UnknownSentence(_))
        ));
    }

    #[test]
    fn fresh_inverts_sem_add() {
        let (mut m, _) = toy();
        let before = m.matrix().row(ScdId(1)).unwrap().clone();
        let ids = m.ingest_document("b c d.", "d2").unwrap();
        m.sem_add(ScdId(1), ids[0]).unwrap();
        fresh_remove_sentence(&mut m, ids[0]).unwrap();
        let after = m.matrix().row(ScdId(1)).unwrap();
        assert_eq!(
            after.iter().collect::<Vec<_>>(),
            before.iter().collect::<Vec<_>>()
        );
        m.check_consistency().unwrap();
    }
}
