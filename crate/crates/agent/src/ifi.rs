//! Implicit feedback incorporation: deciding from response and select
//! counters when a sentence should leave its SCD or the corpus.

use scd_core::refresh::{fresh_remove_sentence, refresh, FreshReport, RefreshReport};
use scd_core::{ScdId, ScdModel, WindowId};
use serde::{Deserialize, Serialize};

use crate::counters::{CounterKey, CounterStore, Counts};
use crate::error::Result;

pub const DEFAULT_THETA_REFRESH: u64 = 10;
pub const DEFAULT_THETA_FRESH: u64 = 100;

/// True when a sentence is selected less than half as often as a uniformly
/// random pick among the `s` sentences of its SCD would be, given enough
/// responses for both. Evaluated as `sc_t * rc_s > 2 * s * sc_s * rc_t`.
pub fn refresh_condition(scd: Counts, sentence: Counts, s: usize, theta: u64) -> bool {
    if scd.rc < theta || sentence.rc < theta || scd.rc == 0 || sentence.rc == 0 {
        return false;
    }
    let lhs = scd.sc as u128 * sentence.rc as u128;
    let rhs = 2 * s as u128 * sentence.sc as u128 * scd.rc as u128;
    lhs > rhs
}

/// True when a sentence was returned at least `theta` times and selected in
/// fewer than one of `theta` responses. Evaluated as `rc_s > theta * sc_s`.
pub fn fresh_condition(sentence: Counts, theta: u64) -> bool {
    sentence.rc >= theta && sentence.rc as u128 > theta as u128 * sentence.sc as u128
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "action")]
pub enum IfiAction {
    Refresh(RefreshReport),
    Fresh(FreshReport),
    /// The refresh condition held but no SCD could receive the sentence.
    Skipped {
        window: WindowId,
        scd: ScdId,
        reason: String,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IfiReport {
    pub version: u64,
    pub actions: Vec<IfiAction>,
}

/// One pass over documents, their SCDs (ascending id) and the SCDs'
/// sentences (ascending window id), applying refreshes and removals on the
/// current model state. A final sweep removes sentences that meet the
/// removal condition but were not reached, such as sentences moved into an
/// SCD visited earlier. `commit` is called after every applied update.
pub fn enhance_scds(
    model: &mut ScdModel,
    counters: &mut CounterStore,
    theta_refresh: u64,
    theta_fresh: u64,
    mut commit: impl FnMut(&ScdModel) -> Result<()>,
) -> Result<IfiReport> {
    let mut actions = Vec::new();
    let doc_ids: Vec<String> = model
        .corpus()
        .documents()
        .iter()
        .map(|d| d.id.clone())
        .collect();
    for doc_id in doc_ids {
        let Some(doc_index) = model
            .corpus()
            .documents()
            .iter()
            .position(|d| d.id == doc_id)
        else {
            continue;
        };
        for t in model.scds_of_document(doc_index) {
            let Some(scd) = model.scd(t) else { continue };
            let windows: Vec<WindowId> = scd.windows.iter().copied().collect();
            for w in windows {
                let Some(scd) = model.scd(t) else { break };
                if !scd.windows.contains(&w) {
                    continue;
                }
                let s = scd.windows.len();
                let (ct, cs) = (counters.scd(t), counters.sentence(w));
                if refresh_condition(ct, cs, s, theta_refresh) {
                    match refresh(model, w, Some(t)) {
                        Ok(report) => {
                            counters.reset(CounterKey::Scd(t));
                            counters.reset(CounterKey::Sentence(w));
                            tracing::info!(window = %w, scd = %t, "refresh triggered by feedback");
                            commit(model)?;
                            actions.push(IfiAction::Refresh(report));
                            break;
                        }
                        Err(scd_core::Error::NoReceivingScd(_)) => {
                            actions.push(IfiAction::Skipped {
                                window: w,
                                scd: t,
                                reason: "no SCD can receive the sentence".into(),
                            });
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
                if fresh_condition(counters.sentence(w), theta_fresh) {
                    let report = fresh_remove_sentence(model, w)?;
                    counters.reset(CounterKey::Sentence(w));
                    tracing::info!(window = %w, "sentence removed by feedback");
                    commit(model)?;
                    let gone = report.scd_removed;
                    actions.push(IfiAction::Fresh(report));
                    if gone {
                        break;
                    }
                }
            }
        }
    }
    // Sentences moved by a refresh into an already visited SCD were never checked.
    for w in model.corpus().window_ids() {
        if fresh_condition(counters.sentence(w), theta_fresh) {
            let report = fresh_remove_sentence(model, w)?;
            counters.reset(CounterKey::Sentence(w));
            commit(model)?;
            actions.push(IfiAction::Fresh(report));
        }
    }
    Ok(IfiReport {
        version: model.version(),
        actions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(rc: u64, sc: u64) -> Counts {
        Counts { rc, sc }
    }

    #[test]
    fn refresh_example() {
        // 10/20 * 1/10 = 0.05 > 0/12
        assert!(refresh_condition(c(20, 10), c(12, 0), 5, 10));
        // below threshold on the sentence side
        assert!(!refresh_condition(c(20, 10), c(9, 0), 5, 10));
    }

    #[test]
    fn fresh_boundary() {
        assert!(!fresh_condition(c(100, 1), 100));
        assert!(fresh_condition(c(100, 0), 100));
        assert!(fresh_condition(c(101, 1), 100));
        assert!(!fresh_condition(c(99, 0), 100));
    }

    #[test]
    fn infinite_thresholds_never_fire() {
        assert!(!refresh_condition(
            c(u64::MAX - 1, u64::MAX - 1),
            c(u64::MAX - 1, 0),
            1,
            u64::MAX
        ));
        assert!(!fresh_condition(c(u64::MAX - 1, 0), u64::MAX));
    }
}
