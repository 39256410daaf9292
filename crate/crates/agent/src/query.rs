//! Ranking SCDs for a query.

use scd_core::corpus::tokenize;
use scd_core::{RelationTarget, ScdId, ScdModel, WindowId, WordVector};
use serde::{Deserialize, Serialize};

use crate::counters::{CounterKey, CounterStore};
use crate::error::{AgentError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Query {
    pub text: String,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// Answer out-of-vocabulary queries with zero scores instead of failing.
    #[serde(default)]
    pub allow_zero: bool,
}

fn default_top_k() -> usize {
    10
}

impl Query {
    pub fn new(text: impl Into<String>, top_k: usize) -> Self {
        Self {
            text: text.into(),
            top_k,
            allow_zero: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResponseSentence {
    pub window_id: WindowId,
    pub doc_id: String,
    pub position: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RelatedItem {
    pub kind: String,
    pub factor: f64,
    pub target: RelationTarget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResponseEntry {
    pub scd_id: ScdId,
    pub label: Option<String>,
    pub score: f64,
    pub sentences: Vec<ResponseSentence>,
    pub related: Vec<RelatedItem>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IrResponse {
    pub response_id: u64,
    pub model_version: u64,
    pub entries: Vec<ResponseEntry>,
}

/// Bag-of-words vector of the query over the model vocabulary, constant influence.
pub fn query_vector(model: &ScdModel, text: &str) -> Result<WordVector> {
    if tokenize(text).is_empty() {
        return Err(AgentError::EmptyQuery);
    }
    let known = model.corpus().known_tokens(text);
    Ok(WordVector::from_pairs(
        model.matrix().dim(),
        known.into_iter().map(|w| (w, 1.0)),
    )?)
}

/// Scores every SCD by cosine similarity, descending, ties by smallest id.
pub fn rank(model: &ScdModel, q: &WordVector) -> Result<Vec<(ScdId, f64)>> {
    let mut scored = model
        .matrix()
        .rows()
        .map(|(id, row)| Ok((id, scd_core::cosine_similarity(q, row)?)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(scored)
}

/// Answers `q` and counts a response for every returned SCD and sentence.
pub fn answer_query(
    model: &ScdModel,
    counters: &mut CounterStore,
    q: &Query,
    response_id: u64,
) -> Result<IrResponse> {
    if q.top_k == 0 {
        return Err(AgentError::InvalidRequest("topK must be at least 1".into()));
    }
    if model.scd_count() == 0 {
        return Err(AgentError::EmptyModel);
    }
    let v = query_vector(model, &q.text)?;
    if v.is_zero() && !q.allow_zero {
        return Err(AgentError::EmptyQuery);
    }
    let ranked = rank(model, &v)?;
    let vocab = model.corpus().vocabulary();
    let mut entries = Vec::new();
    for (id, score) in ranked.into_iter().take(q.top_k) {
        let scd = model.scd(id).expect("ranked rows belong to SCDs");
        let sentences = scd
            .windows
            .iter()
            .filter_map(|w| model.corpus().sentence(*w))
            .map(|s| ResponseSentence {
                window_id: s.window_id,
                doc_id: s.doc_id.clone(),
                position: s.position,
                text: s.text(vocab),
            })
            .collect();
        let related = scd
            .data
            .relations
            .iter()
            .map(|r| RelatedItem {
                kind: r.kind.clone(),
                factor: r.factor,
                target: r.target.clone(),
            })
            .collect();
        entries.push(ResponseEntry {
            scd_id: id,
            label: scd.data.label.as_ref().map(|l| l.text.clone()),
            score,
            sentences,
            related,
        });
    }
    for e in &entries {
        counters.respond(CounterKey::Scd(e.scd_id));
        for s in &e.sentences {
            counters.respond(CounterKey::Sentence(s.window_id));
        }
    }
    Ok(IrResponse {
        response_id,
        model_version: model.version(),
        entries,
    })
}
