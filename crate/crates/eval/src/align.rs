//! Row alignment of two models over their shared sentences.

use std::collections::BTreeMap;

use scd_core::{ScdId, ScdModel, WindowId, WordVector};

use crate::error::{EvalError, Result};
use crate::hellinger::hellinger_sparse;

/// One normalized row per shared sentence: the row of the SCD holding it.
#[derive(Clone, Debug)]
pub struct Aligned {
    pub windows: Vec<WindowId>,
    pub left: Vec<WordVector>,
    pub right: Vec<WordVector>,
    /// Sentences present in only one of the models.
    pub skipped: Vec<WindowId>,
}

fn normalized_rows(model: &ScdModel) -> Result<BTreeMap<ScdId, WordVector>> {
    let m = model.matrix().normalize_rows()?;
    Ok(m.rows().map(|(id, r)| (id, r.clone())).collect())
}

pub fn align_models(a: &ScdModel, b: &ScdModel) -> Result<Aligned> {
    let (ra, rb) = (normalized_rows(a)?, normalized_rows(b)?);
    let (assoc_a, assoc_b) = (a.associations(), b.associations());
    let mut out = Aligned {
        windows: Vec::new(),
        left: Vec::new(),
        right: Vec::new(),
        skipped: Vec::new(),
    };
    let mut all: Vec<WindowId> = assoc_a.keys().chain(assoc_b.keys()).copied().collect();
    all.sort();
    all.dedup();
    for w in all {
        match (assoc_a.get(&w), assoc_b.get(&w)) {
            (Some(sa), Some(sb)) => {
                out.windows.push(w);
                out.left.push(ra[sa].clone());
                out.right.push(rb[sb].clone());
            }
            _ => out.skipped.push(w),
        }
    }
    if out.windows.is_empty() {
        return Err(EvalError::AlignmentError);
    }
    if !out.skipped.is_empty() {
        tracing::debug!(
            count = out.skipped.len(),
            "sentences missing from one model"
        );
    }
    Ok(out)
}

/// `H(a, b)`: one Hellinger distance per aligned row.
pub fn distance_vector(a: &ScdModel, b: &ScdModel) -> Result<Vec<f64>> {
    let aligned = align_models(a, b)?;
    aligned
        .left
        .iter()
        .zip(&aligned.right)
        .map(|(p, q)| hellinger_sparse(p, q))
        .collect()
}
