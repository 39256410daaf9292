//! The SCD-word matrix δ(D): one sparse row per SCD.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::ScdId;
use crate::vector::{cosine_with_norms, WordVector};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScdMatrix {
    dim: usize,
    rows: BTreeMap<ScdId, WordVector>,
}

impl ScdMatrix {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: BTreeMap::new(),
        }
    }

    /// Number of columns (vocabulary size L).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rows (SCD count K).
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, id: ScdId) -> Option<&WordVector> {
        self.rows.get(&id)
    }

    pub(crate) fn row_mut(&mut self, id: ScdId) -> Option<&mut WordVector> {
        self.rows.get_mut(&id)
    }

    pub fn rows(&self) -> impl Iterator<Item = (ScdId, &WordVector)> + '_ {
        self.rows.iter().map(|(id, r)| (*id, r))
    }

    pub fn ids(&self) -> impl Iterator<Item = ScdId> + '_ {
        self.rows.keys().copied()
    }

    pub fn insert_row(&mut self, id: ScdId, mut row: WordVector) -> Option<WordVector> {
        row.extend_dim(self.dim);
        self.dim = self.dim.max(row.dim());
        self.rows.insert(id, row)
    }

    pub fn remove_row(&mut self, id: ScdId) -> Option<WordVector> {
        self.rows.remove(&id)
    }

    /// Widens every row after the vocabulary grew.
    pub fn extend_dim(&mut self, dim: usize) {
        self.dim = self.dim.max(dim);
        for row in self.rows.values_mut() {
            row.extend_dim(self.dim);
        }
    }

    /// Row-stochastic copy; the stored matrix is left unnormalized.
    pub fn normalize_rows(&self) -> Result<ScdMatrix> {
        let mut rows = BTreeMap::new();
        for (id, row) in &self.rows {
            let normalized = row
                .normalized()
                .map_err(|_| Error::DegenerateRow(id.to_string()))?;
            rows.insert(*id, normalized);
        }
        Ok(ScdMatrix {
            dim: self.dim,
            rows,
        })
    }

    /// The row most cosine-similar to `v`, ties broken by the smallest id.
    pub fn most_similar_row(
        &self,
        v: &WordVector,
        exclude: Option<&BTreeSet<ScdId>>,
    ) -> Result<(ScdId, f64)> {
        if v.dim() != self.dim {
            return Err(Error::Dimension {
                left: v.dim(),
                right: self.dim,
            });
        }
        let nv = v.norm();
        let mut best: Option<(ScdId, f64)> = None;
        for (id, row) in &self.rows {
            if exclude.is_some_and(|ex| ex.contains(id)) {
                continue;
            }
            let sim = cosine_with_norms(v, nv, row, row.norm());
            // Rows are visited in increasing id order, so strict > keeps the smallest id.
            if best.is_none_or(|(_, b)| sim > b) {
                best = Some((*id, sim));
            }
        }
        best.ok_or(Error::NoCandidate)
    }
}
