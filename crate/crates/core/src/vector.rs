//! Sparse word vectors over the vocabulary.
//!
//! A [`WordVector`] has a logical length `dim` (the vocabulary size L) and
//! stores only its nonzero entries, sorted by word id.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::WordId;

/// Relative residue below which a subtracted entry is treated as zero.
const SUBTRACTION_RESIDUE: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WordVector {
    dim: usize,
    entries: Vec<(WordId, f64)>,
}

impl WordVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Builds a vector from unsorted `(word, weight)` pairs, summing duplicates.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (WordId, f64)>) -> Result<Self> {
        let mut entries: Vec<(WordId, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|(w, _)| *w);
        let mut merged: Vec<(WordId, f64)> = Vec::with_capacity(entries.len());
        for (w, x) in entries {
            if w.index() >= dim {
                return Err(Error::Dimension {
                    left: dim,
                    right: w.index() + 1,
                });
            }
            match merged.last_mut() {
                Some((lw, lx)) if *lw == w => *lx += x,
                _ => merged.push((w, x)),
            }
        }
        merged.retain(|(_, x)| *x != 0.0);
        Ok(Self {
            dim,
            entries: merged,
        })
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, x)| (WordId(i as u32), *x))
            .collect();
        Self {
            dim: values.len(),
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Grows the logical length. Vocabularies are append-only, so existing
    /// entries keep their positions.
    pub fn extend_dim(&mut self, dim: usize) {
        debug_assert!(dim >= self.dim);
        self.dim = self.dim.max(dim);
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: WordId) -> f64 {
        self.entries
            .binary_search_by_key(&word, |(w, _)| *w)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (WordId, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (w, x) in &self.entries {
            out[w.index()] = *x;
        }
        out
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|(_, x)| x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, x)| x * x).sum::<f64>().sqrt()
    }

    /// Adds `weight` at `word`.
    pub fn accumulate(&mut self, word: WordId, weight: f64) {
        match self.entries.binary_search_by_key(&word, |(w, _)| *w) {
            Ok(i) => self.entries[i].1 += weight,
            Err(i) => self.entries.insert(i, (word, weight)),
        }
        self.dim = self.dim.max(word.index() + 1);
    }

    pub fn add_assign(&mut self, other: &WordVector) {
        self.dim = self.dim.max(other.dim);
        self.entries = merge_join(&self.entries, &other.entries, |a, b| a + b);
        self.entries.retain(|(_, x)| *x != 0.0);
    }

    /// Subtracts `other`. Entries that drop to (numerically) zero are removed
    /// so that add-then-subtract restores the sparse structure exactly.
    pub fn sub_assign(&mut self, other: &WordVector) {
        self.dim = self.dim.max(other.dim);
        let mut out = Vec::with_capacity(self.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            let a = self.entries.get(i);
            let b = other.entries.get(j);
            match (a, b) {
                (Some(&(wa, xa)), Some(&(wb, xb))) if wa == wb => {
                    let v = xa - xb;
                    if v > xb.abs() * SUBTRACTION_RESIDUE {
                        out.push((wa, v));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(&(wa, xa)), Some(&(wb, _))) if wa < wb => {
                    out.push((wa, xa));
                    i += 1;
                }
                (Some(&(wa, xa)), None) => {
                    out.push((wa, xa));
                    i += 1;
                }
                // Subtracting a word this vector never held: nothing to remove.
                (_, Some(_)) => j += 1,
                (None, None) => unreachable!(),
            }
        }
        self.entries = out;
    }

    pub fn scaled(&self, factor: f64) -> WordVector {
        WordVector {
            dim: self.dim,
            entries: self.entries.iter().map(|(w, x)| (*w, x * factor)).collect(),
        }
    }

    pub fn dot(&self, other: &WordVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.entries.len() && j < other.entries.len() {
            let (wa, xa) = self.entries[i];
            let (wb, xb) = other.entries[j];
            match wa.cmp(&wb) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += xa * xb;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Row-stochastic copy (entries sum to one).
    pub fn normalized(&self) -> Result<WordVector> {
        let total = self.sum();
        if total.is_nan() || total <= 0.0 || self.entries.iter().any(|(_, x)| *x < 0.0) {
            return Err(Error::DegenerateRow(format!("{self:?}")));
        }
        Ok(WordVector {
            dim: self.dim,
            entries: self.entries.iter().map(|(w, x)| (*w, x / total)).collect(),
        })
    }

    /// Bitwise equality of dimension and stored entries.
    pub fn bit_eq(&self, other: &WordVector) -> bool {
        self.dim == other.dim
            && self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|((wa, xa), (wb, xb))| wa == wb && xa.to_bits() == xb.to_bits())
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &WordVector) -> f64 {
        merge_join(&self.entries, &other.entries, |a, b| a - b)
            .into_iter()
            .map(|(_, x)| x.abs())
            .fold(0.0, f64::max)
    }
}

fn merge_join(
    a: &[(WordId, f64)],
    b: &[(WordId, f64)],
    op: impl Fn(f64, f64) -> f64,
) -> Vec<(WordId, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(wa, xa)), Some(&(wb, xb))) => match wa.cmp(&wb) {
                std::cmp::Ordering::Less => {
                    out.push((wa, op(xa, 0.0)));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((wb, op(0.0, xb)));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((wa, op(xa, xb)));
                    i += 1;
                    j += 1;
                }
            },
            (Some(&(wa, xa)), None) => {
                out.push((wa, op(xa, 0.0)));
                i += 1;
            }
            (None, Some(&(wb, xb))) => {
                out.push((wb, op(0.0, xb)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Cosine similarity of two nonnegative word vectors, in `[0, 1]`.
///
/// Returns 0 when either vector has zero norm.
pub fn cosine_similarity(u: &WordVector, v: &WordVector) -> Result<f64> {
    if u.dim != v.dim {
        return Err(Error::Dimension {
            left: u.dim,
            right: v.dim,
        });
    }
    Ok(cosine_with_norms(u, u.norm(), v, v.norm()))
}

/// Cosine with precomputed norms; dimensions are not checked.
pub(crate) fn cosine_with_norms(u: &WordVector, nu: f64, v: &WordVector, nv: f64) -> f64 {
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (u.dot(v) / (nu * nv)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(dim: usize, pairs: &[(u32, f64)]) -> WordVector {
        WordVector::from_pairs(dim, pairs.iter().map(|(w, x)| (WordId(*w), *x))).unwrap()
    }

    #[test]
    fn self_similarity_is_one() {
        let u = v(3, &[(0, 2.0), (1, 1.0)]);
        assert!((cosine_similarity(&u, &u).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn disjoint_supports_are_orthogonal() {
        let u = v(3, &[(0, 2.0)]);
        let w = v(3, &[(1, 1.0), (2, 4.0)]);
        assert_eq!(cosine_similarity(&u, &w).unwrap(), 0.0);
    }

    #[test]
    fn partial_overlap() {
        // dot = 1, |u| = sqrt 2, |v| = 1
        let u = v(2, &[(0, 1.0), (1, 1.0)]);
        let w = v(2, &[(0, 1.0)]);
        let expected = 0.707_106_781_186_547_5;
        assert!((cosine_similarity(&u, &w).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_norm_is_zero_similarity() {
        let u = WordVector::zeros(4);
        let w = v(4, &[(1, 1.0)]);
        assert_eq!(cosine_similarity(&u, &w).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let u = WordVector::zeros(4);
        let w = WordVector::zeros(5);
        assert!(matches!(
            cosine_similarity(&u, &w),
            Err(Error::Dimension { left: 4, right: 5 })
        ));
    }

    #[test]
    fn add_then_sub_restores_structure() {
        let mut row = v(5, &[(0, 2.0), (3, 1.0)]);
        let before = row.clone();
        let s = v(5, &[(1, 1.0), (3, 2.0)]);
        row.add_assign(&s);
        assert_eq!(row.get(WordId(3)), 3.0);
        row.sub_assign(&s);
        assert!(row.bit_eq(&before));
    }

    #[test]
    fn normalized_rejects_zero() {
        assert!(matches!(
            WordVector::zeros(3).normalized(),
            Err(Error::DegenerateRow(_))
        ));
    }

    #[test]
    fn from_pairs_sums_duplicates() {
        let u = v(3, &[(2, 1.0), (0, 1.0), (2, 0.5)]);
        assert_eq!(u.to_dense(), vec![1.0, 0.0, 1.5]);
    }
}
