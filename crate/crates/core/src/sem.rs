//! Supervised estimation of the SCD matrix from a given SCD set.

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::influence::{vectorize, InfluenceProfile};
use crate::matrix::ScdMatrix;
use crate::scd::Scd;
use crate::vector::WordVector;

/// Builds δ(D): the row of each SCD is the sum of the influence-weighted
/// word vectors of its referenced sentences.
pub fn estimate_sem(
    corpus: &Corpus,
    annotations: &[Scd],
    profile: InfluenceProfile,
) -> Result<ScdMatrix> {
    let dim = corpus.vocabulary().len();
    let mut matrix = ScdMatrix::new(dim);
    for scd in annotations {
        let mut row = WordVector::zeros(dim);
        for window in &scd.windows {
            let sentence = corpus.sentence(*window).ok_or(Error::DanglingReference {
                scd: scd.id,
                window: *window,
            })?;
            row.add_assign(&vectorize(sentence, profile, corpus.vocabulary())?);
        }
        matrix.insert_row(scd.id, row);
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{ScdId, WindowId};

    fn corpus(text: &str) -> Corpus {
        let mut c = Corpus::new();
        c.ingest_plaintext(text, "d").unwrap();
        c
    }

    #[test]
    fn single_sentence_row() {
        let c = corpus("a b a.");
        let ids = c.window_ids();
        let m = estimate_sem(&c, &[Scd::new(ScdId(1), ids)], InfluenceProfile::Constant).unwrap();
        assert_eq!(m.row(ScdId(1)).unwrap().to_dense(), vec![2.0, 1.0]);
    }

    #[test]
    fn two_sentence_row() {
        let c = corpus("a b. b c.");
        let ids = c.window_ids();
        let m = estimate_sem(&c, &[Scd::new(ScdId(1), ids)], InfluenceProfile::Constant).unwrap();
        assert_eq!(m.row(ScdId(1)).unwrap().to_dense(), vec![1.0, 2.0, 1.0]);
        assert_eq!(m.dim(), 3);
    }

    #[test]
    fn dangling_reference() {
        let c = corpus("a b.");
        let err = estimate_sem(
            &c,
            &[Scd::new(ScdId(1), [WindowId(99)])],
            InfluenceProfile::Constant,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DanglingReference { .. }));
    }

    #[test]
    fn additive_over_partitions() {
        let c = corpus("a b. b c. c d a. d d.");
        let ids = c.window_ids();
        let whole = estimate_sem(
            &c,
            &[Scd::new(ScdId(1), ids.clone())],
            InfluenceProfile::Linear,
        )
        .unwrap();
        let parts = estimate_sem(
            &c,
            &[
                Scd::new(ScdId(1), ids[..2].to_vec()),
                Scd::new(ScdId(2), ids[2..].to_vec()),
            ],
            InfluenceProfile::Linear,
        )
        .unwrap();
        let mut sum = parts.row(ScdId(1)).unwrap().clone();
        sum.add_assign(parts.row(ScdId(2)).unwrap());
        assert!(sum.max_abs_diff(whole.row(ScdId(1)).unwrap()) < 1e-12);
    }
}
