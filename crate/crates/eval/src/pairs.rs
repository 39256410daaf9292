//! Choosing sentence pairs to merge on purpose.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scd_core::influence::vectorize;
use scd_core::{cosine_similarity, Corpus, InfluenceProfile, WindowId, WordVector};

use crate::error::{EvalError, Result};

/// Pairs whose cosine similarity reaches this value count as related.
pub const DEFAULT_DISSIMILARITY_CAP: f64 = 0.1;

/// Number of pairs drawn for `n` sentences.
pub fn pair_count(n: usize, fraction: f64) -> usize {
    (fraction * n as f64 / 2.0).floor() as usize
}

/// `⌊fraction·n/2⌋` disjoint pairs of mutually dissimilar sentences.
///
/// Sentences are shuffled with the seed; each unused sentence in shuffled
/// order is paired with the first later unused sentence whose cosine
/// similarity is below `cap`.
pub fn choose_faulty_pairs(
    corpus: &Corpus,
    fraction: f64,
    seed: u64,
    cap: f64,
) -> Result<Vec<(WindowId, WindowId)>> {
    let n = corpus.sentence_count();
    if !(fraction.is_finite() && fraction >= 0.0) || fraction * (n as f64) < 2.0 {
        return Err(EvalError::Config(format!(
            "fraction {fraction} of {n} sentences leaves no pair"
        )));
    }
    let wanted = pair_count(n, fraction);
    let mut order = corpus.window_ids();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let vectors = order
        .iter()
        .map(|w| {
            let s = corpus.sentence(*w).expect("listed window");
            Ok(vectorize(
                s,
                InfluenceProfile::Constant,
                corpus.vocabulary(),
            )?)
        })
        .collect::<Result<Vec<WordVector>>>()?;

    let mut used = vec![false; n];
    let mut pairs = Vec::with_capacity(wanted);
    for i in 0..n {
        if pairs.len() == wanted {
            break;
        }
        if used[i] {
            continue;
        }
        let partner = (i + 1..n).find(|&j| {
            !used[j] && cosine_similarity(&vectors[i], &vectors[j]).is_ok_and(|c| c < cap)
        });
        if let Some(j) = partner {
            used[i] = true;
            used[j] = true;
            pairs.push((order[i], order[j]));
        }
    }
    if pairs.len() < wanted {
        return Err(EvalError::PairingExhausted {
            achieved: pairs.len(),
            wanted,
        });
    }
    Ok(pairs)
}
