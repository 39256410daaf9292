//! Positional influence values and sentence vectorization.

use serde::{Deserialize, Serialize};

use crate::corpus::{Sentence, Vocabulary};
use crate::error::{Error, Result};
use crate::vector::WordVector;

/// How much a word occurrence contributes to its SCD row, by position.
///
/// `Linear` is a symmetric ramp peaking at the sentence center; `Binomial`
/// uses binomial coefficients `C(N-1, i)`. Both are scaled so the largest
/// positional weight of a sentence is 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfluenceProfile {
    #[default]
    Constant,
    Linear,
    Binomial,
}

impl std::str::FromStr for InfluenceProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "constant" => Ok(Self::Constant),
            "linear" => Ok(Self::Linear),
            "binomial" => Ok(Self::Binomial),
            other => Err(Error::Config(format!(
                "unknown influence profile {other:?}"
            ))),
        }
    }
}

impl InfluenceProfile {
    /// Weight of the token at `position` (0-based) in a sentence of `len` tokens.
    pub fn weight(self, len: usize, position: usize) -> Result<f64> {
        if position >= len {
            return Err(Error::Index { position, len });
        }
        Ok(match self {
            Self::Constant => 1.0,
            Self::Linear => {
                let ramp = |i: usize| (i + 1).min(len - i) as f64;
                ramp(position) / ramp((len - 1) / 2)
            }
            Self::Binomial => {
                let n = len - 1;
                let w = (ln_choose(n, position) - ln_choose(n, n / 2)).exp();
                w.max(f64::MIN_POSITIVE)
            }
        })
    }
}

fn ln_choose(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Influence value I(w, s) of the token at `position`.
pub fn influence(profile: InfluenceProfile, sentence: &Sentence, position: usize) -> Result<f64> {
    profile.weight(sentence.len(), position)
}

/// Influence-weighted word counts of a single sentence.
pub fn vectorize(
    sentence: &Sentence,
    profile: InfluenceProfile,
    vocab: &Vocabulary,
) -> Result<WordVector> {
    let len = sentence.len();
    let mut pairs = Vec::with_capacity(len);
    for (pos, token) in sentence.tokens.iter().enumerate() {
        if token.index() >= vocab.len() {
            return Err(Error::UnknownWord(token.to_string()));
        }
        pairs.push((*token, profile.weight(len, pos)?));
    }
    WordVector::from_pairs(vocab.len(), pairs)
}
