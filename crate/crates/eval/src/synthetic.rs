//! Deterministic corpus with planted, word-disjoint topics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scd_core::Corpus;

const TOPICS: [&[&str]; 3] = [
    &[
        "contract", "seller", "buyer", "price", "delivery", "defect", "warranty", "invoice",
        "payment", "goods", "purchase", "refund",
    ],
    &[
        "river", "boat", "harbour", "tide", "anchor", "sail", "shore", "current", "captain",
        "deck", "wave", "rope",
    ],
    &[
        "orchard", "apple", "blossom", "harvest", "ladder", "basket", "branch", "pear", "soil",
        "root", "ripe", "cider",
    ],
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub documents: usize,
    pub sentences_per_document: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            documents: 30,
            sentences_per_document: 5,
            seed: 7,
        }
    }
}

pub const TOPIC_COUNT: usize = TOPICS.len();

/// Topic of document `i`.
pub fn topic_of(doc: usize) -> usize {
    doc % TOPIC_COUNT
}

/// Documents `doc0..` cycle through the topics; sentences hold 4 to 8
/// words drawn from their document's topic.
pub fn synthetic_corpus(spec: SyntheticSpec) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut corpus = Corpus::new();
    for d in 0..spec.documents {
        let pool = TOPICS[topic_of(d)];
        let text: Vec<String> = (0..spec.sentences_per_document)
            .map(|_| {
                let len = rng.random_range(4..=8);
                let words: Vec<&str> = (0..len)
                    .map(|_| pool[rng.random_range(0..pool.len())])
                    .collect();
                format!("{}.", words.join(" "))
            })
            .collect();
        corpus
            .ingest_plaintext(&text.join(" "), &format!("doc{d}"))
            .expect("synthetic text is valid");
    }
    corpus
}
