//! Core of an SCD-based model: corpus handling, the SCD-word matrix,
//! supervised and unsupervised estimation, and relation-preserving updates.

pub mod corpus;
pub mod error;
pub mod ids;
pub mod influence;
pub mod matrix;
pub mod model;
pub mod refresh;
pub mod scd;
pub mod sem;
pub mod source;
pub mod usem;
pub mod vector;
pub mod xml;

pub use corpus::{Corpus, Document, Sentence, Vocabulary};
pub use error::{Error, Result};
pub use ids::{ScdId, WindowId, WordId};
pub use influence::InfluenceProfile;
pub use matrix::ScdMatrix;
pub use model::ScdModel;
pub use refresh::{fresh_remove_sentence, refresh, FreshReport, RefreshReport};
pub use scd::{AdditionalData, FactoredRelation, Label, Preserved, RelationTarget, Scd};
pub use source::load_corpus;
pub use usem::{
    estimate_usem, estimate_usem_traced, label_surrogate, merge_scds, MergeConfig, MergeStep,
};
pub use vector::{cosine_similarity, WordVector};
pub use xml::{ingest_xml_law, IngestConfig};
