use thiserror::Error;

use crate::ids::{ScdId, WindowId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("document is empty or yields no tokens")]
    EmptyDocument,
    #[error("document id {0:?} already exists")]
    DuplicateDocument(String),
    #[error("parse error at byte {position}: {message}")]
    Parse { position: u64, message: String },
    #[error("ingestion config line {line}: {message}")]
    IngestConfig { line: usize, message: String },
    #[error("position {position} out of range for sentence of length {len}")]
    Index { position: usize, len: usize },
    #[error("unknown word {0:?}")]
    UnknownWord(String),
    #[error("SCD {scd} references missing sentence {window}")]
    DanglingReference { scd: ScdId, window: WindowId },
    #[error("row {0} has no positive weight")]
    DegenerateRow(String),
    #[error("vector dimensions differ: {left} vs {right}")]
    Dimension { left: usize, right: usize },
    #[error("no candidate row to compare against")]
    NoCandidate,
    #[error("unknown SCD {0}")]
    UnknownScd(ScdId),
    #[error("unknown sentence {0}")]
    UnknownSentence(WindowId),
    #[error("sentence {window} is not associated with {}", .scd.map(|s| s.to_string()).unwrap_or_else(|| "any SCD".into()))]
    NotAssociated {
        window: WindowId,
        scd: Option<ScdId>,
    },
    #[error("sentence {window} is already associated with {scd}")]
    AlreadyAssociated { window: WindowId, scd: ScdId },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid factor {0}: must lie in (0, 1]")]
    InvalidFactor(f64),
    #[error("no SCD can receive sentence {0}")]
    NoReceivingScd(WindowId),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("model is inconsistent: {0}")]
    Inconsistent(String),
    #[error("unsupported model file: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
