//! Evaluation of refreshed SCD models against a baseline: inject faulty
//! sentence pairs, correct them with refresh, and compare row
//! distributions with the Hellinger distance.

pub mod align;
pub mod error;
pub mod hellinger;
pub mod metrics;
pub mod pairs;
pub mod plot;
pub mod report;
pub mod synthetic;
pub mod workflow;

pub use align::{align_models, distance_vector, Aligned};
pub use error::{EvalError, Result};
pub use hellinger::{hellinger_row, hellinger_sparse};
pub use metrics::{avg_distance, proportion_diff, EPSILON};
pub use pairs::{choose_faulty_pairs, DEFAULT_DISSIMILARITY_CAP};
pub use synthetic::{synthetic_corpus, SyntheticSpec};
pub use workflow::{run_with_pairs, run_workflow, MetricsRow, WorkflowConfig, WorkflowOutcome};
