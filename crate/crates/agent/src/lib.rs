//! SCD-based retrieval agent: answers queries with ranked SCDs, perceives
//! explicit and implicit feedback, and keeps every model version.

pub mod agent;
pub mod config;
pub mod counters;
pub mod error;
pub mod feedback;
pub mod ifi;
pub mod query;
pub mod service;
pub mod snapshot;

pub use agent::{Agent, Thresholds};
pub use config::ServiceConfig;
pub use counters::{CounterKey, CounterStore, Counts};
pub use error::{AgentError, Result};
pub use feedback::{AddData, FeedbackEvent, FeedbackOutcome};
pub use ifi::{enhance_scds, fresh_condition, refresh_condition, IfiReport};
pub use query::{IrResponse, Query};
pub use snapshot::SnapshotStore;
