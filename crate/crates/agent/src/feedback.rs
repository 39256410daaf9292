//! Explicit and implicit feedback the agent perceives.

use scd_core::{FactoredRelation, FreshReport, RefreshReport, RelationTarget, ScdId, WindowId};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all_fields = "camelCase")]
pub enum FeedbackEvent {
    /// The sentence should not be in the corpus at all.
    FaultySentence {
        window_id: WindowId,
    },
    /// The sentence does not belong to its SCD.
    FaultyAssociation {
        window_id: WindowId,
        #[serde(default)]
        scd_id: Option<ScdId>,
    },
    /// Go back to `version`, or to the version before the current one.
    RevertChanges {
        #[serde(default)]
        version: Option<u64>,
    },
    NewQuery,
    SelectScd {
        scd_id: ScdId,
    },
    SelectSentence {
        window_id: WindowId,
    },
    AddData(AddData),
}

impl FeedbackEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            FeedbackEvent::FaultySentence { .. } => "FaultySentence",
            FeedbackEvent::FaultyAssociation { .. } => "FaultyAssociation",
            FeedbackEvent::RevertChanges { .. } => "RevertChanges",
            FeedbackEvent::NewQuery => "NewQuery",
            FeedbackEvent::SelectScd { .. } => "SelectScd",
            FeedbackEvent::SelectSentence { .. } => "SelectSentence",
            FeedbackEvent::AddData(_) => "AddData",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NewDocument {
    pub doc_id: String,
    pub text: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManualScd {
    pub windows: Vec<WindowId>,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub relations: Vec<FactoredRelation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManualRelation {
    pub scd: ScdId,
    pub kind: String,
    pub target: RelationTarget,
    #[serde(default = "unit_factor")]
    pub factor: f64,
}

fn unit_factor() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AddData {
    #[serde(default)]
    pub documents: Vec<NewDocument>,
    /// SCD count for the new documents; scaled from the model when absent.
    #[serde(default)]
    pub target_k: Option<usize>,
    #[serde(default)]
    pub manual_scds: Vec<ManualScd>,
    #[serde(default)]
    pub relations: Vec<ManualRelation>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AddDataReport {
    pub documents: Vec<String>,
    pub windows: Vec<WindowId>,
    pub created_scds: Vec<ScdId>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FeedbackOutcome {
    pub kind: String,
    /// Model version after the event.
    pub version: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fresh: Option<FreshReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refresh: Option<RefreshReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restored_from: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub added: Option<AddDataReport>,
}
