//! Subjective content descriptions and their additional data.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{ScdId, WindowId};

/// Relation kind under which foreign labels are attached to an SCD.
pub const LABEL_HINT_KIND: &str = "label-hint";

/// What a relation points at. Relations target SCDs, but may point at
/// sentences after the SCD they referenced was disassembled.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RelationTarget {
    Scd(ScdId),
    Window(WindowId),
    Label(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactoredRelation {
    pub factor: f64,
    pub kind: String,
    pub target: RelationTarget,
}

impl FactoredRelation {
    pub fn new(factor: f64, kind: impl Into<String>, target: RelationTarget) -> Result<Self> {
        check_factor(factor)?;
        Ok(Self {
            factor,
            kind: kind.into(),
            target,
        })
    }

    pub fn with_factor(&self, factor: f64) -> Self {
        Self {
            factor,
            ..self.clone()
        }
    }

    /// Exact equality including the bit pattern of the factor.
    pub fn same_as(&self, other: &Self) -> bool {
        self.factor.to_bits() == other.factor.to_bits()
            && self.kind == other.kind
            && self.target == other.target
    }
}

pub(crate) fn check_factor(factor: f64) -> Result<()> {
    if factor > 0.0 && factor <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidFactor(factor))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub text: String,
    pub factor: f64,
}

impl Label {
    pub fn primary(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            factor: 1.0,
        }
    }
}

/// The additional data `C` of an SCD: an optional label and factored relations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdditionalData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(default)]
    pub relations: Vec<FactoredRelation>,
}

impl AdditionalData {
    pub fn is_empty(&self) -> bool {
        self.label.is_none() && self.relations.is_empty()
    }

    /// Set-union insert: an identical `(factor, relation)` tuple is stored once.
    pub fn add_relation(&mut self, relation: FactoredRelation) -> bool {
        if self.relations.iter().any(|r| r.same_as(&relation)) {
            return false;
        }
        self.relations.push(relation);
        true
    }

    pub fn add_preserved(&mut self, item: &Preserved) -> bool {
        self.add_relation(item.as_relation())
    }

    /// Rewrites relations targeting `from` to one relation per `to` target.
    pub(crate) fn retarget(&mut self, from: &RelationTarget, to: &[RelationTarget]) {
        if !self.relations.iter().any(|r| &r.target == from) {
            return;
        }
        let old = std::mem::take(&mut self.relations);
        for r in old {
            if &r.target == from {
                for t in to {
                    self.add_relation(FactoredRelation {
                        target: t.clone(),
                        ..r.clone()
                    });
                }
            } else {
                self.add_relation(r);
            }
        }
    }
}

/// An item shifted from an SCD onto one of its sentences, with its factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type")]
pub enum Preserved {
    Label(Label),
    Relation(FactoredRelation),
}

impl Preserved {
    pub fn factor(&self) -> f64 {
        match self {
            Preserved::Label(l) => l.factor,
            Preserved::Relation(r) => r.factor,
        }
    }

    pub fn kind(&self) -> &str {
        match self {
            Preserved::Label(_) => LABEL_HINT_KIND,
            Preserved::Relation(r) => &r.kind,
        }
    }

    pub fn scaled(&self, by: f64) -> Preserved {
        match self {
            Preserved::Label(l) => Preserved::Label(Label {
                text: l.text.clone(),
                factor: l.factor * by,
            }),
            Preserved::Relation(r) => Preserved::Relation(r.with_factor(r.factor * by)),
        }
    }

    /// The form in which this item is stored in an SCD's additional data:
    /// labels become `label-hint` relations.
    pub fn as_relation(&self) -> FactoredRelation {
        match self {
            Preserved::Label(l) => FactoredRelation {
                factor: l.factor,
                kind: LABEL_HINT_KIND.to_owned(),
                target: RelationTarget::Label(l.text.clone()),
            },
            Preserved::Relation(r) => r.clone(),
        }
    }

    pub(crate) fn retarget(&self, from: &RelationTarget, to: &[RelationTarget]) -> Vec<Preserved> {
        match self {
            Preserved::Relation(r) if &r.target == from => to
                .iter()
                .map(|t| {
                    Preserved::Relation(FactoredRelation {
                        target: t.clone(),
                        ..r.clone()
                    })
                })
                .collect(),
            other => vec![other.clone()],
        }
    }
}

/// An SCD `t`: additional data plus the set of referenced sentences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scd {
    pub id: ScdId,
    #[serde(default)]
    pub data: AdditionalData,
    pub windows: BTreeSet<WindowId>,
}

impl Scd {
    pub fn new(id: ScdId, windows: impl IntoIterator<Item = WindowId>) -> Self {
        Self {
            id,
            data: AdditionalData::default(),
            windows: windows.into_iter().collect(),
        }
    }

    pub fn with_data(mut self, data: AdditionalData) -> Self {
        self.data = data;
        self
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_bounds() {
        assert!(FactoredRelation::new(1.0, "homonym", RelationTarget::Scd(ScdId(1))).is_ok());
        assert!(FactoredRelation::new(0.0, "homonym", RelationTarget::Scd(ScdId(1))).is_err());
        assert!(FactoredRelation::new(1.5, "homonym", RelationTarget::Scd(ScdId(1))).is_err());
    }

    #[test]
    fn union_ignores_identical_tuples() {
        let mut data = AdditionalData::default();
        let r = FactoredRelation::new(0.5, "k", RelationTarget::Scd(ScdId(2))).unwrap();
        assert!(data.add_relation(r.clone()));
        assert!(!data.add_relation(r.clone()));
        assert!(data.add_relation(r.with_factor(0.25)));
        assert_eq!(data.relations.len(), 2);
    }

    #[test]
    fn retarget_fans_out() {
        let mut data = AdditionalData::default();
        data.add_relation(FactoredRelation::new(1.0, "k", RelationTarget::Scd(ScdId(7))).unwrap());
        data.add_relation(FactoredRelation::new(0.5, "j", RelationTarget::Scd(ScdId(8))).unwrap());
        let to: Vec<_> = (0..3)
            .map(|w| RelationTarget::Window(WindowId(w)))
            .collect();
        data.retarget(&RelationTarget::Scd(ScdId(7)), &to);
        assert_eq!(data.relations.len(), 4);
        assert_eq!(
            data.relations
                .iter()
                .filter(|r| matches!(r.target, RelationTarget::Window(_)))
                .count(),
            3
        );
        assert!(data
            .relations
            .iter()
            .all(|r| r.kind != "k" || r.factor == 1.0));
    }

    #[test]
    fn label_stored_as_hint() {
        let p = Preserved::Label(Label::primary("x y"));
        let r = p.scaled(0.5).as_relation();
        assert_eq!(r.kind, LABEL_HINT_KIND);
        assert_eq!(r.factor, 0.5);
        assert_eq!(r.target, RelationTarget::Label("x y".into()));
    }
}
