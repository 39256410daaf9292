//! Response and select counters per SCD and per sentence.

use std::collections::BTreeMap;

use scd_core::{ScdId, WindowId};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CounterKey {
    Scd(ScdId),
    Sentence(WindowId),
}

/// `rc` counts how often an item was part of a response, `sc` how often
/// the user selected it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub rc: u64,
    pub sc: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CounterStore {
    counts: BTreeMap<CounterKey, Counts>,
}

impl CounterStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: CounterKey) -> Counts {
        self.counts.get(&key).copied().unwrap_or_default()
    }

    pub fn scd(&self, id: ScdId) -> Counts {
        self.get(CounterKey::Scd(id))
    }

    pub fn sentence(&self, id: WindowId) -> Counts {
        self.get(CounterKey::Sentence(id))
    }

    pub fn respond(&mut self, key: CounterKey) {
        self.counts.entry(key).or_default().rc += 1;
    }

    /// Increments `sc`. A selection of an item never seen in a response also
    /// counts as a response so that `sc <= rc` keeps holding.
    pub fn select(&mut self, key: CounterKey) {
        let c = self.counts.entry(key).or_default();
        c.sc += 1;
        if c.sc > c.rc {
            c.rc = c.sc;
        }
    }

    pub fn set(&mut self, key: CounterKey, counts: Counts) {
        if counts == Counts::default() {
            self.counts.remove(&key);
        } else {
            self.counts.insert(key, counts);
        }
    }

    pub fn reset(&mut self, key: CounterKey) {
        self.counts.remove(&key);
    }

    pub fn clear(&mut self) {
        self.counts.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = (CounterKey, Counts)> + '_ {
        self.counts.iter().map(|(k, c)| (*k, *c))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScdCounter {
    pub scd_id: ScdId,
    #[serde(flatten)]
    pub counts: Counts,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SentenceCounter {
    pub window_id: WindowId,
    #[serde(flatten)]
    pub counts: Counts,
}

/// Wire form of the counter store.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSnapshot {
    pub scds: Vec<ScdCounter>,
    pub sentences: Vec<SentenceCounter>,
}

impl From<&CounterStore> for CounterSnapshot {
    fn from(store: &CounterStore) -> Self {
        let mut out = CounterSnapshot::default();
        for (k, counts) in store.iter() {
            match k {
                CounterKey::Scd(scd_id) => out.scds.push(ScdCounter { scd_id, counts }),
                CounterKey::Sentence(window_id) => {
                    out.sentences.push(SentenceCounter { window_id, counts })
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn select_clamps_response_count() {
        let mut c = CounterStore::new();
        let k = CounterKey::Scd(ScdId(1));
        c.select(k);
        assert_eq!(c.get(k), Counts { rc: 1, sc: 1 });
        c.respond(k);
        c.respond(k);
        c.select(k);
        assert_eq!(c.get(k), Counts { rc: 3, sc: 2 });
        c.reset(k);
        assert_eq!(c.get(k), Counts::default());
        assert!(c.is_empty());
    }

    #[test]
    fn wire_form() {
        let mut c = CounterStore::new();
        c.respond(CounterKey::Sentence(WindowId(4)));
        c.select(CounterKey::Scd(ScdId(2)));
        let json = serde_json::to_value(CounterSnapshot::from(&c)).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "scds": [{"scdId": 2, "rc": 1, "sc": 1}],
                "sentences": [{"windowId": 4, "rc": 1, "sc": 0}]
            })
        );
    }
}
