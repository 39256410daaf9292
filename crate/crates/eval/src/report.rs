//! CSV tables and serialized models for a sweep.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::workflow::{MetricsRow, WorkflowOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionRow {
    #[serde(rename = "K")]
    pub k: usize,
    /// `avg_fb - avg_rb`
    pub reduction: f64,
}

impl From<&MetricsRow> for ReductionRow {
    fn from(m: &MetricsRow) -> Self {
        Self {
            k: m.k,
            reduction: m.avg_fb - m.avg_rb,
        }
    }
}

pub const METRICS_FILE: &str = "metrics.csv";
pub const REDUCTION_FILE: &str = "reduction.csv";

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tables(dir: &Path, rows: &[MetricsRow]) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join(METRICS_FILE), rows)?;
    write_csv(
        &dir.join(REDUCTION_FILE),
        rows.iter().map(ReductionRow::from),
    )?;
    Ok(())
}

/// Writes `models/k{K}_{faulty,refreshed,baseline}.json`.
pub fn write_models(dir: &Path, outcome: &WorkflowOutcome) -> Result<()> {
    let models = dir.join("models");
    fs::create_dir_all(&models)?;
    let k = outcome.metrics.k;
    for (name, model) in [
        ("faulty", &outcome.faulty),
        ("refreshed", &outcome.refreshed),
        ("baseline", &outcome.baseline),
    ] {
        model.write_to(models.join(format!("k{k}_{name}.json")))?;
    }
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<MetricsRow>, _>>()?;
    Ok(rows)
}

pub fn read_reduction(path: &Path) -> Result<Vec<ReductionRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<ReductionRow>, _>>()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            MetricsRow {
                k: 5,
                pd_fb: 0.5,
                pd_fr: 0.25,
                pd_rb: 0.75,
                avg_fb: 0.3,
                avg_fr: 0.2,
                avg_rb: 0.1,
            },
            MetricsRow {
                k: 9,
                pd_fb: 0.0,
                pd_fr: 0.0,
                pd_rb: 0.0,
                avg_fb: 0.0,
                avg_fr: 0.0,
                avg_rb: 0.0,
            },
        ];
        write_tables(dir.path(), &rows).unwrap();
        assert_eq!(read_metrics(&dir.path().join(METRICS_FILE)).unwrap(), rows);
        let header = fs::read_to_string(dir.path().join(METRICS_FILE)).unwrap();
        assert!(header.starts_with("K,pd_fb,pd_fr,pd_rb,avg_fb,avg_fr,avg_rb\n"));
        let red = read_reduction(&dir.path().join(REDUCTION_FILE)).unwrap();
        assert_eq!(red[0].k, 5);
        assert!((red[0].reduction - 0.2).abs() < 1e-15);
    }
}
