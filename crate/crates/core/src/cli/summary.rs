use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::log::RunLog;
use crate::graph::DiffusionModel;
use crate::imm::Strategy;

pub const CSV_HEADER: [&str; 6] = [
    "Dataset",
    "Speedup",
    "EfficientIMM Time (s)",
    "Ripples Time (s)",
    "Ripples Best #Threads",
    "EfficientIMM Best #Threads",
];

/// One CSV row: best fused and best baseline time for a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    #[serde(rename = "Dataset")]
    pub dataset: String,
    #[serde(rename = "Speedup")]
    pub speedup: f64,
    #[serde(rename = "EfficientIMM Time (s)")]
    pub fused_time: f64,
    #[serde(rename = "Ripples Time (s)")]
    pub baseline_time: f64,
    #[serde(rename = "Ripples Best #Threads")]
    pub baseline_workers: usize,
    #[serde(rename = "EfficientIMM Best #Threads")]
    pub fused_workers: usize,
}

#[derive(Default)]
struct Best {
    fused: Option<(f64, usize)>,
    baseline: Option<(f64, usize)>,
}

fn keep_min(slot: &mut Option<(f64, usize)>, time: f64, workers: usize) {
    if slot.is_none_or(|(t, w)| time < t || (time == t && workers < w)) {
        *slot = Some((time, workers));
    }
}

/// Rows per model. Datasets missing one of the two strategies are reported
/// in the second return value and left out.
pub fn speedup_rows(logs: &[RunLog]) -> (BTreeMap<DiffusionModel, Vec<SpeedupRow>>, Vec<String>) {
    let mut best: BTreeMap<(DiffusionModel, String), Best> = BTreeMap::new();
    for log in logs {
        let b = best.entry((log.model, log.dataset.clone())).or_default();
        let slot = match log.strategy {
            Strategy::Fused => &mut b.fused,
            Strategy::Baseline => &mut b.baseline,
        };
        keep_min(slot, log.timings.total, log.workers);
    }
    let mut rows: BTreeMap<DiffusionModel, Vec<SpeedupRow>> = BTreeMap::new();
    let mut incomplete = Vec::new();
    for ((model, dataset), b) in best {
        match (b.fused, b.baseline) {
            (Some((ft, fw)), Some((bt, bw))) => rows.entry(model).or_default().push(SpeedupRow {
                speedup: bt / ft,
                dataset,
                fused_time: ft,
                baseline_time: bt,
                baseline_workers: bw,
                fused_workers: fw,
            }),
            _ => incomplete.push(format!("{dataset} ({model})")),
        }
    }
    (rows, incomplete)
}

pub fn write_csv(path: &Path, rows: &[SpeedupRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    w.flush()?;
    Ok(())
}
