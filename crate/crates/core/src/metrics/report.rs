//! Per-run metric reports, seed aggregation and their tabular file forms.

use serde::{Deserialize, Serialize};

use super::classification::accuracy_f1;
use super::ece::{ece, reliability_bins, EceConfig};
use super::nce::nce;
use super::ranking::{auprc, auroc};
use super::reject::RejectPoint;
use crate::error::Result;
use crate::methods::{confidences, correctness, PredictionRecord};
use crate::table::{fmt_f64, fmt_opt, Table};

/// Classification and confidence metrics for one method/seed.
///
/// NCE, AUROC and AUPRC are `None` when the correctness targets are all equal
/// (every prediction right, or every one wrong).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub seed: u64,
    pub n: usize,
    pub accuracy: f64,
    pub f1: f64,
    pub ece: f64,
    pub nce: Option<f64>,
    pub auroc: Option<f64>,
    pub auprc: Option<f64>,
}

pub fn compute_report(
    records: &[PredictionRecord],
    ece_cfg: &EceConfig,
    method: &str,
    seed: u64,
) -> Result<MetricsReport> {
    let (accuracy, f1) = accuracy_f1(records)?;
    let conf = confidences(records);
    let correct = correctness(records);
    Ok(MetricsReport {
        method: method.to_string(),
        seed,
        n: records.len(),
        accuracy,
        f1,
        ece: ece(records, ece_cfg)?,
        nce: nce(&conf, &correct).ok(),
        auroc: auroc(&conf, &correct).ok(),
        auprc: auprc(&conf, &correct).ok(),
    })
}

/// Raw and PWLM-calibrated metrics side by side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub raw: MetricsReport,
    pub calibrated: MetricsReport,
}

pub const METRIC_COLUMNS: [&str; 11] = [
    "acc",
    "f1",
    "ece_raw",
    "ece_pwlm",
    "nce_raw",
    "nce_pwlm",
    "auroc",
    "auroc_pwlm",
    "auprc",
    "auprc_pwlm",
    "n",
];

impl EvaluationRow {
    pub fn values(&self) -> [Option<f64>; 11] {
        let (r, c) = (&self.raw, &self.calibrated);
        [
            Some(r.accuracy),
            Some(r.f1),
            Some(r.ece),
            Some(c.ece),
            r.nce,
            c.nce,
            r.auroc,
            c.auroc,
            r.auprc,
            c.auprc,
            Some(r.n as f64),
        ]
    }
}

/// Mean and standard error (sample standard deviation over `√n`) of the
/// defined values; `None` when no value, or fewer than two for the error.
pub fn mean_stderr(values: &[Option<f64>]) -> (Option<f64>, Option<f64>) {
    let xs: Vec<f64> = values.iter().flatten().copied().collect();
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

/// One row per (method, seed), then `mean` and `stderr` rows per method.
pub fn metrics_table(rows: &[EvaluationRow], comments: &[String]) -> Table {
    let mut header = vec!["method", "seed"];
    header.extend(METRIC_COLUMNS);
    let mut table = Table::new(header).with_comments(comments);
    let mut methods: Vec<&str> = Vec::new();
    for row in rows {
        if !methods.contains(&row.raw.method.as_str()) {
            methods.push(&row.raw.method);
        }
    }
    for method in methods {
        let mine: Vec<&EvaluationRow> = rows.iter().filter(|r| r.raw.method == method).collect();
        for row in &mine {
            let mut cells = vec![method.to_string(), row.raw.seed.to_string()];
            cells.extend(row.values().iter().map(|v| fmt_opt(*v)));
            table.push(cells);
        }
        let stats: Vec<(Option<f64>, Option<f64>)> = (0..METRIC_COLUMNS.len())
            .map(|c| mean_stderr(&mine.iter().map(|r| r.values()[c]).collect::<Vec<_>>()))
            .collect();
        let mut mean_row = vec![method.to_string(), "mean".to_string()];
        mean_row.extend(stats.iter().map(|s| fmt_opt(s.0)));
        table.push(mean_row);
        let mut se_row = vec![method.to_string(), "stderr".to_string()];
        se_row.extend(stats.iter().map(|s| fmt_opt(s.1)));
        table.push(se_row);
    }
    table
}

/// Reliability-diagram points for one prediction set.
pub fn reliability_rows(
    table: &mut Table,
    records: &[PredictionRecord],
    num_bins: usize,
    method: &str,
    seed: u64,
    stage: &str,
) -> Result<()> {
    for bin in reliability_bins(&confidences(records), &correctness(records), num_bins)? {
        table.push(vec![
            method.to_string(),
            seed.to_string(),
            stage.to_string(),
            bin.index.to_string(),
            fmt_f64(bin.lower),
            fmt_f64(bin.upper),
            bin.count.to_string(),
            fmt_f64(bin.mean_confidence),
            fmt_f64(bin.accuracy),
        ]);
    }
    Ok(())
}

pub fn reliability_table(comments: &[String]) -> Table {
    Table::new([
        "method",
        "seed",
        "stage",
        "bin",
        "lower",
        "upper",
        "count",
        "mean_confidence",
        "accuracy",
    ])
    .with_comments(comments)
}

pub fn reject_table(comments: &[String]) -> Table {
    Table::new([
        "method",
        "seed",
        "stage",
        "threshold",
        "coverage",
        "retained",
        "f1",
        "acc",
    ])
    .with_comments(comments)
}

pub fn push_reject_rows(
    table: &mut Table,
    points: &[RejectPoint],
    method: &str,
    seed: &str,
    stage: &str,
) {
    for p in points {
        table.push(vec![
            method.to_string(),
            seed.to_string(),
            stage.to_string(),
            fmt_f64(p.threshold),
            fmt_f64(p.coverage),
            p.retained.to_string(),
            fmt_opt(p.f1),
            fmt_opt(p.accuracy),
        ]);
    }
}
