//! Classification and confidence-quality metrics.

mod classification;
mod ece;
mod nce;
mod ranking;
mod reject;
mod report;

pub use classification::{accuracy_f1, accuracy_f1_labels, POSITIVE_CLASS};
pub use ece::{bin_index, ece, ece_scores, reliability_bins, EceConfig, ReliabilityBin};
pub use nce::{nce, NCE_CLAMP};
pub use ranking::{auprc, auroc};
pub use reject::{reject_sweep, RejectPoint, DEFAULT_THRESHOLDS};
pub use report::{
    compute_report, mean_stderr, metrics_table, push_reject_rows, reject_table, reliability_rows,
    reliability_table, EvaluationRow, MetricsReport, METRIC_COLUMNS,
};
