//! Objective-metric validation against subjective data: weighted
//! logistic fitting, the four correlation statistics, and the per-group
//! metric suite report.

mod fit;
mod stats;
mod suite;

pub use fit::{logistic_fit, logistic_fit_weighted, FittedModel};
pub use stats::{average_ranks, correlation_stats, pearson, CorrelationStats};
pub use suite::{
    evaluate_metric_suite, GroupReport, MetricObservation, MetricRow, MetricSuiteReport,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorrelationError {
    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {need} points, got {got}")]
    FewPoints { need: usize, got: usize },
    #[error("metric column is constant; a monotone fit carries no information")]
    ConstantMetric,
    #[error("weights must be positive and finite")]
    BadWeight,
    #[error(
        "join failure: {} points lack DMOS, {} DMOS records lack points{}",
        missing_dmos.len(),
        missing_points.len(),
        render_join_detail(missing_dmos, missing_points)
    )]
    JoinFailure { missing_dmos: Vec<String>, missing_points: Vec<String> },
}

fn render_join_detail(missing_dmos: &[String], missing_points: &[String]) -> String {
    let mut out = String::new();
    if !missing_dmos.is_empty() {
        out.push_str(&format!("; no DMOS for [{}]", missing_dmos.join(", ")));
    }
    if !missing_points.is_empty() {
        out.push_str(&format!("; no points for [{}]", missing_points.join(", ")));
    }
    out
}
