//! Rate-quality curve algebra: curve construction and averaging,
//! cross-resolution convex hulls with per-target selection, and
//! Bjøntegaard Delta measurements.

mod bd;
mod curve;
mod hull;

pub use bd::{bd_quality, bd_rate, fit_log_rate_poly, fit_quality_poly, BDResult, CubicFit};
pub use curve::{average_curves, build_rq_curve, select_per_target};
pub use hull::{upper_convex_hull, ConvexHull};

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RqError {
    #[error("need at least {need} points, got {got}")]
    FewPoints { need: usize, got: usize },
    #[error("duplicate bitrate {kbps} kbps in one curve")]
    DuplicateBitrate { kbps: f64 },
    #[error("bitrate must be positive, got {0}")]
    NonPositiveBitrate(f64),
    #[error("point {context} carries no score for metric {metric_id:?}")]
    MissingScore { metric_id: String, context: String },
    #[error("curve mixes {0}")]
    MixedCurve(String),
    #[error("points evaluated at different resolutions: {0} vs {1}")]
    MixedEvaluationResolution(String, String),
    #[error("no candidates to select from")]
    EmptyCandidates,
    #[error("curves misaligned: {0}")]
    MisalignedIndices(String),
    #[error("curves do not overlap on the {axis} axis")]
    EmptyOverlap { axis: &'static str },
    #[error("quality drops by {drop} along the curve, beyond the 0.5 tolerance")]
    NonMonotoneQuality { drop: f64 },
    #[error("polynomial fit is singular (degenerate quality spread)")]
    SingularFit,
}

/// One scored encode: where it came from, what it cost, how it scored.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub sequence: String,
    pub codec: String,
    pub encode_resolution: (u32, u32),
    /// Resolution the scores were computed at (the group's reference
    /// resolution when ladder encodes are up-sampled for comparison).
    pub evaluation_resolution: (u32, u32),
    pub qp: f64,
    pub bitrate_kbps: f64,
    pub scores: BTreeMap<String, f64>,
    pub rate_index: Option<String>,
    pub wall_seconds: Option<f64>,
}

impl RatePoint {
    /// Bare point for curve math; metadata fields get placeholder values.
    pub fn synthetic(bitrate_kbps: f64, metric_id: &str, quality: f64) -> Self {
        let mut scores = BTreeMap::new();
        scores.insert(metric_id.to_string(), quality);
        RatePoint {
            sequence: "synthetic".into(),
            codec: "synthetic".into(),
            encode_resolution: (0, 0),
            evaluation_resolution: (0, 0),
            qp: 0.0,
            bitrate_kbps,
            scores,
            rate_index: None,
            wall_seconds: None,
        }
    }

    pub fn score(&self, metric_id: &str) -> Option<f64> {
        self.scores.get(metric_id).copied()
    }

    pub fn encoded_pixels(&self) -> u64 {
        self.encode_resolution.0 as u64 * self.encode_resolution.1 as u64
    }

    pub(crate) fn require_score(&self, metric_id: &str) -> Result<f64, RqError> {
        self.score(metric_id).ok_or_else(|| RqError::MissingScore {
            metric_id: metric_id.to_string(),
            context: format!(
                "{}/{} {}x{} @ {} kbps",
                self.sequence,
                self.codec,
                self.encode_resolution.0,
                self.encode_resolution.1,
                self.bitrate_kbps
            ),
        })
    }
}

/// Points of one sequence/codec sorted by strictly increasing bitrate,
/// with a chosen quality axis.
#[derive(Debug, Clone)]
pub struct RQCurve {
    pub points: Vec<RatePoint>,
    pub metric_id: String,
    /// Non-fatal observations from construction (e.g. quality wobble).
    pub warnings: Vec<String>,
}

impl RQCurve {
    pub fn qualities(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.score(&self.metric_id).expect("validated at construction"))
            .collect()
    }

    pub fn bitrates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.bitrate_kbps).collect()
    }
}
