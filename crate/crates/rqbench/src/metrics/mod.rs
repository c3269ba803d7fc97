//! Full-reference objective quality metrics (PSNR, SSIM, MS-SSIM), content
//! characterization (SI/TI), and an adapter for externally computed metrics
//! such as VMAF.

mod external;
mod psnr;
mod siti;
mod ssim;

pub use external::{external_metric, ExternalMetricTool, ExternalScore, StreamGeometry};
pub use psnr::{psnr, PsnrMode};
pub use siti::{si_ti, SITI};
pub use ssim::{ms_ssim, ms_ssim_with_exponents, ssim, MS_SSIM_EXPONENTS};

use thiserror::Error;

use crate::media::VideoSequence;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("sequence geometry mismatch: {expected} vs {got}")]
    GeometryMismatch { expected: String, got: String },
    #[error("frame {got} too small: {need} required")]
    FrameTooSmall { need: String, got: String },
    #[error("metric tool failed ({command}): {detail}")]
    ToolFailure { command: String, detail: String },
    #[error("cannot parse score with /{pattern}/ from tool output: {output:?}")]
    ParseFailure { pattern: String, output: String },
}

/// One pooled metric value, optionally with the per-frame values behind it.
/// The sequence value is always the arithmetic mean of `per_frame` when the
/// list is present.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricScore {
    pub metric_id: String,
    pub value: f64,
    pub per_frame: Option<Vec<f64>>,
}

impl MetricScore {
    /// Pools per-frame values by arithmetic mean.
    pub fn pooled(metric_id: impl Into<String>, per_frame: Vec<f64>) -> Self {
        assert!(!per_frame.is_empty(), "no frames to pool");
        let value = per_frame.iter().sum::<f64>() / per_frame.len() as f64;
        MetricScore {
            metric_id: metric_id.into(),
            value,
            per_frame: Some(per_frame),
        }
    }

    /// Wraps an already-pooled value (external tools report only this).
    pub fn scalar(metric_id: impl Into<String>, value: f64) -> Self {
        MetricScore {
            metric_id: metric_id.into(),
            value,
            per_frame: None,
        }
    }
}

pub(crate) fn check_same_geometry(
    a: &VideoSequence,
    b: &VideoSequence,
) -> Result<(), MetricError> {
    let tag = |s: &VideoSequence| {
        format!(
            "{} frames {}x{}@{}bit",
            s.frame_count(),
            s.width(),
            s.height(),
            s.bit_depth()
        )
    };
    if tag(a) != tag(b) {
        return Err(MetricError::GeometryMismatch {
            expected: tag(a),
            got: tag(b),
        });
    }
    Ok(())
}
