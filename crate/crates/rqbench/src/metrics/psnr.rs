//! Peak signal-to-noise ratio with per-frame dB pooling.

use crate::media::{Plane, VideoSequence};

use super::{check_same_geometry, MetricError, MetricScore};

/// Which planes enter the per-frame MSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsnrMode {
    /// Luma plane only (the reporting default).
    Luma,
    /// Plane MSEs pooled 6:1:1 (Y:U:V) before the log.
    Yuv611,
}

/// Values above this are clipped; zero-MSE frames report exactly this.
const PSNR_CAP_DB: f64 = 100.0;

fn plane_sse(a: &Plane, b: &Plane) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

fn mse(a: &Plane, b: &Plane) -> f64 {
    plane_sse(a, b) / a.data.len() as f64
}

/// Per-frame PSNR = 10·log10(MAX²/MSE), arithmetic mean over frames,
/// capped at 100 dB.
pub fn psnr(
    reference: &VideoSequence,
    distorted: &VideoSequence,
    mode: PsnrMode,
) -> Result<MetricScore, MetricError> {
    check_same_geometry(reference, distorted)?;
    let max = reference.frames[0].sample_max() as f64;
    let per_frame = reference
        .frames
        .iter()
        .zip(&distorted.frames)
        .map(|(a, b)| {
            let m = match mode {
                PsnrMode::Luma => mse(&a.plane_y, &b.plane_y),
                PsnrMode::Yuv611 => {
                    (6.0 * mse(&a.plane_y, &b.plane_y)
                        + mse(&a.plane_u, &b.plane_u)
                        + mse(&a.plane_v, &b.plane_v))
                        / 8.0
                }
            };
            if m == 0.0 {
                PSNR_CAP_DB
            } else {
                (10.0 * (max * max / m).log10()).min(PSNR_CAP_DB)
            }
        })
        .collect();
    Ok(MetricScore::pooled("psnr", per_frame))
}
