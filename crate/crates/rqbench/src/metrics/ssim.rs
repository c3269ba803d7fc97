//! Structural similarity, single- and multi-scale, on the luma plane.
//!
//! Fixed harness convention: 8×8 windows at stride 4, population moments,
//! stabilizers C1 = (0.01·MAX)², C2 = (0.03·MAX)². MS-SSIM uses the
//! standard five scales with 2×2 box downsampling between them.

use crate::media::{Plane, VideoSequence};

use super::{check_same_geometry, MetricError, MetricScore};

const WINDOW: usize = 8;
const STRIDE: usize = 4;

/// Per-scale exponents of the standard five-scale MS-SSIM.
pub const MS_SSIM_EXPONENTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

struct FloatPlane {
    w: usize,
    h: usize,
    data: Vec<f64>,
}

impl FloatPlane {
    fn from_plane(p: &Plane) -> Self {
        FloatPlane {
            w: p.width,
            h: p.height,
            data: p.data.iter().map(|&v| v as f64).collect(),
        }
    }

    /// 2×2 box average, floor-halved dims (trailing odd row/col dropped).
    fn halve(&self) -> Self {
        let (w, h) = (self.w / 2, self.h / 2);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let i = 2 * y * self.w + 2 * x;
                data.push((self.data[i] + self.data[i + 1] + self.data[i + self.w] + self.data[i + self.w + 1]) / 4.0);
            }
        }
        FloatPlane { w, h, data }
    }
}

/// Mean SSIM and mean contrast·structure over all windows of one plane pair.
fn ssim_and_cs(a: &FloatPlane, b: &FloatPlane, max: f64) -> (f64, f64) {
    debug_assert!(a.w >= WINDOW && a.h >= WINDOW);
    let c1 = (0.01 * max) * (0.01 * max);
    let c2 = (0.03 * max) * (0.03 * max);
    let n = (WINDOW * WINDOW) as f64;
    let mut ssim_sum = 0.0;
    let mut cs_sum = 0.0;
    let mut windows = 0u64;
    let mut y = 0;
    while y + WINDOW <= a.h {
        let mut x = 0;
        while x + WINDOW <= a.w {
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for dy in 0..WINDOW {
                let row = (y + dy) * a.w + x;
                for dx in 0..WINDOW {
                    let va = a.data[row + dx];
                    let vb = b.data[row + dx];
                    sx += va;
                    sy += vb;
                    sxx += va * va;
                    syy += vb * vb;
                    sxy += va * vb;
                }
            }
            let mx = sx / n;
            let my = sy / n;
            let vx = sxx / n - mx * mx;
            let vy = syy / n - my * my;
            let cov = sxy / n - mx * my;
            let lum = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
            let cs = (2.0 * cov + c2) / (vx + vy + c2);
            ssim_sum += lum * cs;
            cs_sum += cs;
            windows += 1;
            x += STRIDE;
        }
        y += STRIDE;
    }
    (ssim_sum / windows as f64, cs_sum / windows as f64)
}

fn check_window_fits(seq: &VideoSequence) -> Result<(), MetricError> {
    if (seq.width() as usize) < WINDOW || (seq.height() as usize) < WINDOW {
        return Err(MetricError::FrameTooSmall {
            need: format!("{WINDOW}x{WINDOW} luma"),
            got: format!("{}x{}", seq.width(), seq.height()),
        });
    }
    Ok(())
}

/// Single-scale SSIM, pooled per frame and then across frames.
pub fn ssim(
    reference: &VideoSequence,
    distorted: &VideoSequence,
) -> Result<MetricScore, MetricError> {
    check_same_geometry(reference, distorted)?;
    check_window_fits(reference)?;
    let max = reference.frames[0].sample_max() as f64;
    let per_frame = reference
        .frames
        .iter()
        .zip(&distorted.frames)
        .map(|(a, b)| {
            ssim_and_cs(
                &FloatPlane::from_plane(&a.plane_y),
                &FloatPlane::from_plane(&b.plane_y),
                max,
            )
            .0
        })
        .collect();
    Ok(MetricScore::pooled("ssim", per_frame))
}

/// MS-SSIM with caller-chosen per-scale exponents; `exponents.len()` sets
/// the scale count. Every scale contributes its contrast·structure mean;
/// the luminance factor joins at the coarsest scale of a multi-scale run,
/// so a single-scale configuration reduces to the contrast·structure term
/// alone.
pub fn ms_ssim_with_exponents(
    reference: &VideoSequence,
    distorted: &VideoSequence,
    exponents: &[f64],
) -> Result<MetricScore, MetricError> {
    assert!(!exponents.is_empty(), "at least one scale");
    check_same_geometry(reference, distorted)?;
    // Every scale must still fit a window after floor-halving.
    let scales = exponents.len() as u32;
    let (mut w, mut h) = (reference.width() as usize, reference.height() as usize);
    for _ in 1..scales {
        w /= 2;
        h /= 2;
    }
    if w < WINDOW || h < WINDOW {
        return Err(MetricError::FrameTooSmall {
            need: format!("≥{0}x{0} luma at the coarsest of {scales} scales", WINDOW),
            got: format!(
                "{}x{} ({}x{} at scale {scales})",
                reference.width(),
                reference.height(),
                w,
                h
            ),
        });
    }

    let max = reference.frames[0].sample_max() as f64;
    let per_frame = reference
        .frames
        .iter()
        .zip(&distorted.frames)
        .map(|(fa, fb)| {
            let mut a = FloatPlane::from_plane(&fa.plane_y);
            let mut b = FloatPlane::from_plane(&fb.plane_y);
            let mut score = 1.0f64;
            for (scale, &exp) in exponents.iter().enumerate() {
                if scale > 0 {
                    a = a.halve();
                    b = b.halve();
                }
                let (ssim_mean, cs_mean) = ssim_and_cs(&a, &b, max);
                let last = scale + 1 == exponents.len();
                let term = if last && exponents.len() > 1 {
                    ssim_mean
                } else {
                    cs_mean
                };
                // Negative means can only arise from adversarial inputs;
                // clamp so fractional powers stay real.
                score *= term.max(0.0).powf(exp);
            }
            score
        })
        .collect();
    Ok(MetricScore::pooled("msssim", per_frame))
}

/// Standard five-scale MS-SSIM. Luma must survive four floor-halvings with
/// an 8×8 window intact, so dims of at least 128×128 are required.
pub fn ms_ssim(
    reference: &VideoSequence,
    distorted: &VideoSequence,
) -> Result<MetricScore, MetricError> {
    ms_ssim_with_exponents(reference, distorted, &MS_SSIM_EXPONENTS)
}
