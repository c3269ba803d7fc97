//! Spatial and temporal information descriptors, ITU-T P.910 convention.

use crate::media::{Plane, VideoSequence};

/// Content descriptors: SI from Sobel energy, TI from frame differences,
/// both max-pooled over the sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SITI {
    pub si: f64,
    pub ti: f64,
}

fn population_stdev(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut n = 0u64;
    let mut sum = 0.0;
    for v in values.clone() {
        n += 1;
        sum += v;
    }
    if n == 0 {
        return 0.0;
    }
    let mean = sum / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    var.sqrt()
}

/// Sobel gradient magnitudes over interior pixels (the 1-pixel border has
/// no full 3×3 neighborhood and is excluded).
fn sobel_magnitudes(p: &Plane) -> Vec<f64> {
    let (w, h) = (p.width, p.height);
    if w < 3 || h < 3 {
        return Vec::new();
    }
    let at = |x: usize, y: usize| p.data[y * w + x] as f64;
    let mut out = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let gx = at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x - 1, y)
                - at(x - 1, y + 1);
            let gy = at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x, y - 1)
                - at(x + 1, y - 1);
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    out
}

/// SI = max over frames of stdev(Sobel(luma)); TI = max over consecutive
/// frame pairs of stdev(luma difference); single-frame sequences have TI 0.
pub fn si_ti(seq: &VideoSequence) -> SITI {
    let si = seq
        .frames
        .iter()
        .map(|f| population_stdev(sobel_magnitudes(&f.plane_y).into_iter()))
        .fold(0.0, f64::max);
    let ti = seq
        .frames
        .windows(2)
        .map(|pair| {
            let a = &pair[0].plane_y;
            let b = &pair[1].plane_y;
            let diffs: Vec<f64> = a
                .data
                .iter()
                .zip(&b.data)
                .map(|(&x, &y)| y as f64 - x as f64)
                .collect();
            population_stdev(diffs.into_iter())
        })
        .fold(0.0, f64::max);
    SITI { si, ti }
}
