//! Lanczos-3 spatial resampling for building encoding ladders and for
//! up-sampling reconstructions back to the reference resolution.
//!
//! Separable two-pass filter (horizontal then vertical), pixel-center
//! coordinate mapping, edge handling by source clamping, per-output-pixel
//! weight renormalization. Accumulation is f64 throughout with a single
//! final round (half away from zero) and clamp, so results are bit-exact
//! across platforms.

use rayon::prelude::*;

use crate::media::{MediaError, Plane, VideoFrame, VideoSequence};

/// Lanczos-3 kernel: sinc(x)·sinc(x/3) for |x| < 3, else 0.
///
/// Integer offsets are snapped to exact 0/1 rather than evaluated through
/// `sin`, so identity plans degenerate to a delta kernel bit-exactly.
pub fn lanczos3_kernel(x: f64) -> f64 {
    let ax = x.abs();
    if ax >= 3.0 {
        return 0.0;
    }
    if ax == ax.trunc() {
        // x in {-2, -1, 0, 1, 2}; sinc zeros except the center tap.
        return if ax == 0.0 { 1.0 } else { 0.0 };
    }
    let pix = std::f64::consts::PI * x;
    let sinc = pix.sin() / pix;
    let pix3 = pix / 3.0;
    let sinc3 = pix3.sin() / pix3;
    sinc * sinc3
}

/// Filter taps for one output coordinate: contiguous source range starting
/// at `start` with normalized `weights` (clamped edge taps folded in).
#[derive(Debug, Clone)]
struct AxisTap {
    start: usize,
    weights: Vec<f64>,
}

fn axis_taps(src_n: usize, dst_n: usize) -> Vec<AxisTap> {
    let scale = src_n as f64 / dst_n as f64;
    (0..dst_n)
        .map(|o| {
            let center = (o as f64 + 0.5) * scale - 0.5;
            let left = (center - 3.0).ceil() as i64;
            let right = (center + 3.0).floor() as i64;
            let lo = left.clamp(0, src_n as i64 - 1);
            let hi = right.clamp(0, src_n as i64 - 1);
            let mut start = lo as usize;
            let mut weights = vec![0.0f64; (hi - lo + 1) as usize];
            let mut total = 0.0;
            for s in left..=right {
                let w = lanczos3_kernel(s as f64 - center);
                weights[(s.clamp(lo, hi) - lo) as usize] += w;
                total += w;
            }
            for w in &mut weights {
                *w /= total;
            }
            // Trim exact-zero edge taps so identity plans become pure deltas.
            while weights.len() > 1 && weights[0] == 0.0 {
                weights.remove(0);
                start += 1;
            }
            while weights.len() > 1 && *weights.last().unwrap() == 0.0 {
                weights.pop();
            }
            AxisTap { start, weights }
        })
        .collect()
}

/// Precomputed per-axis tap tables for one (source dims → target dims) pair.
///
/// Immutable and shareable; one plan resizes any number of planes with the
/// same geometry.
#[derive(Debug, Clone)]
pub struct ResamplePlan {
    pub source: (u32, u32),
    pub target: (u32, u32),
    x_taps: Vec<AxisTap>,
    y_taps: Vec<AxisTap>,
}

impl ResamplePlan {
    pub fn new(source: (u32, u32), target: (u32, u32)) -> Self {
        assert!(
            source.0 > 0 && source.1 > 0 && target.0 > 0 && target.1 > 0,
            "resample dims must be positive"
        );
        ResamplePlan {
            source,
            target,
            x_taps: axis_taps(source.0 as usize, target.0 as usize),
            y_taps: axis_taps(source.1 as usize, target.1 as usize),
        }
    }

    /// Two-pass resample returning raw f64 samples (row-major, target dims)
    /// before any rounding or clamping.
    pub fn apply_f64(&self, plane: &Plane) -> Vec<f64> {
        assert_eq!(
            (plane.width, plane.height),
            (self.source.0 as usize, self.source.1 as usize),
            "plane does not match plan source dims"
        );
        let (dst_w, dst_h) = (self.target.0 as usize, self.target.1 as usize);
        let src_h = plane.height;

        // Horizontal pass: src_h rows of dst_w samples.
        let mut mid = vec![0.0f64; src_h * dst_w];
        for y in 0..src_h {
            let row = plane.row(y);
            let out = &mut mid[y * dst_w..(y + 1) * dst_w];
            for (x, tap) in self.x_taps.iter().enumerate() {
                let mut acc = 0.0;
                for (k, &w) in tap.weights.iter().enumerate() {
                    acc += w * row[tap.start + k] as f64;
                }
                out[x] = acc;
            }
        }

        // Vertical pass.
        let mut dst = vec![0.0f64; dst_h * dst_w];
        for (y, tap) in self.y_taps.iter().enumerate() {
            let out = &mut dst[y * dst_w..(y + 1) * dst_w];
            for (k, &w) in tap.weights.iter().enumerate() {
                let src_row = &mid[(tap.start + k) * dst_w..(tap.start + k + 1) * dst_w];
                for (o, &s) in out.iter_mut().zip(src_row) {
                    *o += w * s;
                }
            }
        }
        dst
    }

    /// Resamples a plane and quantizes to `[0, sample_max]` with
    /// round-half-away-from-zero.
    pub fn apply(&self, plane: &Plane, sample_max: u16) -> Plane {
        let raw = self.apply_f64(plane);
        let data = raw
            .into_iter()
            .map(|v| v.round().clamp(0.0, sample_max as f64) as u16)
            .collect();
        Plane {
            width: self.target.0 as usize,
            height: self.target.1 as usize,
            data,
        }
    }
}

/// Resizes one 4:2:0 frame to `target` dims (luma); chroma planes go to the
/// half-size target. Target dims must be even and positive.
pub fn resize_frame(frame: &VideoFrame, target: (u32, u32)) -> Result<VideoFrame, MediaError> {
    let (tw, th) = target;
    if tw == 0 || th == 0 || tw % 2 != 0 || th % 2 != 0 {
        return Err(MediaError::InvalidGeometry(format!(
            "resize target must be even and positive, got {tw}x{th}"
        )));
    }
    let luma_plan = ResamplePlan::new((frame.width, frame.height), (tw, th));
    let chroma_plan = ResamplePlan::new((frame.width / 2, frame.height / 2), (tw / 2, th / 2));
    resize_frame_with(frame, &luma_plan, &chroma_plan)
}

fn resize_frame_with(
    frame: &VideoFrame,
    luma_plan: &ResamplePlan,
    chroma_plan: &ResamplePlan,
) -> Result<VideoFrame, MediaError> {
    let max = frame.sample_max();
    VideoFrame::new(
        luma_plan.target.0,
        luma_plan.target.1,
        frame.bit_depth,
        luma_plan.apply(&frame.plane_y, max),
        chroma_plan.apply(&frame.plane_u, max),
        chroma_plan.apply(&frame.plane_v, max),
    )
}

/// Frame-wise [`resize_frame`] over a whole sequence; fps preserved, name
/// annotated as `{name}_{W}x{H}`. Frames are resized in parallel.
pub fn resize_sequence(
    seq: &VideoSequence,
    target: (u32, u32),
) -> Result<VideoSequence, MediaError> {
    let (tw, th) = target;
    if tw == 0 || th == 0 || tw % 2 != 0 || th % 2 != 0 {
        return Err(MediaError::InvalidGeometry(format!(
            "resize target must be even and positive, got {tw}x{th}"
        )));
    }
    let luma_plan = ResamplePlan::new((seq.width(), seq.height()), (tw, th));
    let chroma_plan = ResamplePlan::new((seq.width() / 2, seq.height() / 2), (tw / 2, th / 2));
    let frames: Result<Vec<_>, _> = seq
        .frames
        .par_iter()
        .map(|f| resize_frame_with(f, &luma_plan, &chroma_plan))
        .collect();
    VideoSequence::new(format!("{}_{}x{}", seq.name, tw, th), seq.fps, frames?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{Fps, Plane};
    use proptest::prelude::*;

    /// Direct (non-separable) 2-D convolution over the full clamped window,
    /// normalized once across the whole window. Independent of the tap
    /// tables and the two-pass structure.
    fn direct_2d(plane: &Plane, target: (usize, usize)) -> Vec<f64> {
        let (sw, sh) = (plane.width, plane.height);
        let (dw, dh) = target;
        let scale_x = sw as f64 / dw as f64;
        let scale_y = sh as f64 / dh as f64;
        let mut out = vec![0.0; dw * dh];
        for oy in 0..dh {
            let cy = (oy as f64 + 0.5) * scale_y - 0.5;
            for ox in 0..dw {
                let cx = (ox as f64 + 0.5) * scale_x - 0.5;
                let mut acc = 0.0;
                let mut total = 0.0;
                for sy in (cy - 3.0).ceil() as i64..=(cy + 3.0).floor() as i64 {
                    let wy = lanczos3_kernel(sy as f64 - cy);
                    let yy = sy.clamp(0, sh as i64 - 1) as usize;
                    for sx in (cx - 3.0).ceil() as i64..=(cx + 3.0).floor() as i64 {
                        let wx = lanczos3_kernel(sx as f64 - cx);
                        let xx = sx.clamp(0, sw as i64 - 1) as usize;
                        let w = wx * wy;
                        acc += w * plane.get(xx, yy) as f64;
                        total += w;
                    }
                }
                out[oy * dw + ox] = acc / total;
            }
        }
        out
    }

    fn noise_plane(w: usize, h: usize, max: u16) -> Plane {
        // Deterministic pseudo-noise, no RNG dependency needed here.
        let data = (0..w * h)
            .map(|i| {
                let v = (i as u64).wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((v >> 33) % (max as u64 + 1)) as u16
            })
            .collect();
        Plane::new(w, h, data)
    }

    #[test]
    fn kernel_center_and_zeros() {
        assert_eq!(lanczos3_kernel(0.0), 1.0);
        for x in [1.0f64, 2.0, 3.0, -1.0, -2.0, -3.0, 4.0, -7.5] {
            assert_eq!(lanczos3_kernel(x), 0.0, "x={x}");
        }
    }

    #[test]
    fn kernel_half_matches_closed_form() {
        // sinc(1/2)·sinc(1/6) = 6/pi^2, evaluated independently to 20 digits.
        let expect = 0.607_927_101_854_026_628_7;
        assert!((lanczos3_kernel(0.5) - expect).abs() < 1e-12);
        assert!((lanczos3_kernel(-0.5) - expect).abs() < 1e-12);
    }

    #[test]
    fn kernel_is_even_and_bounded() {
        let mut x = -2.95;
        while x < 3.0 {
            assert_eq!(lanczos3_kernel(x), lanczos3_kernel(-x));
            assert!(lanczos3_kernel(x).abs() <= 1.0);
            x += 0.137;
        }
    }

    #[test]
    fn tap_weights_sum_to_one() {
        for (src, dst) in [(32usize, 16usize), (16, 32), (1080, 544), (544, 1080), (7, 5)] {
            for tap in axis_taps(src, dst) {
                let sum: f64 = tap.weights.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9, "{src}->{dst}: sum {sum}");
                assert!(tap.start + tap.weights.len() <= src);
            }
        }
    }

    #[test]
    fn constant_frame_stays_constant() {
        let frame = VideoFrame::constant(32, 32, 8, 100);
        let out = resize_frame(&frame, (16, 16)).unwrap();
        assert!(out.plane_y.data.iter().all(|&s| s == 100));
        assert!(out.plane_u.data.iter().all(|&s| s == 100));
        assert!(out.plane_v.data.iter().all(|&s| s == 100));
    }

    #[test]
    fn dc_invariance_at_paper_ladder_ratio() {
        // 1080 -> 544 on the x axis is the non-integer HD ladder ratio.
        let plane = Plane::filled(1080, 4, 731);
        let plan = ResamplePlan::new((1080, 4), (544, 4));
        let out = plan.apply(&plane, 1023);
        assert!(out.data.iter().all(|&s| s == 731));
    }

    #[test]
    fn paper_ladder_target_is_accepted() {
        let frame = VideoFrame::constant(1920, 1080, 10, 512);
        let out = resize_frame(&frame, (960, 544)).unwrap();
        assert_eq!((out.width, out.height), (960, 544));
        assert_eq!((out.plane_u.width, out.plane_u.height), (480, 272));
        assert!(out.plane_y.data.iter().all(|&s| s == 512));
    }

    #[test]
    fn identity_resize_is_bit_exact() {
        let plane = noise_plane(17, 9, 255);
        let plan = ResamplePlan::new((17, 9), (17, 9));
        // Every tap must have collapsed to a single unit weight.
        for tap in plan.x_taps.iter().chain(&plan.y_taps) {
            assert_eq!(tap.weights, vec![1.0]);
        }
        let out = plan.apply(&plane, 255);
        assert_eq!(out, plane);
    }

    #[test]
    fn separable_matches_direct_2d_oracle() {
        let plane = noise_plane(32, 32, 255);
        for target in [(16usize, 16usize), (48, 48), (20, 28)] {
            let plan = ResamplePlan::new((32, 32), (target.0 as u32, target.1 as u32));
            let sep = plan.apply_f64(&plane);
            let direct = direct_2d(&plane, target);
            for (a, b) in sep.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-6, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn ramp_round_trip_error_tracks_direct_oracle() {
        // Horizontal ramp: down to 16x16 and back with both the separable
        // path and the direct 2-D reference; final frames must agree to
        // within one quantization step everywhere.
        let data = (0..32 * 32).map(|i| ((i % 32) * 8) as u16).collect();
        let plane = Plane::new(32, 32, data);

        let down_plan = ResamplePlan::new((32, 32), (16, 16));
        let up_plan = ResamplePlan::new((16, 16), (32, 32));
        let down = down_plan.apply(&plane, 255);
        let up = up_plan.apply(&down, 255);

        let quantize = |raw: Vec<f64>, w: usize, h: usize| {
            let data = raw
                .into_iter()
                .map(|v| v.round().clamp(0.0, 255.0) as u16)
                .collect();
            Plane::new(w, h, data)
        };
        let odown = quantize(direct_2d(&plane, (16, 16)), 16, 16);
        let oup = quantize(direct_2d(&odown, (32, 32)), 32, 32);

        let max_err = |a: &Plane, b: &Plane| {
            a.data
                .iter()
                .zip(&b.data)
                .map(|(&x, &y)| (x as i32 - y as i32).abs())
                .max()
                .unwrap()
        };
        assert!(max_err(&up, &oup) <= 1);
        // And the separable round trip is no worse vs the original than the
        // oracle round trip (plus the same rounding slack).
        assert!(max_err(&up, &plane) <= max_err(&oup, &plane) + 1);
    }

    #[test]
    fn round_trip_beats_nearest_neighbor() {
        // Smooth 2-D ramp; nearest-neighbor round trip is the oracle the
        // Lanczos round trip must beat in MSE.
        let data: Vec<u16> = (0..32 * 32)
            .map(|i| {
                let (x, y) = (i % 32, i / 32);
                (4 * x + 3 * y) as u16
            })
            .collect();
        let frame = VideoFrame::new(
            32,
            32,
            8,
            Plane::new(32, 32, data),
            Plane::filled(16, 16, 128),
            Plane::filled(16, 16, 128),
        )
        .unwrap();
        let seq = VideoSequence::new("ramp", Fps::new(30, 1), vec![frame.clone()]).unwrap();

        let down = resize_sequence(&seq, (16, 16)).unwrap();
        let up = resize_sequence(&down, (32, 32)).unwrap();

        let nn = |p: &Plane, dw: usize, dh: usize| {
            let sx = p.width as f64 / dw as f64;
            let sy = p.height as f64 / dh as f64;
            let data = (0..dw * dh)
                .map(|i| {
                    let (ox, oy) = (i % dw, i / dw);
                    let x = (((ox as f64 + 0.5) * sx) as usize).min(p.width - 1);
                    let y = (((oy as f64 + 0.5) * sy) as usize).min(p.height - 1);
                    p.get(x, y)
                })
                .collect();
            Plane::new(dw, dh, data)
        };
        let nn_up = nn(&nn(&frame.plane_y, 16, 16), 32, 32);

        let mse = |a: &Plane, b: &Plane| {
            a.data
                .iter()
                .zip(&b.data)
                .map(|(&x, &y)| {
                    let d = x as f64 - y as f64;
                    d * d
                })
                .sum::<f64>()
                / a.data.len() as f64
        };
        let lanczos_mse = mse(&up.frames[0].plane_y, &frame.plane_y);
        let nn_mse = mse(&nn_up, &frame.plane_y);
        assert!(
            lanczos_mse < nn_mse,
            "lanczos {lanczos_mse} vs nearest {nn_mse}"
        );
    }

    #[test]
    fn sequence_resize_annotates_name_and_keeps_fps() {
        let seq = VideoSequence::new(
            "clip",
            Fps::new(60, 1),
            vec![
                VideoFrame::constant(32, 32, 8, 10),
                VideoFrame::constant(32, 32, 8, 20),
            ],
        )
        .unwrap();
        let out = resize_sequence(&seq, (16, 16)).unwrap();
        assert_eq!(out.name, "clip_16x16");
        assert_eq!(out.fps, Fps::new(60, 1));
        assert_eq!(out.frame_count(), 2);
    }

    #[test]
    fn odd_targets_are_rejected() {
        let seq = VideoSequence::new(
            "clip",
            Fps::new(30, 1),
            vec![VideoFrame::constant(32, 32, 8, 10)],
        )
        .unwrap();
        assert!(resize_sequence(&seq, (15, 16)).is_err());
        assert!(resize_sequence(&seq, (16, 0)).is_err());
    }

    proptest! {
        // DC invariance at arbitrary scale factors and sample values.
        #[test]
        fn dc_invariance_any_scale(
            sw in 2u32..40, sh in 2u32..40,
            dw in 2u32..40, dh in 2u32..40,
            value in 0u16..=1023,
        ) {
            let plane = Plane::filled(sw as usize, sh as usize, value);
            let plan = ResamplePlan::new((sw, sh), (dw, dh));
            let out = plan.apply(&plane, 1023);
            prop_assert!(out.data.iter().all(|&s| s == value));
        }

        #[test]
        fn identity_any_content(w in 2u32..24, h in 2u32..24, seed in any::<u16>()) {
            let data = (0..(w * h) as usize)
                .map(|i| ((i as u32 * 31 + seed as u32) % 256) as u16)
                .collect();
            let plane = Plane::new(w as usize, h as usize, data);
            let plan = ResamplePlan::new((w, h), (w, h));
            prop_assert_eq!(plan.apply(&plane, 255), plane);
        }
    }
}
