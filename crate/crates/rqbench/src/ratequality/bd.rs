//! Bjøntegaard Delta measurements between two rate-quality curves.
//!
//! Rate delta fits log10(bitrate) as a cubic in quality for each curve,
//! integrates the difference in closed form over the shared quality
//! range, and maps the mean log offset back to a percentage. Quality
//! delta is the dual with the axes swapped.

use super::{RQCurve, RqError};

/// Least-squares cubic in a centered variable, `sum c_k (x - center)^k`.
#[derive(Debug, Clone, Copy)]
pub struct CubicFit {
    pub center: f64,
    pub coeffs: [f64; 4],
    /// Range of the independent variable in the data.
    pub domain: (f64, f64),
}

impl CubicFit {
    pub fn eval(&self, x: f64) -> f64 {
        let t = x - self.center;
        self.coeffs[0] + t * (self.coeffs[1] + t * (self.coeffs[2] + t * self.coeffs[3]))
    }

    /// Exact integral of the polynomial over [lo, hi].
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let anti = |x: f64| {
            let t = x - self.center;
            let mut acc = 0.0;
            let mut pow = t;
            for k in 0..4 {
                acc += self.coeffs[k] * pow / (k + 1) as f64;
                pow *= t;
            }
            acc
        };
        anti(hi) - anti(lo)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BDResult {
    /// Mean bitrate change of the test curve against the anchor at equal
    /// quality, in percent. Bounded below by -100. NaN when this is the
    /// companion figure and the curves share no quality range.
    pub bd_rate_percent: f64,
    /// Mean quality change at equal bitrate, in metric units. NaN when
    /// this is the companion figure and the curves share no rate range.
    pub bd_quality: f64,
    /// Integration interval on the operation's own axis: quality units
    /// for a rate delta, log10(kbps) for a quality delta.
    pub overlap_interval: (f64, f64),
}

/// Fits log10(bitrate) as a cubic in quality. Needs at least four
/// points and quality that never falls more than 0.5 below its running
/// maximum along the curve.
pub fn fit_log_rate_poly(curve: &RQCurve) -> Result<CubicFit, RqError> {
    let (qualities, log_rates) = axes(curve)?;
    fit_cubic(&qualities, &log_rates)
}

/// Dual fit: quality as a cubic in log10(bitrate).
pub fn fit_quality_poly(curve: &RQCurve) -> Result<CubicFit, RqError> {
    let (qualities, log_rates) = axes(curve)?;
    fit_cubic(&log_rates, &qualities)
}

/// Mean bitrate overhead of `test` relative to `anchor` at equal
/// quality: negative means `test` spends fewer bits.
pub fn bd_rate(anchor: &RQCurve, test: &RQCurve) -> Result<BDResult, RqError> {
    let pair = FittedPair::new(anchor, test)?;
    let overlap = pair.quality_overlap()?;
    Ok(BDResult {
        bd_rate_percent: pair.rate_delta_percent(overlap),
        bd_quality: match pair.log_rate_overlap() {
            Ok(iv) => pair.quality_delta(iv),
            Err(_) => f64::NAN,
        },
        overlap_interval: overlap,
    })
}

/// Mean quality gain of `test` relative to `anchor` at equal bitrate.
pub fn bd_quality(anchor: &RQCurve, test: &RQCurve) -> Result<BDResult, RqError> {
    let pair = FittedPair::new(anchor, test)?;
    let overlap = pair.log_rate_overlap()?;
    Ok(BDResult {
        bd_rate_percent: match pair.quality_overlap() {
            Ok(iv) => pair.rate_delta_percent(iv),
            Err(_) => f64::NAN,
        },
        bd_quality: pair.quality_delta(overlap),
        overlap_interval: overlap,
    })
}

struct FittedPair {
    anchor_rate: CubicFit,
    test_rate: CubicFit,
    anchor_quality: CubicFit,
    test_quality: CubicFit,
}

impl FittedPair {
    fn new(anchor: &RQCurve, test: &RQCurve) -> Result<Self, RqError> {
        if anchor.metric_id != test.metric_id {
            return Err(RqError::MixedCurve(format!(
                "metrics {:?} and {:?}",
                anchor.metric_id, test.metric_id
            )));
        }
        Ok(FittedPair {
            anchor_rate: fit_log_rate_poly(anchor)?,
            test_rate: fit_log_rate_poly(test)?,
            anchor_quality: fit_quality_poly(anchor)?,
            test_quality: fit_quality_poly(test)?,
        })
    }

    fn quality_overlap(&self) -> Result<(f64, f64), RqError> {
        overlap(self.anchor_rate.domain, self.test_rate.domain, "quality")
    }

    fn log_rate_overlap(&self) -> Result<(f64, f64), RqError> {
        overlap(self.anchor_quality.domain, self.test_quality.domain, "bitrate")
    }

    fn rate_delta_percent(&self, (lo, hi): (f64, f64)) -> f64 {
        let avg =
            (self.test_rate.integral(lo, hi) - self.anchor_rate.integral(lo, hi)) / (hi - lo);
        (10f64.powf(avg) - 1.0) * 100.0
    }

    fn quality_delta(&self, (lo, hi): (f64, f64)) -> f64 {
        (self.test_quality.integral(lo, hi) - self.anchor_quality.integral(lo, hi)) / (hi - lo)
    }
}

fn overlap(a: (f64, f64), b: (f64, f64), axis: &'static str) -> Result<(f64, f64), RqError> {
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    if lo >= hi {
        return Err(RqError::EmptyOverlap { axis });
    }
    Ok((lo, hi))
}

/// Quality a BD fit may sag below its running maximum before the curve
/// is considered broken rather than noisy.
const QUALITY_SAG_TOLERANCE: f64 = 0.5;

fn axes(curve: &RQCurve) -> Result<(Vec<f64>, Vec<f64>), RqError> {
    if curve.points.len() < 4 {
        return Err(RqError::FewPoints { need: 4, got: curve.points.len() });
    }
    let qualities = curve.qualities();
    let mut running_max = f64::NEG_INFINITY;
    for &q in &qualities {
        running_max = running_max.max(q);
        let drop = running_max - q;
        if drop > QUALITY_SAG_TOLERANCE {
            return Err(RqError::NonMonotoneQuality { drop });
        }
    }
    let log_rates = curve.bitrates().iter().map(|r| r.log10()).collect();
    Ok((qualities, log_rates))
}

fn fit_cubic(xs: &[f64], ys: &[f64]) -> Result<CubicFit, RqError> {
    let n = xs.len() as f64;
    let center = xs.iter().sum::<f64>() / n;
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // Normal equations of the centered Vandermonde system.
    let mut power_sums = [0.0f64; 7];
    let mut rhs = [0.0f64; 4];
    for (&x, &y) in xs.iter().zip(ys) {
        let t = x - center;
        let mut pow = 1.0;
        for (k, sum) in power_sums.iter_mut().enumerate() {
            *sum += pow;
            if k < 4 {
                rhs[k] += pow * y;
            }
            pow *= t;
        }
    }
    let mut gram = [[0.0f64; 4]; 4];
    for (r, row) in gram.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = power_sums[r + c];
        }
    }
    let coeffs = crate::linalg::solve4(gram, rhs).ok_or(RqError::SingularFit)?;
    Ok(CubicFit { center, coeffs, domain: (lo, hi) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratequality::{build_rq_curve, RatePoint};
    use proptest::prelude::*;

    fn curve(pairs: &[(f64, f64)]) -> RQCurve {
        let pts =
            pairs.iter().map(|&(r, q)| RatePoint::synthetic(r, "psnr", q)).collect();
        build_rq_curve(pts, "psnr").unwrap()
    }

    const BASE: [(f64, f64); 5] =
        [(400.0, 31.0), (800.0, 34.5), (1600.0, 38.0), (3200.0, 41.0), (6400.0, 43.5)];

    fn scaled_rates(k: f64) -> Vec<(f64, f64)> {
        BASE.iter().map(|&(r, q)| (r * k, q)).collect()
    }

    #[test]
    fn identical_curves_give_zero_deltas() {
        let a = curve(&BASE);
        let res = bd_rate(&a, &a).unwrap();
        assert_eq!(res.bd_rate_percent, 0.0);
        let res = bd_quality(&a, &a).unwrap();
        assert_eq!(res.bd_quality, 0.0);
    }

    #[test]
    fn doubled_rates_cost_one_hundred_percent() {
        let a = curve(&BASE);
        let b = curve(&scaled_rates(2.0));
        let res = bd_rate(&a, &b).unwrap();
        assert!((res.bd_rate_percent - 100.0).abs() < 1e-9, "{}", res.bd_rate_percent);
    }

    #[test]
    fn halved_rates_save_fifty_percent() {
        let a = curve(&BASE);
        let b = curve(&scaled_rates(0.5));
        let res = bd_rate(&a, &b).unwrap();
        assert!((res.bd_rate_percent + 50.0).abs() < 1e-9, "{}", res.bd_rate_percent);
    }

    #[test]
    fn quality_shift_shows_up_as_bd_quality() {
        let a = curve(&BASE);
        let shifted: Vec<(f64, f64)> = BASE.iter().map(|&(r, q)| (r, q + 1.25)).collect();
        let b = curve(&shifted);
        let res = bd_quality(&a, &b).unwrap();
        assert!((res.bd_quality - 1.25).abs() < 1e-9, "{}", res.bd_quality);
    }

    #[test]
    fn rate_antisymmetry_product_identity() {
        let a = curve(&BASE);
        let b = curve(&[
            (500.0, 32.0),
            (900.0, 35.0),
            (1800.0, 38.5),
            (3600.0, 41.5),
            (7000.0, 44.0),
        ]);
        let ab = bd_rate(&a, &b).unwrap().bd_rate_percent;
        let ba = bd_rate(&b, &a).unwrap().bd_rate_percent;
        let product = (1.0 + ab / 100.0) * (1.0 + ba / 100.0);
        assert!((product - 1.0).abs() < 1e-9, "{product}");
    }

    #[test]
    fn quality_antisymmetry_is_exact() {
        let a = curve(&BASE);
        let b = curve(&[
            (500.0, 32.0),
            (900.0, 35.0),
            (1800.0, 38.5),
            (3600.0, 41.5),
            (7000.0, 44.0),
        ]);
        let ab = bd_quality(&a, &b).unwrap().bd_quality;
        let ba = bd_quality(&b, &a).unwrap().bd_quality;
        assert_eq!(ab, -ba);
    }

    #[test]
    fn closed_form_matches_trapezoid_oracle() {
        let a = curve(&BASE);
        let b = curve(&[
            (500.0, 32.0),
            (900.0, 35.0),
            (1800.0, 38.5),
            (3600.0, 41.5),
            (7000.0, 44.0),
        ]);
        let res = bd_rate(&a, &b).unwrap();
        let (fa, fb) = (fit_log_rate_poly(&a).unwrap(), fit_log_rate_poly(&b).unwrap());
        let (lo, hi) = res.overlap_interval;
        let n = 1_000_000usize;
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let x = lo + h * i as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * (fb.eval(x) - fa.eval(x));
        }
        let avg = acc * h / (hi - lo);
        let oracle = (10f64.powf(avg) - 1.0) * 100.0;
        assert!((res.bd_rate_percent - oracle).abs() < 1e-9);
    }

    #[test]
    fn three_points_are_not_enough() {
        let pts = vec![
            RatePoint::synthetic(400.0, "psnr", 31.0),
            RatePoint::synthetic(800.0, "psnr", 34.0),
            RatePoint::synthetic(1600.0, "psnr", 37.0),
        ];
        let c = build_rq_curve(pts, "psnr").unwrap();
        let err = bd_rate(&c, &c).unwrap_err();
        assert!(matches!(err, RqError::FewPoints { need: 4, .. }));
    }

    #[test]
    fn disjoint_quality_ranges_rejected() {
        let a = curve(&BASE);
        let high: Vec<(f64, f64)> = BASE.iter().map(|&(r, q)| (r, q + 50.0)).collect();
        let b = curve(&high);
        let err = bd_rate(&a, &b).unwrap_err();
        assert!(matches!(err, RqError::EmptyOverlap { axis: "quality" }));
    }

    #[test]
    fn sag_beyond_tolerance_rejected() {
        let c = curve(&[
            (400.0, 31.0),
            (800.0, 34.5),
            (1600.0, 33.8),
            (3200.0, 41.0),
            (6400.0, 43.5),
        ]);
        let err = bd_rate(&c, &c).unwrap_err();
        assert!(matches!(err, RqError::NonMonotoneQuality { .. }));
    }

    #[test]
    fn sag_within_tolerance_accepted() {
        let c = curve(&[
            (400.0, 31.0),
            (800.0, 34.5),
            (1600.0, 34.2),
            (3200.0, 41.0),
            (6400.0, 43.5),
        ]);
        assert!(bd_rate(&c, &c).is_ok());
    }

    #[test]
    fn flat_quality_is_singular() {
        let c = curve(&[(400.0, 31.0), (800.0, 31.0), (1600.0, 31.0), (3200.0, 31.0)]);
        let err = fit_log_rate_poly(&c).unwrap_err();
        assert!(matches!(err, RqError::SingularFit));
    }

    #[test]
    fn exact_cubic_is_interpolated() {
        // Four points determine the cubic, so the fit must reproduce a
        // curve that is exactly cubic in quality.
        let poly = |q: f64| 1.5 + 0.08 * q + 0.002 * (q - 35.0).powi(2)
            - 0.0001 * (q - 35.0).powi(3);
        let pairs: Vec<(f64, f64)> =
            [30.0, 33.0, 37.0, 40.0].iter().map(|&q| (10f64.powf(poly(q)), q)).collect();
        let fit = fit_log_rate_poly(&curve(&pairs)).unwrap();
        for q in [30.5, 34.0, 38.5] {
            assert!((fit.eval(q) - poly(q)).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn scaling_both_curves_leaves_bd_rate_alone(k in 0.01f64..100.0) {
            let a = curve(&BASE);
            let b = curve(&[
                (500.0, 32.0),
                (900.0, 35.0),
                (1800.0, 38.5),
                (3600.0, 41.5),
                (7000.0, 44.0),
            ]);
            let base = bd_rate(&a, &b).unwrap().bd_rate_percent;
            let a2 = curve(&scaled_rates(k));
            let b2: Vec<(f64, f64)> = [
                (500.0, 32.0),
                (900.0, 35.0),
                (1800.0, 38.5),
                (3600.0, 41.5),
                (7000.0, 44.0),
            ].iter().map(|&(r, q)| (r * k, q)).collect();
            let scaled = bd_rate(&a2, &curve(&b2)).unwrap().bd_rate_percent;
            prop_assert!((base - scaled).abs() < 1e-9);
        }

        #[test]
        fn bd_rate_never_below_minus_hundred(
            shift in -20.0f64..20.0,
            k in 0.001f64..1000.0,
        ) {
            let a = curve(&BASE);
            let moved: Vec<(f64, f64)> = BASE
                .iter()
                .map(|&(r, q)| (r * k, q + shift))
                .collect();
            let b = curve(&moved);
            if let Ok(res) = bd_rate(&a, &b) {
                prop_assert!(res.bd_rate_percent >= -100.0);
            }
        }
    }
}
