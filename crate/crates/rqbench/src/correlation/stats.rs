//! The four Table-VI statistics for one fitted metric.

use super::fit::FittedModel;
use super::CorrelationError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationStats {
    pub srocc: f64,
    pub lcc: f64,
    pub outlier_ratio: f64,
    pub rmse: f64,
    pub n_points: usize,
}

impl CorrelationStats {
    /// Renders like "0.8463 / 0.8375 / 0.1574 / 5.9972".
    pub fn render_row(&self) -> String {
        format!(
            "{:.4} / {:.4} / {:.4} / {:.4}",
            self.srocc, self.lcc, self.outlier_ratio, self.rmse
        )
    }
}

/// Pearson correlation of two equal-length series, clamped to [-1, 1]
/// so accumulated rounding cannot leak past the mathematical bound.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    (cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0)
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let shared = (start + end) as f64 / 2.0 + 1.0;
        for &idx in &order[start..=end] {
            ranks[idx] = shared;
        }
        start = end + 1;
    }
    ranks
}

/// SROCC on the raw series, LCC/RMSE on the model's predictions, and
/// the outlier ratio against twice the per-point stdev.
pub fn correlation_stats(
    metric_values: &[f64],
    targets: &[f64],
    stdevs: &[f64],
    model: &FittedModel,
) -> Result<CorrelationStats, CorrelationError> {
    let n = metric_values.len();
    for other in [targets.len(), stdevs.len()] {
        if other != n {
            return Err(CorrelationError::LengthMismatch { left: n, right: other });
        }
    }
    if n < 3 {
        return Err(CorrelationError::FewPoints { need: 3, got: n });
    }

    let srocc = pearson(&average_ranks(metric_values), &average_ranks(targets));
    let predictions: Vec<f64> = metric_values.iter().map(|&x| model.predict(x)).collect();
    let lcc = pearson(&predictions, targets);
    let sq_err =
        predictions.iter().zip(targets).map(|(p, t)| (p - t).powi(2)).sum::<f64>();
    let rmse = (sq_err / n as f64).sqrt();
    let outliers = predictions
        .iter()
        .zip(targets)
        .zip(stdevs)
        .filter(|((p, t), s)| (*p - **t).abs() > 2.0 * **s)
        .count();
    Ok(CorrelationStats {
        srocc,
        lcc,
        outlier_ratio: outliers as f64 / n as f64,
        rmse,
        n_points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::logistic_fit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fit_and_stats(xs: &[f64], targets: &[f64], stdevs: &[f64]) -> CorrelationStats {
        let model = logistic_fit(xs, targets, stdevs).unwrap();
        correlation_stats(xs, targets, stdevs, &model).unwrap()
    }

    #[test]
    fn monotone_series_hit_plus_minus_one() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let up = [10.0, 20.0, 25.0, 40.0, 41.0, 50.0];
        let down: Vec<f64> = up.iter().map(|v| 60.0 - v).collect();
        let stats_up = fit_and_stats(&xs, &up, &[1.0; 6]);
        assert_eq!(stats_up.srocc, 1.0);
        let stats_down = fit_and_stats(&xs, &down, &[1.0; 6]);
        assert_eq!(stats_down.srocc, -1.0);
    }

    #[test]
    fn tied_ranks_match_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.gen_range(3..40);
            // Coarse integer grids force plenty of ties.
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64).collect();
            let rx = average_ranks(&xs);
            let ry = average_ranks(&ys);
            let (ox, oy) = (oracle_ranks(&xs), oracle_ranks(&ys));
            for (a, b) in rx.iter().zip(&ox) {
                assert!((a - b).abs() < 1e-12);
            }
            let (va, vb) = (variance(&rx), variance(&ry));
            if va == 0.0 || vb == 0.0 {
                continue;
            }
            let srocc = pearson(&rx, &ry);
            let oracle = pearson(&ox, &oy);
            assert!((srocc - oracle).abs() < 1e-12);
        }
    }

    fn variance(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum()
    }

    /// O(n^2) rank assignment straight from the definition.
    fn oracle_ranks(values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .map(|&v| {
                let below = values.iter().filter(|&&o| o < v).count() as f64;
                let ties = values.iter().filter(|&&o| o == v).count() as f64;
                below + (ties + 1.0) / 2.0
            })
            .collect()
    }

    #[test]
    fn srocc_survives_increasing_transforms() {
        let xs: Vec<f64> = (0..9).map(|i| 10.0 + 7.0 * i as f64).collect();
        let ys = [12.0, 30.0, 22.0, 44.0, 47.0, 60.0, 58.0, 70.0, 81.0];
        let stdevs = [1.5; 9];
        let base = fit_and_stats(&xs, &ys, &stdevs);
        let cubed: Vec<f64> = xs.iter().map(|x| x.powi(3) + x).collect();
        let transformed = fit_and_stats(&cubed, &ys, &stdevs);
        assert!((base.srocc - transformed.srocc).abs() < 1e-12);
    }

    #[test]
    fn rmse_survives_affine_input_refit() {
        let xs: Vec<f64> = (0..10).map(|i| 20.0 + 6.0 * i as f64).collect();
        let ys = [15.0, 18.0, 26.0, 34.0, 45.0, 55.0, 64.0, 71.0, 75.0, 78.0];
        let stdevs = [2.0; 10];
        let base = fit_and_stats(&xs, &ys, &stdevs);
        let mapped: Vec<f64> = xs.iter().map(|x| 3.5 * x - 40.0).collect();
        let refit = fit_and_stats(&mapped, &ys, &stdevs);
        assert!(
            (base.rmse - refit.rmse).abs() < 1e-6,
            "{} vs {}",
            base.rmse,
            refit.rmse
        );
    }

    #[test]
    fn outliers_fade_as_stdevs_grow() {
        let xs: Vec<f64> = (0..12).map(|i| 5.0 + 8.0 * i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| 0.7 * x + if i % 3 == 0 { 14.0 } else { 0.0 })
            .collect();
        let tight = [1.0; 12];
        let loose = [4.0; 12];
        let model = logistic_fit(&xs, &ys, &tight).unwrap();
        let stats_tight = correlation_stats(&xs, &ys, &tight, &model).unwrap();
        let stats_loose = correlation_stats(&xs, &ys, &loose, &model).unwrap();
        assert!(stats_loose.outlier_ratio <= stats_tight.outlier_ratio);
        assert!(stats_tight.outlier_ratio > 0.0);
    }

    #[test]
    fn row_renders_like_the_table() {
        let stats = CorrelationStats {
            srocc: 0.8463,
            lcc: 0.8375,
            outlier_ratio: 0.1574,
            rmse: 5.9972,
            n_points: 108,
        };
        assert_eq!(stats.render_row(), "0.8463 / 0.8375 / 0.1574 / 5.9972");
    }

    #[test]
    fn two_points_are_too_few() {
        let model = logistic_fit(
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[1.0; 5],
        )
        .unwrap();
        let err = correlation_stats(&[1.0, 2.0], &[1.0, 2.0], &[1.0, 1.0], &model).unwrap_err();
        assert!(matches!(err, CorrelationError::FewPoints { need: 3, got: 2 }));
    }
}
