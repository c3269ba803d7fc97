//! Weighted logistic fitting of a metric column onto subjective scores.

use super::CorrelationError;
use crate::linalg::solve4;

/// Four-parameter monotone logistic
/// q(x) = b2 + (b1 - b2) / (1 + exp(-(x - b3) / |b4|)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedModel {
    pub beta: [f64; 4],
    /// Weighted sum of squared residuals at the solution.
    pub residual_sse: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FittedModel {
    pub fn predict(&self, x: f64) -> f64 {
        let [b1, b2, b3, b4] = self.beta;
        b2 + (b1 - b2) / (1.0 + (-(x - b3) / b4.abs()).exp())
    }
}

/// Spread floor: per-point stdevs below this stop inflating the weight.
const STDEV_FLOOR: f64 = 0.5;

/// Fits with inverse-variance weights derived from per-point stdevs,
/// floored at stdev 0.5 so a unanimous panel cannot dominate the loss.
pub fn logistic_fit(
    metric_values: &[f64],
    targets: &[f64],
    stdevs: &[f64],
) -> Result<FittedModel, CorrelationError> {
    if stdevs.len() != metric_values.len() {
        return Err(CorrelationError::LengthMismatch {
            left: metric_values.len(),
            right: stdevs.len(),
        });
    }
    let weights: Vec<f64> =
        stdevs.iter().map(|s| 1.0 / s.max(STDEV_FLOOR).powi(2)).collect();
    logistic_fit_weighted(metric_values, targets, &weights)
}

/// Damped iterative least squares from a deterministic start; returns
/// the best model found even when the step tolerance was not reached
/// (flagged via `converged`).
pub fn logistic_fit_weighted(
    metric_values: &[f64],
    targets: &[f64],
    weights: &[f64],
) -> Result<FittedModel, CorrelationError> {
    let n = metric_values.len();
    if targets.len() != n {
        return Err(CorrelationError::LengthMismatch { left: n, right: targets.len() });
    }
    if weights.len() != n {
        return Err(CorrelationError::LengthMismatch { left: n, right: weights.len() });
    }
    if n < 5 {
        return Err(CorrelationError::FewPoints { need: 5, got: n });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(CorrelationError::BadWeight);
    }
    let x_lo = metric_values.iter().copied().fold(f64::INFINITY, f64::min);
    let x_hi = metric_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if x_lo == x_hi {
        return Err(CorrelationError::ConstantMetric);
    }

    let t_lo = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let t_hi = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // Orient the starting asymptotes along the data's trend. Starting a
    // decreasing panel in the increasing orientation can trap the
    // iteration on a symmetric saddle where the best reachable fit is a
    // flat line.
    let w_total: f64 = weights.iter().sum();
    let x_mean = metric_values.iter().zip(weights).map(|(x, w)| w * x).sum::<f64>() / w_total;
    let t_mean = targets.iter().zip(weights).map(|(t, w)| w * t).sum::<f64>() / w_total;
    let trend: f64 = metric_values
        .iter()
        .zip(targets)
        .zip(weights)
        .map(|((&x, &t), &w)| w * (x - x_mean) * (t - t_mean))
        .sum();
    let (b1_start, b2_start) = if trend < 0.0 { (t_lo, t_hi) } else { (t_hi, t_lo) };
    let mut beta = [b1_start, b2_start, median(metric_values), sample_stdev(metric_values)];
    if t_lo == t_hi {
        // Flat target: the logistic collapses to a constant and there is
        // nothing to iterate.
        return Ok(FittedModel { beta, residual_sse: 0.0, converged: true, iterations: 0 });
    }

    let sse_of = |beta: &[f64; 4]| -> f64 {
        let m = FittedModel { beta: *beta, residual_sse: 0.0, converged: false, iterations: 0 };
        metric_values
            .iter()
            .zip(targets)
            .zip(weights)
            .map(|((&x, &t), &w)| w * (t - m.predict(x)).powi(2))
            .sum()
    };

    let mut sse = sse_of(&beta);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=10_000 {
        iterations = iter;
        // Weighted normal equations of the logistic Jacobian.
        let mut gram = [[0.0f64; 4]; 4];
        let mut rhs = [0.0f64; 4];
        let [b1, b2, b3, b4] = beta;
        let b4_abs = b4.abs();
        for ((&x, &t), &w) in metric_values.iter().zip(targets).zip(weights) {
            let s = 1.0 / (1.0 + (-(x - b3) / b4_abs).exp());
            let bell = s * (1.0 - s);
            let jac = [
                s,
                1.0 - s,
                -(b1 - b2) * bell / b4_abs,
                -(b1 - b2) * bell * (x - b3) * b4.signum() / (b4 * b4),
            ];
            let r = t - (b2 + (b1 - b2) * s);
            for a in 0..4 {
                rhs[a] += w * jac[a] * r;
                for b in 0..4 {
                    gram[a][b] += w * jac[a] * jac[b];
                }
            }
        }

        let mut damped = gram;
        for d in 0..4 {
            damped[d][d] += lambda * gram[d][d].max(1e-12);
        }
        let Some(step) = solve4(damped, rhs) else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
            continue;
        };
        let candidate = [
            beta[0] + step[0],
            beta[1] + step[1],
            beta[2] + step[2],
            beta[3] + step[3],
        ];
        if candidate[3] == 0.0 {
            lambda *= 10.0;
            continue;
        }
        let candidate_sse = sse_of(&candidate);
        if candidate_sse <= sse {
            let step_norm = step.iter().map(|v| v * v).sum::<f64>().sqrt();
            beta = candidate;
            sse = candidate_sse;
            lambda = (lambda / 10.0).max(1e-12);
            if step_norm < 1e-10 {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    Ok(FittedModel { beta, residual_sse: sse, converged, iterations })
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn sample_stdev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
