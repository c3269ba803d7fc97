//! How well do objective metrics track subjective opinion?
//!
//! A monotone logistic maps each metric onto the subjective axis first,
//! then rank correlation, linear correlation, outlier ratio, and RMSE
//! are measured on the mapped predictions.
//!
//! ```bash
//! cargo run --example metric_correlation
//! ```

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rqbench::correlation::{evaluate_metric_suite, logistic_fit, MetricObservation};
use rqbench::subjective::DmosRecord;

fn main() {
    // A planted logistic recovered from its own samples.
    let beta = [90.0, 10.0, 50.0, 8.0];
    let xs: Vec<f64> = (0..60).map(|i| 20.0 + i as f64).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| beta[1] + (beta[0] - beta[1]) / (1.0 + ((x - beta[2]) / beta[3]).exp()))
        .collect();
    let unit_spread = vec![1.0; xs.len()];
    let fit = logistic_fit(&xs, &ys, &unit_spread).expect("fit");
    // Swapping the asymptotes while negating the slope leaves the curve
    // unchanged, so compare predictions rather than raw parameters.
    let rmse = (xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (fit.predict(x) - y).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    println!(
        "planted beta {:?}\nrecovered    [{:.3}, {:.3}, {:.3}, {:.3}] in {} iterations",
        beta, fit.beta[0], fit.beta[1], fit.beta[2], fit.beta[3], fit.iterations
    );
    println!("prediction rmse against the planted curve: {rmse:.2e}");

    // A small synthetic study: "good" tracks opinion, "noisy" barely does.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut observations = Vec::new();
    let mut dmos = Vec::new();
    for seq in ["a", "b", "c"] {
        for (i, rate_index) in ["R1", "R2", "R3", "R4"].iter().enumerate() {
            let true_quality = 35.0 + 15.0 * i as f64 + rng.gen_range(-3.0..3.0);
            let mut metrics = BTreeMap::new();
            metrics.insert("good".to_string(), true_quality / 2.0 + rng.gen_range(-0.4..0.4));
            metrics.insert("noisy".to_string(), rng.gen_range(0.0..50.0));
            observations.push(MetricObservation {
                group: "demo".to_string(),
                sequence: seq.to_string(),
                codec: "alpha".to_string(),
                rate_index: rate_index.to_string(),
                metrics,
            });
            dmos.push(DmosRecord {
                sequence: seq.to_string(),
                codec: "alpha".to_string(),
                rate_index: rate_index.to_string(),
                dmos: 100.0 - true_quality,
                stdev: 5.0,
                n_subjects: 20,
                diff_scores: Vec::new(),
            });
        }
    }

    let suite = evaluate_metric_suite(&observations, &dmos, 0.8).expect("suite");
    println!("\n{}", suite.render_text());
}
