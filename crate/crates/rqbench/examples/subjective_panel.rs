//! From raw panel scores to DMOS, observer screening, and pairwise
//! significance.
//!
//! Each trial carries the subject's score for the hidden reference and
//! for the processed clip. Difference scores become DMOS per rate point,
//! erratic observers are screened out first, and a per-point F test
//! decides which codec pairs differ beyond chance.
//!
//! Screening needs a panel of this size to catch a lone saboteur: one
//! spike among n scores sits at most (n-1)/sqrt(n) stdevs from the
//! sample mean, and a spike also pushes the kurtosis past 4, raising
//! the threshold to sqrt(20) stdevs. Below 25 subjects nothing clears it.
//!
//! ```bash
//! cargo run --example subjective_panel
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rqbench::subjective::{
    compute_dmos, difference_scores, quality_from_dmos, screen_subjects,
    significance_matrix, TrialScore,
};

/// Builds a trial whose difference score is exactly `diff`, keeping both
/// raw scores inside the 0..=100 scale for any |diff| <= 100.
fn trial_with_diff(subject: &str, codec: &str, rate_index: &str, diff: f64) -> TrialScore {
    let reference = (50.0 + diff / 2.0).clamp(0.0, 100.0);
    TrialScore {
        subject_id: subject.to_string(),
        sequence: "demo".to_string(),
        codec: codec.to_string(),
        rate_index: rate_index.to_string(),
        score_reference: reference,
        score_distorted: reference - diff,
    }
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut trials = Vec::new();
    let points: Vec<(&str, &str, f64)> = ["R1", "R2", "R3", "R4"]
        .iter()
        .enumerate()
        .flat_map(|(i, &rate)| {
            let base = 30.0 - 6.0 * i as f64;
            // Codec "beta" annoys viewers a little less at every rate.
            [("alpha", rate, base), ("beta", rate, base - 5.0)]
        })
        .collect();

    for subject in 0..25 {
        let id = format!("s{subject:02}");
        for &(codec, rate, base) in &points {
            let noise = rng.gen_range(-3.0..3.0);
            trials.push(trial_with_diff(&id, codec, rate, base + noise));
        }
    }
    // One erratic observer swings 45 units off the panel on half the
    // points, alternating direction so the exceedances stay two-sided.
    for (i, &(codec, rate, base)) in points.iter().enumerate() {
        let offset = match i % 4 {
            0 => 45.0,
            2 => -45.0,
            _ => 0.0,
        };
        trials.push(trial_with_diff("s25", codec, rate, base + offset));
    }

    let report = screen_subjects(&trials).expect("screening");
    println!(
        "screening: {} retained, {} rejected {:?}",
        report.retained.len(),
        report.rejected.len(),
        report.rejected
    );
    trials.retain(|t| !report.rejected.contains(&t.subject_id));

    let diffs = difference_scores(&trials).expect("diffs");
    let records = compute_dmos(&diffs).expect("dmos");
    println!("\n{:<6} {:<6} {:>8} {:>8} {:>10}", "codec", "rate", "dmos", "stdev", "quality");
    for rec in &records {
        println!(
            "{:<6} {:<6} {:>8.2} {:>8.2} {:>10.2}",
            rec.codec, rec.rate_index, rec.dmos, rec.stdev,
            quality_from_dmos(rec)
        );
    }

    let cells = significance_matrix(&diffs, 0.05).expect("anova");
    println!();
    for cell in &cells {
        println!(
            "{} vs {}: {}   (significant / points, (wins/-losses))",
            cell.codec_pair.0,
            cell.codec_pair.1,
            cell.render()
        );
    }
}
