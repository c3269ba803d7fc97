//! Observer screening per the ITU-R BT.500 annex procedure, run on
//! difference scores.

use std::collections::BTreeMap;

use super::{difference_scores, SubjectiveError, TrialScore};

#[derive(Debug, Clone)]
pub struct SubjectScreening {
    pub subject_id: String,
    /// Scores strictly above the presentation's upper threshold.
    pub p_above: usize,
    /// Scores strictly below the lower threshold.
    pub q_below: usize,
    /// Presentations this subject rated.
    pub n_scores: usize,
    pub rejected: bool,
}

#[derive(Debug, Clone)]
pub struct ScreeningReport {
    pub retained: Vec<String>,
    pub rejected: Vec<String>,
    pub diagnostics: Vec<SubjectScreening>,
}

/// Flags erratic observers: per presentation the score distribution
/// sets thresholds at mean ± 2·stdev (or ± √20·stdev when the kurtosis
/// leaves 2 ≤ β2 ≤ 4), and a subject falls iff their exceedances are
/// both frequent, (P+Q)/N > 0.05, and two-sided, |P−Q|/(P+Q) < 0.3.
/// A consistently pessimistic or optimistic observer is kept.
pub fn screen_subjects(trials: &[TrialScore]) -> Result<ScreeningReport, SubjectiveError> {
    let diffs = difference_scores(trials)?;
    let mut tallies: BTreeMap<&str, SubjectScreening> = BTreeMap::new();
    for by_subject in diffs.values() {
        for subject in by_subject.keys() {
            tallies.entry(subject).or_insert_with(|| SubjectScreening {
                subject_id: subject.clone(),
                p_above: 0,
                q_below: 0,
                n_scores: 0,
                rejected: false,
            });
        }
    }
    if tallies.len() < 3 {
        return Err(SubjectiveError::FewSubjects { need: 3, got: tallies.len() });
    }

    for by_subject in diffs.values() {
        let n = by_subject.len();
        for subject in by_subject.keys() {
            tallies.get_mut(subject.as_str()).expect("tallied above").n_scores += 1;
        }
        if n < 2 {
            continue;
        }
        let values: Vec<f64> = by_subject.values().copied().collect();
        let nf = n as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
        if m2 == 0.0 {
            continue;
        }
        let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
        let kurtosis = m4 / (m2 * m2);
        let stdev = (m2 * nf / (nf - 1.0)).sqrt();
        let spread =
            if (2.0..=4.0).contains(&kurtosis) { 2.0 * stdev } else { 20f64.sqrt() * stdev };

        for (subject, &value) in by_subject {
            let tally = tallies.get_mut(subject.as_str()).expect("tallied above");
            if value > mean + spread {
                tally.p_above += 1;
            } else if value < mean - spread {
                tally.q_below += 1;
            }
        }
    }

    let mut report =
        ScreeningReport { retained: Vec::new(), rejected: Vec::new(), diagnostics: Vec::new() };
    for (_, mut tally) in tallies {
        let total = (tally.p_above + tally.q_below) as f64;
        if total > 0.0 {
            let rate = total / tally.n_scores as f64;
            let balance = ((tally.p_above as f64 - tally.q_below as f64) / total).abs();
            tally.rejected = rate > 0.05 && balance < 0.3;
        }
        if tally.rejected {
            report.rejected.push(tally.subject_id.clone());
        } else {
            report.retained.push(tally.subject_id.clone());
        }
        report.diagnostics.push(tally);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trial(subject: &str, point: usize, diff: f64) -> TrialScore {
        TrialScore {
            subject_id: subject.into(),
            sequence: format!("v{:02}", point / 4),
            codec: "hm".into(),
            rate_index: format!("R{}", point % 4 + 1),
            score_reference: 90.0,
            score_distorted: 90.0 - diff,
        }
    }

    #[test]
    fn identical_scores_reject_no_one() {
        let mut trials = Vec::new();
        for point in 0..12 {
            for subject in 0..5 {
                trials.push(trial(&format!("s{subject}"), point, 25.0));
            }
        }
        let report = screen_subjects(&trials).unwrap();
        assert!(report.rejected.is_empty());
        assert_eq!(report.retained.len(), 5);
    }

    #[test]
    fn two_subjects_are_too_few() {
        let trials =
            vec![trial("s0", 0, 10.0), trial("s1", 0, 12.0)];
        let err = screen_subjects(&trials).unwrap_err();
        assert!(matches!(err, SubjectiveError::FewSubjects { need: 3, got: 2 }));
    }

    #[test]
    fn scores_inside_two_sigma_reject_no_one() {
        // An evenly spread panel never exceeds mean ± 2·stdev: for a
        // uniform grid the extreme deviation is about 1.7 stdev.
        let mut trials = Vec::new();
        for point in 0..20 {
            for subject in 0..10 {
                trials.push(trial(
                    &format!("s{subject}"),
                    point,
                    20.0 + point as f64 + subject as f64,
                ));
            }
        }
        let report = screen_subjects(&trials).unwrap();
        assert!(report.rejected.is_empty());
        for d in &report.diagnostics {
            assert_eq!(d.p_above + d.q_below, 0);
        }
    }

    #[test]
    fn two_sided_outlier_is_rejected_and_matches_direct_oracle() {
        // 25 ordinary subjects spread on a fixed grid, plus one erratic
        // subject who lands 35 units out on half the points, alternating
        // direction so the exceedances stay two-sided. The panel must be
        // this large: one spike among n scores deviates from the sample
        // mean by at most (n-1)/sqrt(n) stdevs, and the spike drives the
        // kurtosis above 4, so it must clear the loose sqrt(20) ~ 4.47
        // threshold, which needs n >= 25.
        let n_points = 20;
        let mut diffs: Vec<Vec<f64>> = Vec::new();
        let mut trials = Vec::new();
        for point in 0..n_points {
            let base = 40.0;
            let mut row = Vec::new();
            for subject in 0..25 {
                let v = base + (subject % 5) as f64 * 1.5 - 3.0;
                row.push(v);
                trials.push(trial(&format!("s{subject:02}"), point, v));
            }
            let erratic = if point % 2 == 0 {
                base + if point % 4 == 0 { 35.0 } else { -35.0 }
            } else {
                base
            };
            row.push(erratic);
            trials.push(trial("s25", point, erratic));
            diffs.push(row);
        }

        // Direct threshold oracle over the same table.
        let (mut p, mut q) = (0usize, 0usize);
        for row in &diffs {
            let n = row.len() as f64;
            let mean = row.iter().sum::<f64>() / n;
            let m2 = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let m4 = row.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
            let sd = (m2 * n / (n - 1.0)).sqrt();
            let spread = if (2.0..=4.0).contains(&(m4 / (m2 * m2))) {
                2.0 * sd
            } else {
                20f64.sqrt() * sd
            };
            let v = row[25];
            if v > mean + spread {
                p += 1;
            }
            if v < mean - spread {
                q += 1;
            }
        }
        assert!((p + q) as f64 / n_points as f64 > 0.05, "oracle: outlier too tame");
        assert!(
            ((p as f64 - q as f64) / (p + q) as f64).abs() < 0.3,
            "oracle: exceedances not two-sided (P={p}, Q={q})"
        );

        let report = screen_subjects(&trials).unwrap();
        assert_eq!(report.rejected, vec!["s25".to_string()]);
        let diag = report.diagnostics.iter().find(|d| d.subject_id == "s25").unwrap();
        assert_eq!(diag.p_above, p);
        assert_eq!(diag.q_below, q);
    }

    #[test]
    fn gaussian_panel_of_twenty_keeps_everyone() {
        // Panel shaped like real DSCQS data: a per-point difficulty, a
        // per-subject leniency, and light observation noise. Leniency
        // pushes a subject's rare exceedances to one side, which the
        // two-sided rule tolerates.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gauss = |rng: &mut ChaCha8Rng| -> f64 {
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        let leniency: Vec<f64> = (0..20).map(|_| 4.0 * gauss(&mut rng)).collect();
        let mut trials = Vec::new();
        for point in 0..36 {
            let difficulty = 25.0 + 10.0 * gauss(&mut rng);
            for (subject, bias) in leniency.iter().enumerate() {
                let noise = 2.0 * gauss(&mut rng);
                let diff = (difficulty + bias + noise).clamp(0.0, 80.0);
                trials.push(trial(&format!("s{subject:02}"), point, diff));
            }
        }
        let report = screen_subjects(&trials).unwrap();
        assert!(
            report.rejected.is_empty(),
            "rejected {:?}",
            report.rejected
        );
        assert_eq!(report.retained.len(), 20);
    }
}
