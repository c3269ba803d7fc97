//! Difference scores and DMOS aggregation.

use std::collections::BTreeMap;

use super::{DiffTable, DmosRecord, PointId, SubjectiveError, TrialScore};

/// Difference score per trial: reference rating minus distorted rating.
/// Negative values (distorted rated above the hidden reference) pass
/// through; they are a normal DSCQS outcome on near-transparent points.
pub fn difference_scores(trials: &[TrialScore]) -> Result<DiffTable, SubjectiveError> {
    let mut table: DiffTable = BTreeMap::new();
    for t in trials {
        for value in [t.score_reference, t.score_distorted] {
            if !(0.0..=100.0).contains(&value) {
                return Err(SubjectiveError::ScoreOutOfRange {
                    subject_id: t.subject_id.clone(),
                    value,
                });
            }
        }
        let point = PointId {
            sequence: t.sequence.clone(),
            codec: t.codec.clone(),
            rate_index: t.rate_index.clone(),
        };
        let diff = t.score_reference - t.score_distorted;
        let by_subject = table.entry(point.clone()).or_default();
        if by_subject.insert(t.subject_id.clone(), diff).is_some() {
            return Err(SubjectiveError::DuplicateTrial {
                subject_id: t.subject_id.clone(),
                point: point.to_string(),
            });
        }
    }
    Ok(table)
}

/// Collapses each point's difference scores to mean and sample stdev.
pub fn compute_dmos(diffs: &DiffTable) -> Result<Vec<DmosRecord>, SubjectiveError> {
    let mut records = Vec::with_capacity(diffs.len());
    for (point, by_subject) in diffs {
        let n = by_subject.len();
        if n < 2 {
            return Err(SubjectiveError::FewSubjects { need: 2, got: n });
        }
        let values: Vec<f64> = by_subject.values().copied().collect();
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        records.push(DmosRecord {
            sequence: point.sequence.clone(),
            codec: point.codec.clone(),
            rate_index: point.rate_index.clone(),
            dmos: mean,
            stdev: (ss / (n - 1) as f64).sqrt(),
            n_subjects: n,
            diff_scores: values,
        });
    }
    Ok(records)
}

/// Subjective quality on the same 0-100 axis as the ratings. Left
/// unclamped: a negative DMOS maps above 100 and report rendering
/// flags it rather than hiding it.
pub fn quality_from_dmos(rec: &DmosRecord) -> f64 {
    100.0 - rec.dmos
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial(subject: &str, seq: &str, rate: &str, reference: f64, distorted: f64) -> TrialScore {
        TrialScore {
            subject_id: subject.into(),
            sequence: seq.into(),
            codec: "hm".into(),
            rate_index: rate.into(),
            score_reference: reference,
            score_distorted: distorted,
        }
    }

    #[test]
    fn difference_is_reference_minus_distorted() {
        let table = difference_scores(&[trial("s1", "v1", "R1", 80.0, 60.0)]).unwrap();
        let point = table.values().next().unwrap();
        assert_eq!(point["s1"], 20.0);
    }

    #[test]
    fn negative_difference_allowed() {
        let table = difference_scores(&[trial("s1", "v1", "R1", 50.0, 70.0)]).unwrap();
        assert_eq!(table.values().next().unwrap()["s1"], -20.0);
    }

    #[test]
    fn duplicate_trial_rejected() {
        let err = difference_scores(&[
            trial("s1", "v1", "R1", 80.0, 60.0),
            trial("s1", "v1", "R1", 70.0, 50.0),
        ])
        .unwrap_err();
        assert!(matches!(err, SubjectiveError::DuplicateTrial { .. }));
    }

    #[test]
    fn out_of_range_score_rejected() {
        let err = difference_scores(&[trial("s1", "v1", "R1", 101.0, 60.0)]).unwrap_err();
        assert!(matches!(err, SubjectiveError::ScoreOutOfRange { .. }));
    }

    #[test]
    fn dmos_of_constant_diffs() {
        let table = difference_scores(&[
            trial("s1", "v1", "R1", 80.0, 60.0),
            trial("s2", "v1", "R1", 75.0, 55.0),
            trial("s3", "v1", "R1", 90.0, 70.0),
        ])
        .unwrap();
        let recs = compute_dmos(&table).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].dmos, 20.0);
        assert_eq!(recs[0].stdev, 0.0);
        assert_eq!(recs[0].n_subjects, 3);
    }

    #[test]
    fn dmos_of_spread_diffs() {
        let table = difference_scores(&[
            trial("s1", "v1", "R1", 80.0, 70.0),
            trial("s2", "v1", "R1", 90.0, 60.0),
        ])
        .unwrap();
        let recs = compute_dmos(&table).unwrap();
        assert_eq!(recs[0].dmos, 20.0);
        assert!((recs[0].stdev - 200f64.sqrt()).abs() < 1e-12);
        assert!((recs[0].stdev - 14.1421).abs() < 1e-3);
    }

    #[test]
    fn single_subject_point_rejected() {
        let table = difference_scores(&[trial("s1", "v1", "R1", 80.0, 60.0)]).unwrap();
        let err = compute_dmos(&table).unwrap_err();
        assert!(matches!(err, SubjectiveError::FewSubjects { need: 2, got: 1 }));
    }

    #[test]
    fn quality_axis_flips_and_does_not_clamp() {
        let rec = |dmos: f64| DmosRecord {
            sequence: "v1".into(),
            codec: "hm".into(),
            rate_index: "R1".into(),
            dmos,
            stdev: 0.0,
            n_subjects: 2,
            diff_scores: vec![dmos, dmos],
        };
        assert_eq!(quality_from_dmos(&rec(20.0)), 80.0);
        assert_eq!(quality_from_dmos(&rec(0.0)), 100.0);
        assert_eq!(quality_from_dmos(&rec(-5.0)), 105.0);
    }

    proptest! {
        #[test]
        fn dmos_matches_direct_mean_and_stdev(
            values in proptest::collection::vec(0.0f64..100.0, 2..24)
        ) {
            let trials: Vec<TrialScore> = values
                .iter()
                .enumerate()
                .map(|(i, &v)| trial(&format!("s{i:02}"), "v1", "R1", v, 40.0))
                .collect();
            let recs = compute_dmos(&difference_scores(&trials).unwrap()).unwrap();
            let diffs: Vec<f64> = values.iter().map(|v| v - 40.0).collect();
            let n = diffs.len() as f64;
            let mean = diffs.iter().sum::<f64>() / n;
            let sd =
                (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            prop_assert!((recs[0].dmos - mean).abs() < 1e-12);
            prop_assert!((recs[0].stdev - sd).abs() < 1e-12);
        }

        #[test]
        fn dmos_invariant_under_common_shift(
            values in proptest::collection::vec(10.0f64..60.0, 2..12),
            shift in 0.0f64..30.0,
        ) {
            let base: Vec<TrialScore> = values
                .iter()
                .enumerate()
                .map(|(i, &v)| trial(&format!("s{i:02}"), "v1", "R1", v, v * 0.5))
                .collect();
            let shifted: Vec<TrialScore> = base
                .iter()
                .map(|t| TrialScore {
                    score_reference: t.score_reference + shift,
                    score_distorted: t.score_distorted + shift,
                    ..t.clone()
                })
                .collect();
            let a = compute_dmos(&difference_scores(&base).unwrap()).unwrap();
            let b = compute_dmos(&difference_scores(&shifted).unwrap()).unwrap();
            prop_assert!((a[0].dmos - b[0].dmos).abs() < 1e-9);
        }
    }
}
