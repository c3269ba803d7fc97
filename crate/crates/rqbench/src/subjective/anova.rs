//! Two-group one-way ANOVA and the pairwise significance matrix built
//! from it.

use std::collections::BTreeSet;

use super::fdist::f_survival;
use super::{DiffTable, SignificanceCell, SubjectiveError};

#[derive(Debug, Clone, Copy)]
pub struct AnovaOutcome {
    pub f: f64,
    pub p: f64,
    /// Set when within-group variance is zero and the classical F ratio
    /// is a convention rather than a computation.
    pub degenerate: bool,
}

/// One-way F test between two groups of difference scores:
/// F = MS_between / MS_within with (1, n_a + n_b - 2) degrees of freedom.
pub fn anova_one_way(group_a: &[f64], group_b: &[f64]) -> Result<AnovaOutcome, SubjectiveError> {
    for g in [group_a, group_b] {
        if g.len() < 2 {
            return Err(SubjectiveError::SmallGroup { got: g.len() });
        }
    }
    let (na, nb) = (group_a.len() as f64, group_b.len() as f64);
    let mean_a = group_a.iter().sum::<f64>() / na;
    let mean_b = group_b.iter().sum::<f64>() / nb;
    let grand = (mean_a * na + mean_b * nb) / (na + nb);
    let ss_between = na * (mean_a - grand).powi(2) + nb * (mean_b - grand).powi(2);
    let ss_within = group_a.iter().map(|v| (v - mean_a).powi(2)).sum::<f64>()
        + group_b.iter().map(|v| (v - mean_b).powi(2)).sum::<f64>();
    let d2 = na + nb - 2.0;

    if ss_within == 0.0 {
        // Constant groups: identical means carry no evidence of a
        // difference, distinct means are unambiguous separation.
        return Ok(if mean_a == mean_b {
            AnovaOutcome { f: 0.0, p: 1.0, degenerate: true }
        } else {
            AnovaOutcome { f: f64::INFINITY, p: 0.0, degenerate: true }
        });
    }
    let f = ss_between / (ss_within / d2);
    Ok(AnovaOutcome { f, p: f_survival(f, 1.0, d2), degenerate: false })
}

/// Runs the pairwise test at every rate point and aggregates counts per
/// ordered codec pair. A win for the pair's first codec is a
/// significant point where it has the lower DMOS (less degradation).
pub fn significance_matrix(
    diffs: &DiffTable,
    alpha: f64,
) -> Result<Vec<SignificanceCell>, SubjectiveError> {
    // Points regrouped as (sequence, rate_index) -> codec -> scores.
    let mut codecs: BTreeSet<&str> = BTreeSet::new();
    let mut points: BTreeSet<(&str, &str)> = BTreeSet::new();
    for point in diffs.keys() {
        codecs.insert(&point.codec);
        points.insert((&point.sequence, &point.rate_index));
    }
    for codec in &codecs {
        let covered: BTreeSet<(&str, &str)> = diffs
            .keys()
            .filter(|p| p.codec == *codec)
            .map(|p| (p.sequence.as_str(), p.rate_index.as_str()))
            .collect();
        if covered != points {
            let missing: Vec<String> = points
                .difference(&covered)
                .map(|(s, r)| format!("{s}/{r}"))
                .collect();
            return Err(SubjectiveError::CoverageMismatch(format!(
                "codec {codec:?} lacks {}",
                missing.join(", ")
            )));
        }
    }

    let group_of = |codec: &str, seq: &str, rate: &str| -> Vec<f64> {
        diffs
            .iter()
            .find(|(p, _)| p.codec == codec && p.sequence == seq && p.rate_index == rate)
            .map(|(_, by_subject)| by_subject.values().copied().collect())
            .expect("coverage was checked above")
    };

    let mut cells = Vec::new();
    for first in &codecs {
        for second in &codecs {
            if first == second {
                continue;
            }
            let mut cell = SignificanceCell {
                codec_pair: (first.to_string(), second.to_string()),
                n_significant: 0,
                n_total: points.len(),
                wins: 0,
                losses: 0,
            };
            for (seq, rate) in &points {
                let ga = group_of(first, seq, rate);
                let gb = group_of(second, seq, rate);
                let outcome = anova_one_way(&ga, &gb)?;
                if outcome.p < alpha {
                    cell.n_significant += 1;
                    let dmos_a = ga.iter().sum::<f64>() / ga.len() as f64;
                    let dmos_b = gb.iter().sum::<f64>() / gb.len() as f64;
                    if dmos_a < dmos_b {
                        cell.wins += 1;
                    } else {
                        cell.losses += 1;
                    }
                }
            }
            cells.push(cell);
        }
    }
    Ok(cells)
}
