//! Curve construction, per-target selection, and cross-sequence averaging.

use super::{RQCurve, RatePoint, RqError};

/// Sorts `points` by bitrate and validates them as one curve.
///
/// Every point must carry a score for `metric_id` and agree on sequence,
/// codec, and evaluation resolution. Duplicate bitrates are an error;
/// quality that fails to rise with bitrate is only worth a warning here,
/// consumers that need monotonicity (BD fits) enforce their own bound.
pub fn build_rq_curve(mut points: Vec<RatePoint>, metric_id: &str) -> Result<RQCurve, RqError> {
    if points.len() < 2 {
        return Err(RqError::FewPoints { need: 2, got: points.len() });
    }
    for p in &points {
        if !(p.bitrate_kbps > 0.0) {
            return Err(RqError::NonPositiveBitrate(p.bitrate_kbps));
        }
        p.require_score(metric_id)?;
    }
    let first = &points[0];
    if let Some(p) = points.iter().find(|p| p.sequence != first.sequence) {
        return Err(RqError::MixedCurve(format!(
            "sequences {:?} and {:?}",
            first.sequence, p.sequence
        )));
    }
    if let Some(p) = points.iter().find(|p| p.codec != first.codec) {
        return Err(RqError::MixedCurve(format!("codecs {:?} and {:?}", first.codec, p.codec)));
    }

    points.sort_by(|a, b| a.bitrate_kbps.total_cmp(&b.bitrate_kbps));
    let mut warnings = Vec::new();
    for pair in points.windows(2) {
        if pair[0].bitrate_kbps == pair[1].bitrate_kbps {
            return Err(RqError::DuplicateBitrate { kbps: pair[0].bitrate_kbps });
        }
        let (qa, qb) = (pair[0].require_score(metric_id)?, pair[1].require_score(metric_id)?);
        if qb < qa {
            warnings.push(format!(
                "quality drops from {qa} to {qb} between {} and {} kbps",
                pair[0].bitrate_kbps, pair[1].bitrate_kbps
            ));
        }
    }
    Ok(RQCurve { points, metric_id: metric_id.to_string(), warnings })
}

/// Picks the best of several encodes aimed at one rate target.
///
/// Highest `metric_id` score wins; ties go to the candidate with the
/// fewest encoded pixels, so a cheaper resolution never loses a draw.
pub fn select_per_target(
    candidates: &[RatePoint],
    metric_id: &str,
) -> Result<RatePoint, RqError> {
    if candidates.is_empty() {
        return Err(RqError::EmptyCandidates);
    }
    let mut best = &candidates[0];
    let mut best_score = best.require_score(metric_id)?;
    for cand in &candidates[1..] {
        let score = cand.require_score(metric_id)?;
        if score > best_score
            || (score == best_score && cand.encoded_pixels() < best.encoded_pixels())
        {
            best = cand;
            best_score = score;
        }
    }
    Ok(best.clone())
}

/// Arithmetic mean of aligned curves, pairing points by position.
///
/// All curves must share the metric, have equal point counts, and agree
/// on the rate-index label at each position. The result keeps per-point
/// metadata from the first curve but renames the sequence, since an
/// average no longer belongs to any single input.
pub fn average_curves(curves: &[RQCurve]) -> Result<RQCurve, RqError> {
    let first = curves.first().ok_or(RqError::EmptyCandidates)?;
    let len = first.points.len();
    let metric_id = &first.metric_id;
    for c in curves {
        if c.metric_id != *metric_id {
            return Err(RqError::MixedCurve(format!(
                "metrics {:?} and {:?}",
                metric_id, c.metric_id
            )));
        }
        if c.points.len() != len {
            return Err(RqError::MisalignedIndices(format!(
                "point counts {} and {}",
                len,
                c.points.len()
            )));
        }
    }

    let mut points = Vec::with_capacity(len);
    for i in 0..len {
        let label = &first.points[i].rate_index;
        for c in curves {
            if c.points[i].rate_index != *label {
                return Err(RqError::MisalignedIndices(format!(
                    "rate index {:?} vs {:?} at position {i}",
                    label, c.points[i].rate_index
                )));
            }
        }
        let n = curves.len() as f64;
        let rate = curves.iter().map(|c| c.points[i].bitrate_kbps).sum::<f64>() / n;
        let quality = curves
            .iter()
            .map(|c| c.points[i].require_score(metric_id))
            .sum::<Result<f64, _>>()?
            / n;

        let mut p = first.points[i].clone();
        p.sequence = "average".into();
        p.bitrate_kbps = rate;
        p.scores.clear();
        p.scores.insert(metric_id.clone(), quality);
        p.qp = f64::NAN;
        p.wall_seconds = None;
        points.push(p);
    }
    Ok(RQCurve { points, metric_id: metric_id.clone(), warnings: Vec::new() })
}
