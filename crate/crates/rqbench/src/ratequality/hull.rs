//! Upper convex hull over rate-quality points from several encode
//! resolutions. The hull is taken in the linear bitrate domain; its
//! vertices are the Pareto-efficient encodes a rate-adaptive system
//! would actually pick from.

use std::collections::BTreeSet;

use super::{RatePoint, RqError};

#[derive(Debug, Clone)]
pub struct ConvexHull {
    /// Hull vertices, bitrate strictly increasing, quality strictly
    /// increasing. Always a subset of the input points.
    pub vertices: Vec<RatePoint>,
    /// Distinct encode resolutions that competed for the hull.
    pub source_resolutions: BTreeSet<(u32, u32)>,
    pub metric_id: String,
}

impl ConvexHull {
    /// Piecewise-linear envelope through the vertices, extended flat
    /// beyond the last vertex. No input point lies above this line.
    pub fn envelope_quality_at(&self, bitrate_kbps: f64) -> f64 {
        let q = |p: &RatePoint| p.score(&self.metric_id).expect("validated at construction");
        let first = &self.vertices[0];
        if bitrate_kbps <= first.bitrate_kbps {
            return q(first);
        }
        for pair in self.vertices.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if bitrate_kbps <= b.bitrate_kbps {
                let t = (bitrate_kbps - a.bitrate_kbps) / (b.bitrate_kbps - a.bitrate_kbps);
                return q(a) + t * (q(b) - q(a));
            }
        }
        q(self.vertices.last().expect("hull is non-empty"))
    }
}

/// Keeps the points on the upper-left frontier: rising quality for
/// rising bitrate, with every chord between kept points lying on or
/// above the discarded ones.
///
/// Dominated points (some other point at no more bitrate and no less
/// quality) fall first; exact duplicates resolve toward the candidate
/// with fewer encoded pixels. Collinear interior points are dropped.
pub fn upper_convex_hull(
    points: &[RatePoint],
    metric_id: &str,
) -> Result<ConvexHull, RqError> {
    if points.is_empty() {
        return Err(RqError::FewPoints { need: 1, got: 0 });
    }
    let eval = points[0].evaluation_resolution;
    if let Some(p) = points.iter().find(|p| p.evaluation_resolution != eval) {
        return Err(RqError::MixedEvaluationResolution(
            format!("{}x{}", eval.0, eval.1),
            format!("{}x{}", p.evaluation_resolution.0, p.evaluation_resolution.1),
        ));
    }
    for p in points {
        if !(p.bitrate_kbps > 0.0) {
            return Err(RqError::NonPositiveBitrate(p.bitrate_kbps));
        }
        p.require_score(metric_id)?;
    }

    // Sorting by (rate asc, quality desc, pixels asc) makes dominance a
    // single running-max scan: a point survives iff its quality strictly
    // exceeds everything before it.
    let mut sorted: Vec<&RatePoint> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.bitrate_kbps
            .total_cmp(&b.bitrate_kbps)
            .then(b.require_score(metric_id).unwrap().total_cmp(&a.require_score(metric_id).unwrap()))
            .then(a.encoded_pixels().cmp(&b.encoded_pixels()))
    });
    let mut frontier: Vec<&RatePoint> = Vec::new();
    let mut best_quality = f64::NEG_INFINITY;
    for p in sorted {
        let q = p.require_score(metric_id)?;
        if q > best_quality {
            frontier.push(p);
            best_quality = q;
        }
    }

    // Monotone chain over the frontier; a middle point on or below the
    // chord of its neighbours gets popped.
    let mut stack: Vec<&RatePoint> = Vec::new();
    for p in frontier {
        let q_p = p.require_score(metric_id)?;
        while stack.len() >= 2 {
            let a = stack[stack.len() - 2];
            let b = stack[stack.len() - 1];
            let (q_a, q_b) = (a.require_score(metric_id)?, b.require_score(metric_id)?);
            let cross = (b.bitrate_kbps - a.bitrate_kbps) * (q_p - q_a)
                - (q_b - q_a) * (p.bitrate_kbps - a.bitrate_kbps);
            if cross >= 0.0 {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(p);
    }

    Ok(ConvexHull {
        vertices: stack.into_iter().cloned().collect(),
        source_resolutions: points.iter().map(|p| p.encode_resolution).collect(),
        metric_id: metric_id.to_string(),
    })
}
