//! Per-group evaluation of every objective metric column against the
//! subjective data, rendered as one summary row per metric.

use std::collections::{BTreeMap, BTreeSet};

use super::fit::logistic_fit;
use super::stats::{correlation_stats, CorrelationStats};
use super::CorrelationError;
use crate::subjective::DmosRecord;

/// One scored rate point carrying its objective metric columns.
#[derive(Debug, Clone)]
pub struct MetricObservation {
    pub group: String,
    pub sequence: String,
    pub codec: String,
    pub rate_index: String,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct MetricRow {
    pub metric: String,
    pub stats: CorrelationStats,
    /// Highest SROCC of its group.
    pub best_srocc: bool,
    /// |SROCC| fell below the configured floor; the column predicts
    /// about as well as shuffled labels.
    pub weak: bool,
}

#[derive(Debug, Clone)]
pub struct GroupReport {
    pub group: String,
    pub n_points: usize,
    pub rows: Vec<MetricRow>,
}

#[derive(Debug, Clone)]
pub struct MetricSuiteReport {
    pub groups: Vec<GroupReport>,
}

impl MetricSuiteReport {
    /// Plain-text table, one row per metric and group, with the best
    /// SROCC per group starred and weak columns marked.
    pub fn render_text(&self) -> String {
        let mut out = String::from(
            "group      metric   srocc / lcc / or / rmse                 n\n",
        );
        for group in &self.groups {
            for row in &group.rows {
                let mark = if row.best_srocc { "*" } else { " " };
                let weak = if row.weak { "  [weak]" } else { "" };
                out.push_str(&format!(
                    "{:<10} {:<8} {mark}{:<38} {}{weak}\n",
                    group.group,
                    row.metric,
                    row.stats.render_row(),
                    group.n_points,
                ));
            }
        }
        out
    }
}

/// Joins observations with DMOS records on (sequence, codec,
/// rate_index), then fits and scores every metric column per group.
///
/// Correlations run against subjective quality (100 - DMOS), so a
/// higher-is-better metric comes out with a positive SROCC the way the
/// published tables print it. Metric columns are the keys present on
/// every observation of a group.
pub fn evaluate_metric_suite(
    observations: &[MetricObservation],
    dmos: &[DmosRecord],
    srocc_floor: f64,
) -> Result<MetricSuiteReport, CorrelationError> {
    let mut dmos_by_key: BTreeMap<(&str, &str, &str), &DmosRecord> = BTreeMap::new();
    for rec in dmos {
        dmos_by_key.insert(
            (rec.sequence.as_str(), rec.codec.as_str(), rec.rate_index.as_str()),
            rec,
        );
    }
    let obs_keys: BTreeSet<(&str, &str, &str)> = observations
        .iter()
        .map(|o| (o.sequence.as_str(), o.codec.as_str(), o.rate_index.as_str()))
        .collect();
    let missing_dmos: Vec<String> = obs_keys
        .iter()
        .filter(|k| !dmos_by_key.contains_key(*k))
        .map(|(s, c, r)| format!("{s}/{c}/{r}"))
        .collect();
    let missing_points: Vec<String> = dmos_by_key
        .keys()
        .filter(|k| !obs_keys.contains(*k))
        .map(|(s, c, r)| format!("{s}/{c}/{r}"))
        .collect();
    if !missing_dmos.is_empty() || !missing_points.is_empty() {
        return Err(CorrelationError::JoinFailure { missing_dmos, missing_points });
    }

    let mut group_names: Vec<&str> = Vec::new();
    for obs in observations {
        if !group_names.contains(&obs.group.as_str()) {
            group_names.push(&obs.group);
        }
    }

    let mut groups = Vec::new();
    for name in group_names {
        let members: Vec<&MetricObservation> =
            observations.iter().filter(|o| o.group == name).collect();
        let mut columns: BTreeSet<&str> =
            members[0].metrics.keys().map(String::as_str).collect();
        for obs in &members {
            columns.retain(|c| obs.metrics.contains_key(*c));
        }

        let mut rows = Vec::new();
        for column in columns {
            let mut xs = Vec::with_capacity(members.len());
            let mut quality = Vec::with_capacity(members.len());
            let mut stdevs = Vec::with_capacity(members.len());
            for obs in &members {
                let rec = dmos_by_key
                    [&(obs.sequence.as_str(), obs.codec.as_str(), obs.rate_index.as_str())];
                xs.push(obs.metrics[column]);
                quality.push(100.0 - rec.dmos);
                stdevs.push(rec.stdev);
            }
            let model = logistic_fit(&xs, &quality, &stdevs)?;
            let stats = correlation_stats(&xs, &quality, &stdevs, &model)?;
            rows.push(MetricRow {
                metric: column.to_string(),
                stats,
                best_srocc: false,
                weak: stats.srocc.abs() < srocc_floor,
            });
        }
        if let Some(best) = (0..rows.len())
            .max_by(|&a, &b| rows[a].stats.srocc.total_cmp(&rows[b].stats.srocc))
        {
            rows[best].best_srocc = true;
        }
        groups.push(GroupReport { group: name.to_string(), n_points: members.len(), rows });
    }
    Ok(MetricSuiteReport { groups })
}
