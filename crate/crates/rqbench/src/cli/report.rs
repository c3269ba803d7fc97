//! CSV artifacts and text reports.
//!
//! Column order in these row structs is the file format; changing it breaks
//! the documented headers. All writers sort rows and serialize floats with
//! shortest-roundtrip formatting, so re-running a command over unchanged
//! inputs reproduces every file byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::CliError;

/// One scored encode in `rqpoints.csv`. Unmeasured metric columns stay
/// empty rather than carrying sentinels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RqRow {
    pub sequence: String,
    pub codec: String,
    pub group: String,
    pub enc_w: u32,
    pub enc_h: u32,
    pub eval_w: u32,
    pub eval_h: u32,
    /// "R1", "R2", ... for rate-targeted encodes; empty for fixed-QP runs.
    pub rate_index: String,
    pub target_kbps: Option<f64>,
    pub actual_kbps: f64,
    pub qp: f64,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub msssim: Option<f64>,
    pub vmaf: Option<f64>,
    pub subj: Option<f64>,
    pub enc_seconds: Option<f64>,
}

impl RqRow {
    /// Identity for upserts: one row per encode slot. QP participates so a
    /// fixed-QP sweep can coexist with targeted rows.
    fn key(&self) -> (String, String, u32, u32, u32, u32, String, u64) {
        (
            self.sequence.clone(),
            self.codec.clone(),
            self.enc_w,
            self.enc_h,
            self.eval_w,
            self.eval_h,
            self.rate_index.clone(),
            // QPs are non-negative, so bit order matches value order.
            self.qp.to_bits(),
        )
    }

    pub fn metric_value(&self, metric_id: &str) -> Option<f64> {
        match metric_id {
            "psnr" => self.psnr,
            "ssim" => self.ssim,
            "msssim" => self.msssim,
            "vmaf" => self.vmaf,
            "subj" => self.subj,
            _ => None,
        }
    }

    pub fn set_metric_value(&mut self, metric_id: &str, value: f64) -> bool {
        let slot = match metric_id {
            "psnr" => &mut self.psnr,
            "ssim" => &mut self.ssim,
            "msssim" => &mut self.msssim,
            "vmaf" => &mut self.vmaf,
            "subj" => &mut self.subj,
            _ => return false,
        };
        *slot = Some(value);
        true
    }
}

/// One selected (dominant) point per target in `hull.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullRow {
    pub sequence: String,
    pub codec: String,
    pub group: String,
    pub rate_index: String,
    pub target_kbps: f64,
    pub enc_w: u32,
    pub enc_h: u32,
    pub eval_w: u32,
    pub eval_h: u32,
    pub actual_kbps: f64,
    pub qp: f64,
    pub metric: String,
    pub score: f64,
}

/// One pairwise delta in `bdreport.csv`. `comparison` is "codec" for
/// codec-vs-anchor rows and "do" for hull-vs-fixed rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdRow {
    pub group: String,
    pub sequence: String,
    pub metric: String,
    pub comparison: String,
    pub anchor: String,
    pub test: String,
    pub bd_rate_percent: Option<f64>,
    pub bd_quality: Option<f64>,
    pub overlap_lo: f64,
    pub overlap_hi: f64,
}

/// One rate point in `dmos.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmosRow {
    pub sequence: String,
    pub codec: String,
    pub rate_index: String,
    pub dmos: f64,
    pub stdev: f64,
    pub n: usize,
}

/// One ordered codec pair in `significance.csv`. `cell` repeats the counts
/// in the compact "sig/total, (wins/-losses)" rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigRow {
    pub first: String,
    pub second: String,
    pub significant: usize,
    pub total: usize,
    pub wins: usize,
    pub losses: usize,
    pub cell: String,
}

/// One metric-vs-DMOS row in `correlation.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrRow {
    pub group: String,
    pub metric: String,
    pub srocc: f64,
    pub lcc: f64,
    pub or: f64,
    pub rmse: f64,
    pub n: usize,
}

/// One sequence in `siti.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SitiRow {
    pub sequence: String,
    pub width: u32,
    pub height: u32,
    pub frames: usize,
    pub si: f64,
    pub ti: f64,
}

/// One row of a target-bitrate table: `targets` is the slash-separated
/// kbps list, e.g. "1300/2250/4700/9270".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetsCsvRow {
    pub sequence: String,
    pub group: String,
    pub targets: String,
}

/// Writes `rows` as CSV with a header derived from the row type. Creates
/// parent directories as needed.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::data(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| CliError::data(format!("writing {}: {e}", path.display())))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::data(format!("flushing {}: {e}", path.display())))?;
    Ok(())
}

/// Reads a whole CSV written by [`write_csv`] (or hand-authored with the
/// same header).
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        let row: T =
            record.map_err(|e| CliError::data(format!("parsing {}: {e}", path.display())))?;
        rows.push(row);
    }
    Ok(rows)
}

/// Merges `new_rows` into `rqpoints.csv`: rows with a matching identity are
/// replaced, everything else is kept, and the file is rewritten fully
/// sorted. Running the same command twice therefore yields identical bytes.
pub fn upsert_rqpoints(path: &Path, new_rows: Vec<RqRow>) -> Result<(), CliError> {
    let mut by_key: BTreeMap<_, RqRow> = BTreeMap::new();
    if path.exists() {
        for row in read_csv::<RqRow>(path)? {
            by_key.insert(row.key(), row);
        }
    }
    for row in new_rows {
        by_key.insert(row.key(), row);
    }
    let rows: Vec<RqRow> = by_key.into_values().collect();
    write_csv(path, &rows)
}

/// Pivot of codec-comparison BD rows: sequences down, test codecs across,
/// one block per (metric, anchor), with a trailing per-column average.
pub fn render_bd_matrix(rows: &[BdRow]) -> String {
    let mut blocks: BTreeMap<(String, String), Vec<&BdRow>> = BTreeMap::new();
    for row in rows {
        blocks
            .entry((row.metric.clone(), row.anchor.clone()))
            .or_default()
            .push(row);
    }
    let mut out = String::new();
    for ((metric, anchor), rows) in blocks {
        let mut tests: Vec<String> = Vec::new();
        let mut sequences: Vec<String> = Vec::new();
        let mut cells: BTreeMap<(String, String), f64> = BTreeMap::new();
        for row in rows {
            if !tests.contains(&row.test) {
                tests.push(row.test.clone());
            }
            let seq_label = if row.comparison == "do" {
                format!("{} [do]", row.sequence)
            } else {
                row.sequence.clone()
            };
            if !sequences.contains(&seq_label) {
                sequences.push(seq_label.clone());
            }
            if let Some(v) = row.bd_rate_percent {
                cells.insert((seq_label, row.test.clone()), v);
            }
        }
        let seq_width = sequences
            .iter()
            .map(|s| s.len())
            .chain(["Average".len(), "sequence".len()])
            .max()
            .unwrap_or(8);
        let col_width = tests.iter().map(|t| t.len()).max().unwrap_or(6).max(8);

        let _ = writeln!(out, "bd-rate ({metric}), anchor {anchor}:");
        let _ = write!(out, "  {:<seq_width$}", "sequence");
        for t in &tests {
            let _ = write!(out, "  {t:>col_width$}");
        }
        out.push('\n');
        let mut sums: Vec<(f64, usize)> = vec![(0.0, 0); tests.len()];
        for seq in &sequences {
            let _ = write!(out, "  {seq:<seq_width$}");
            for (i, t) in tests.iter().enumerate() {
                match cells.get(&(seq.clone(), t.clone())) {
                    Some(&v) => {
                        let _ = write!(out, "  {:>col_width$}", format!("{v:.1}%"));
                        sums[i].0 += v;
                        sums[i].1 += 1;
                    }
                    None => {
                        let _ = write!(out, "  {:>col_width$}", "-");
                    }
                }
            }
            out.push('\n');
        }
        let _ = write!(out, "  {:<seq_width$}", "Average");
        for (sum, n) in &sums {
            if *n > 0 {
                let _ = write!(out, "  {:>col_width$}", format!("{:.1}%", sum / *n as f64));
            } else {
                let _ = write!(out, "  {:>col_width$}", "-");
            }
        }
        out.push('\n');
        out.push('\n');
    }
    out
}

fn format_kbps(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Converts a target-bitrate table into a ready-to-edit run manifest.
/// Target lists survive the round trip exactly: joining a sequence's
/// manifest targets with "/" reproduces the CSV cell byte for byte.
pub fn manifest_from_targets_csv(rows: &[TargetsCsvRow]) -> Result<String, CliError> {
    if rows.is_empty() {
        return Err(CliError::data("target table is empty"));
    }
    let mut groups: Vec<String> = Vec::new();
    for row in rows {
        if row.sequence.is_empty() {
            return Err(CliError::data("target table has a row with no sequence"));
        }
        if row.targets.is_empty() {
            return Err(CliError::data(format!(
                "sequence {} has an empty target list",
                row.sequence
            )));
        }
        for part in row.targets.split('/') {
            let value: f64 = part.trim().parse().map_err(|_| {
                CliError::data(format!(
                    "sequence {}: target {part:?} is not a number",
                    row.sequence
                ))
            })?;
            if !(value > 0.0) {
                return Err(CliError::data(format!(
                    "sequence {}: target {value} kbps is not positive",
                    row.sequence
                )));
            }
        }
        if !row.group.is_empty() && !groups.contains(&row.group) {
            groups.push(row.group.clone());
        }
    }
    let mut seen: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for row in rows {
        *seen.entry((row.sequence.as_str(), row.group.as_str())).or_default() += 1;
    }
    if let Some(((seq, group), _)) = seen.iter().find(|(_, &n)| n > 1) {
        return Err(CliError::data(format!(
            "duplicate target row for sequence {seq:?} in group {group:?}"
        )));
    }
    // The same source clip often gets one target list per resolution group;
    // manifest entries need unique names, so those get a group suffix.
    let mut name_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for row in rows {
        *name_counts.entry(row.sequence.as_str()).or_default() += 1;
    }
    let entry_name = |row: &TargetsCsvRow| -> String {
        if name_counts[row.sequence.as_str()] > 1 && !row.group.is_empty() {
            format!("{}-{}", row.sequence, row.group)
        } else {
            row.sequence.clone()
        }
    };

    let mut out = String::new();
    out.push_str("schema = 1\n");
    out.push_str("output_dir = \"out\"\n");
    out.push_str("selection_metric = \"psnr\"\n");
    out.push_str("tolerance = 0.03\n");
    out.push_str("metrics = [\"psnr\", \"ssim\", \"msssim\"]\n");
    for row in rows {
        let name = entry_name(row);
        out.push('\n');
        out.push_str("[[sequences]]\n");
        let _ = writeln!(out, "name = {name:?}");
        let _ = writeln!(out, "path = {:?}", format!("{name}.yuv"));
        if !row.group.is_empty() {
            let _ = writeln!(out, "group = {:?}", row.group);
        }
    }
    out.push('\n');
    out.push_str("[[codecs]]\n");
    out.push_str("id = \"toy\"\n");
    out.push_str("kind = \"toy\"\n");
    for group in &groups {
        out.push('\n');
        let _ = writeln!(out, "[resolution_groups.{group}]");
        let (reference, ladder) = default_group_geometry(group);
        let _ = writeln!(out, "reference = [{}, {}]", reference.0, reference.1);
        let rungs: Vec<String> = ladder
            .iter()
            .map(|(w, h)| format!("[{w}, {h}]"))
            .collect();
        let _ = writeln!(out, "ladder = [{}]", rungs.join(", "));
    }
    out.push('\n');
    out.push_str("[targets]\n");
    for row in rows {
        let list: Vec<String> = row
            .targets
            .split('/')
            .map(|p| format_kbps(p.trim().parse::<f64>().expect("validated")))
            .collect();
        let _ = writeln!(out, "{} = [{}]", toml_key(&entry_name(row)), list.join(", "));
    }
    Ok(out)
}

/// Conventional ladders for the common group names; anything else gets a
/// single-rung HD ladder to edit by hand.
fn default_group_geometry(group: &str) -> ((u32, u32), Vec<(u32, u32)>) {
    match group {
        "A" => ((3840, 2160), vec![(3840, 2160)]),
        "B" => ((1920, 1080), vec![(1920, 1080)]),
        "C" => (
            (1920, 1080),
            vec![(1920, 1080), (1280, 720), (960, 544)],
        ),
        _ => ((1920, 1080), vec![(1920, 1080)]),
    }
}

fn toml_key(name: &str) -> String {
    let bare = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if bare {
        name.to_string()
    } else {
        format!("{name:?}")
    }
}
