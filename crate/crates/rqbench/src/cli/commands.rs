//! Command implementations behind the argument parser.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Deserialize;

use crate::codecs::{
    encode_with_qp, target_bitrate_search, CodecError, EncodeResult, EncoderAdapter,
};
use crate::correlation::{evaluate_metric_suite, CorrelationError, MetricObservation};
use crate::media::{write_raw_video, VideoSequence};
use crate::metrics::{
    external_metric, ms_ssim, psnr, si_ti, ssim, ExternalMetricTool, MetricError, PsnrMode,
    StreamGeometry,
};
use crate::ratequality::{bd_rate, build_rq_curve, select_per_target, RatePoint, RqError};
use crate::resample::resize_sequence;
use crate::subjective::{
    compute_dmos, difference_scores, screen_subjects, significance_matrix, DmosRecord,
    SubjectiveError, TrialScore,
};

use super::manifest::{RunManifest, SequenceEntry};
use super::plot::{line_plot, PlotSeries};
use super::report::{
    manifest_from_targets_csv, read_csv, render_bd_matrix, upsert_rqpoints, write_csv, BdRow,
    CorrRow, DmosRow, HullRow, RqRow, SigRow, SitiRow, TargetsCsvRow,
};
use super::{CliArgs, CliError, CommandKind};

pub(super) fn dispatch(args: CliArgs) -> Result<(), CliError> {
    // Two commands have manifest-free modes; everything else runs in a
    // full context.
    match &args.command {
        CommandKind::Bd {
            curve_a: Some(a),
            curve_b: Some(b),
            ..
        } => return bd_standalone(a, b),
        CommandKind::Report {
            targets_csv: Some(path),
            emit_manifest,
            ..
        } => return report_targets(path, emit_manifest.as_deref()),
        CommandKind::Report {
            bdreport: Some(path),
            ..
        } if args.manifest.is_none() => return report_matrix(path),
        _ => {}
    }
    let ctx = Ctx::new(&args)?;
    match &args.command {
        CommandKind::Encode { qp } => cmd_encode(&ctx, *qp),
        CommandKind::Target => cmd_target(&ctx),
        CommandKind::Ladder => cmd_ladder(&ctx),
        CommandKind::Hull => cmd_hull(&ctx),
        CommandKind::Bd { anchor, .. } => cmd_bd(&ctx, anchor.as_deref()),
        CommandKind::Dmos { scores } => cmd_dmos(&ctx, scores),
        CommandKind::Anova { scores, alpha } => cmd_anova(&ctx, scores, *alpha),
        CommandKind::Correlate { dmos, srocc_floor } => {
            cmd_correlate(&ctx, dmos.as_deref(), *srocc_floor)
        }
        CommandKind::Siti => cmd_siti(&ctx),
        CommandKind::Report { bdreport, .. } => {
            let path = match bdreport {
                Some(p) => p.clone(),
                None => ctx.out.join("bdreport.csv"),
            };
            report_matrix(&path)
        }
    }
}

struct Ctx {
    manifest: RunManifest,
    /// Directory of the manifest file; relative sequence paths resolve here.
    base: PathBuf,
    out: PathBuf,
    jobs: usize,
    group: Option<String>,
    metric: Option<String>,
    tolerance: Option<f64>,
    with_timestamp: bool,
    timing: bool,
}

impl Ctx {
    fn new(args: &CliArgs) -> Result<Self, CliError> {
        let path = args
            .manifest
            .as_ref()
            .ok_or_else(|| CliError::manifest("this command needs --manifest"))?;
        let manifest = RunManifest::load(path)?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or_else(|| PathBuf::from("."));
        let out = if manifest.output_dir.is_absolute() {
            manifest.output_dir.clone()
        } else {
            base.join(&manifest.output_dir)
        };
        if let Some(metric) = &args.metric {
            if !manifest.configured_metrics().iter().any(|m| m == metric) {
                return Err(CliError::manifest(format!(
                    "--metric {metric:?} is not configured in the manifest"
                )));
            }
        }
        if let Some(t) = args.tolerance {
            if !(t > 0.0) {
                return Err(CliError::manifest(format!("--tolerance {t} is not positive")));
            }
        }
        if args.jobs == 0 {
            return Err(CliError::manifest("--jobs must be at least 1"));
        }
        let jobs = if args.timing && args.jobs > 1 {
            eprintln!("rqbench: --timing forces --jobs 1 for stable measurements");
            1
        } else {
            args.jobs
        };
        if let Some(group) = &args.group {
            let known = manifest
                .sequences
                .iter()
                .any(|s| s.group.as_deref() == Some(group));
            if !known {
                return Err(CliError::manifest(format!(
                    "--group {group:?} matches no sequence in the manifest"
                )));
            }
        }
        Ok(Ctx {
            manifest,
            base,
            out,
            jobs,
            group: args.group.clone(),
            metric: args.metric.clone(),
            tolerance: args.tolerance,
            with_timestamp: !args.no_timestamp,
            timing: args.timing,
        })
    }

    fn selection_metric(&self) -> &str {
        self.metric
            .as_deref()
            .unwrap_or(&self.manifest.selection_metric)
    }

    fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(self.manifest.tolerance)
    }

    fn selected_entries(&self) -> Vec<&SequenceEntry> {
        self.manifest
            .sequences
            .iter()
            .filter(|s| match &self.group {
                Some(g) => s.group.as_deref() == Some(g),
                None => true,
            })
            .collect()
    }

    fn adapters(&self) -> Result<Vec<EncoderAdapter>, CliError> {
        self.manifest.codecs.iter().map(|c| c.build()).collect()
    }

    fn timestamp(&self) -> Option<String> {
        if !self.with_timestamp {
            return None;
        }
        let seconds = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Some(format!("unix {seconds}"))
    }

    /// Targets for one sequence, in R1.. order.
    fn targets_for(&self, name: &str) -> Result<&[f64], CliError> {
        self.manifest
            .targets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| {
                CliError::manifest(format!("manifest defines no targets for sequence {name}"))
            })
    }

    /// Ladder rungs and reference resolution for one sequence.
    fn geometry_for(&self, entry: &SequenceEntry, native: (u32, u32)) -> ((u32, u32), Vec<(u32, u32)>) {
        if let Some(group) = &entry.group {
            if let Some(rg) = self.manifest.resolution_groups.get(group) {
                let reference = (rg.reference[0], rg.reference[1]);
                let rungs = rg.ladder.iter().map(|&[w, h]| (w, h)).collect();
                return (reference, rungs);
            }
        }
        (native, vec![native])
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::process(format!("cannot build worker pool: {e}")))
    }
}

fn map_metric_error(e: MetricError) -> CliError {
    match &e {
        MetricError::ToolFailure { .. } => CliError::process(e.to_string()),
        _ => CliError::data(e.to_string()),
    }
}

fn map_rq_error(e: RqError) -> CliError {
    CliError::data(e.to_string())
}

fn map_subjective_error(e: SubjectiveError) -> CliError {
    CliError::data(e.to_string())
}

fn map_correlation_error(e: CorrelationError) -> CliError {
    CliError::data(e.to_string())
}

/// The metric columns a run computes, split into built-in and external.
struct MetricSet {
    native: Vec<String>,
    external: Vec<ExternalMetricTool>,
}

impl MetricSet {
    fn from_manifest(manifest: &RunManifest) -> Self {
        let mut native = Vec::new();
        let mut external = Vec::new();
        for id in manifest.configured_metrics() {
            if let Some(tool) = manifest.external_metrics.iter().find(|e| e.id == id) {
                external.push(ExternalMetricTool {
                    metric_id: tool.id.clone(),
                    command_template: tool.command_template.clone(),
                    score_pattern: tool.score_pattern.clone(),
                    version_command: None,
                });
            } else {
                native.push(id);
            }
        }
        MetricSet { native, external }
    }
}

/// Scores `recon` against `reference` (same geometry) for every configured
/// metric.
fn score_pair(
    set: &MetricSet,
    reference: &VideoSequence,
    recon: &VideoSequence,
) -> Result<BTreeMap<String, f64>, CliError> {
    let mut scores = BTreeMap::new();
    for id in &set.native {
        let score = match id.as_str() {
            "psnr" => psnr(reference, recon, PsnrMode::Luma),
            "ssim" => ssim(reference, recon),
            "msssim" => ms_ssim(reference, recon),
            other => {
                return Err(CliError::manifest(format!(
                    "metric {other:?} has no built-in implementation"
                )))
            }
        }
        .map_err(map_metric_error)?;
        scores.insert(id.clone(), score.value);
    }
    if !set.external.is_empty() {
        let dir = tempfile::tempdir()
            .map_err(|e| CliError::process(format!("cannot create temp dir: {e}")))?;
        let ref_path = dir.path().join("reference.yuv");
        let dist_path = dir.path().join("distorted.yuv");
        write_raw_video(reference, &ref_path)
            .map_err(|e| CliError::process(format!("writing temp video: {e}")))?;
        write_raw_video(recon, &dist_path)
            .map_err(|e| CliError::process(format!("writing temp video: {e}")))?;
        let geometry = StreamGeometry {
            width: reference.width(),
            height: reference.height(),
            fps: reference.fps.as_f64(),
            bit_depth: reference.bit_depth(),
        };
        for tool in &set.external {
            let scored = external_metric(tool, &ref_path, &dist_path, geometry.clone())
                .map_err(map_metric_error)?;
            scores.insert(tool.metric_id.clone(), scored.score.value);
        }
    }
    Ok(scores)
}

/// One scored encode, both as the CSV row and as the in-memory point the
/// rate-quality operators consume.
struct ScoredEncode {
    row: RqRow,
    point: RatePoint,
}

#[allow(clippy::too_many_arguments)]
fn scored_encode(
    ctx: &Ctx,
    sequence: &str,
    group: &str,
    codec: &str,
    enc_res: (u32, u32),
    eval_res: (u32, u32),
    rate: Option<(usize, f64)>,
    result: &EncodeResult,
    scores: BTreeMap<String, f64>,
) -> ScoredEncode {
    let rate_index = rate.map(|(i, _)| format!("R{}", i + 1)).unwrap_or_default();
    let mut row = RqRow {
        sequence: sequence.to_string(),
        codec: codec.to_string(),
        group: group.to_string(),
        enc_w: enc_res.0,
        enc_h: enc_res.1,
        eval_w: eval_res.0,
        eval_h: eval_res.1,
        rate_index: rate_index.clone(),
        target_kbps: rate.map(|(_, t)| t),
        actual_kbps: result.bitrate_kbps,
        qp: result.qp,
        psnr: None,
        ssim: None,
        msssim: None,
        vmaf: None,
        subj: None,
        enc_seconds: ctx.timing.then_some(result.wall_seconds),
    };
    for (id, value) in &scores {
        row.set_metric_value(id, *value);
    }
    let point = RatePoint {
        sequence: sequence.to_string(),
        codec: codec.to_string(),
        encode_resolution: enc_res,
        evaluation_resolution: eval_res,
        qp: result.qp,
        bitrate_kbps: result.bitrate_kbps,
        scores,
        rate_index: (!rate_index.is_empty()).then_some(rate_index),
        wall_seconds: ctx.timing.then_some(result.wall_seconds),
    };
    ScoredEncode { row, point }
}

/// Work order for one rate-targeted encode at one ladder rung.
struct EncodeJob {
    sequence: String,
    group: String,
    adapter_index: usize,
    rate_index: usize,
    target_kbps: f64,
    rung: (u32, u32),
    reference_res: (u32, u32),
    source: Arc<VideoSequence>,
    reference: Arc<VideoSequence>,
}

/// Rate-targets one encode. Strict mode is the `target` command's contract:
/// a miss is an error. Ladder rungs instead take the closest achievable
/// rate, because a fixed target cannot sit inside every rung's quantizer
/// granularity at once; selection then works on actual rates.
fn rate_matched_encode(
    adapter: &EncoderAdapter,
    seq: &VideoSequence,
    target_kbps: f64,
    tolerance: f64,
    strict: bool,
) -> Result<EncodeResult, CodecError> {
    match target_bitrate_search(adapter, seq, target_kbps, tolerance) {
        Ok(outcome) => Ok(outcome.achieved),
        Err(CodecError::TargetUnreachable {
            qp_lo,
            rate_lo,
            qp_hi,
            rate_hi,
            ..
        }) if !strict => {
            let d_lo = (rate_lo - target_kbps).abs();
            let d_hi = (rate_hi - target_kbps).abs();
            let qp = if d_lo <= d_hi { qp_lo } else { qp_hi };
            encode_with_qp(adapter, seq, qp.round() as i32)
        }
        Err(e) => Err(e),
    }
}

fn run_encode_jobs(
    ctx: &Ctx,
    adapters: &[EncoderAdapter],
    set: &MetricSet,
    jobs: Vec<EncodeJob>,
    strict: bool,
) -> Result<Vec<ScoredEncode>, CliError> {
    let pool = ctx.pool()?;
    pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let adapter = &adapters[job.adapter_index];
                let achieved = rate_matched_encode(
                    adapter,
                    &job.source,
                    job.target_kbps,
                    ctx.tolerance(),
                    strict,
                )
                .map_err(|e| {
                    annotate_codec_error(e, &job.sequence, &adapter.codec_id, job.rung)
                })?;
                let recon = if job.rung == job.reference_res {
                    achieved.recon.clone()
                } else {
                    resize_sequence(&achieved.recon, job.reference_res)
                        .map_err(|e| CliError::data(e.to_string()))?
                };
                let scores = score_pair(set, &job.reference, &recon)?;
                Ok(scored_encode(
                    ctx,
                    &job.sequence,
                    &job.group,
                    &adapter.codec_id,
                    job.rung,
                    job.reference_res,
                    Some((job.rate_index, job.target_kbps)),
                    &achieved,
                    scores,
                ))
            })
            .collect()
    })
}

fn annotate_codec_error(
    e: CodecError,
    sequence: &str,
    codec: &str,
    rung: (u32, u32),
) -> CliError {
    let base = CliError::from(e);
    let detail = format!(
        "{sequence}/{codec} at {}x{}: {base}",
        rung.0, rung.1
    );
    match base {
        CliError::Manifest(_) => CliError::Manifest(detail),
        CliError::Process(_) => CliError::Process(detail),
        CliError::Data(_) => CliError::Data(detail),
    }
}

/// Builds the job list for `cmd_target` (native resolution only) or the
/// ladder commands (every rung, scored at the group reference).
fn build_jobs(ctx: &Ctx, use_ladder: bool) -> Result<Vec<EncodeJob>, CliError> {
    let mut jobs = Vec::new();
    for entry in ctx.selected_entries() {
        let name = entry.display_name();
        let source = Arc::new(entry.load(&ctx.base)?);
        let native = (source.width(), source.height());
        let (reference_res, rungs) = if use_ladder {
            ctx.geometry_for(entry, native)
        } else {
            (native, vec![native])
        };
        let reference = if reference_res == native {
            Arc::clone(&source)
        } else {
            Arc::new(
                resize_sequence(&source, reference_res)
                    .map_err(|e| CliError::data(e.to_string()))?,
            )
        };
        let targets = ctx.targets_for(&name)?;
        let group = entry.group.clone().unwrap_or_default();
        for rung in rungs {
            let rung_source = if rung == native {
                Arc::clone(&source)
            } else {
                Arc::new(
                    resize_sequence(&source, rung)
                        .map_err(|e| CliError::data(e.to_string()))?,
                )
            };
            for (rate_index, &target_kbps) in targets.iter().enumerate() {
                for adapter_index in 0..ctx.manifest.codecs.len() {
                    jobs.push(EncodeJob {
                        sequence: name.clone(),
                        group: group.clone(),
                        adapter_index,
                        rate_index,
                        target_kbps,
                        rung,
                        reference_res,
                        source: Arc::clone(&rung_source),
                        reference: Arc::clone(&reference),
                    });
                }
            }
        }
    }
    Ok(jobs)
}

fn cmd_encode(ctx: &Ctx, qp: i32) -> Result<(), CliError> {
    let adapters = ctx.adapters()?;
    let set = MetricSet::from_manifest(&ctx.manifest);
    let mut work = Vec::new();
    for entry in ctx.selected_entries() {
        let name = entry.display_name();
        let source = Arc::new(entry.load(&ctx.base)?);
        let group = entry.group.clone().unwrap_or_default();
        for adapter_index in 0..adapters.len() {
            work.push((name.clone(), group.clone(), Arc::clone(&source), adapter_index));
        }
    }
    let pool = ctx.pool()?;
    let encodes: Result<Vec<ScoredEncode>, CliError> = pool.install(|| {
        work.par_iter()
            .map(|(name, group, source, adapter_index)| {
                let adapter = &adapters[*adapter_index];
                let native = (source.width(), source.height());
                let result = encode_with_qp(adapter, source, qp)
                    .map_err(|e| annotate_codec_error(e, name, &adapter.codec_id, native))?;
                let scores = score_pair(&set, source, &result.recon)?;
                Ok(scored_encode(
                    ctx, name, group, &adapter.codec_id, native, native, None, &result, scores,
                ))
            })
            .collect()
    });
    let encodes = encodes?;
    let rows: Vec<RqRow> = encodes.iter().map(|e| e.row.clone()).collect();
    upsert_rqpoints(&ctx.out.join("rqpoints.csv"), rows)?;
    println!(
        "encoded {} point(s) at qp {qp} -> {}",
        encodes.len(),
        ctx.out.join("rqpoints.csv").display()
    );
    Ok(())
}

fn cmd_target(ctx: &Ctx) -> Result<(), CliError> {
    let adapters = ctx.adapters()?;
    let set = MetricSet::from_manifest(&ctx.manifest);
    let jobs = build_jobs(ctx, false)?;
    let encodes = run_encode_jobs(ctx, &adapters, &set, jobs, true)?;
    let rows: Vec<RqRow> = encodes.iter().map(|e| e.row.clone()).collect();
    upsert_rqpoints(&ctx.out.join("rqpoints.csv"), rows)?;
    for e in &encodes {
        let target = e.row.target_kbps.unwrap_or(0.0);
        let rel = (e.row.actual_kbps - target) / target;
        println!(
            "{}/{} {}: target {} kbps, achieved {:.3} kbps (qp {}, {:+.2}%)",
            e.row.sequence,
            e.row.codec,
            e.row.rate_index,
            target,
            e.row.actual_kbps,
            e.row.qp,
            rel * 100.0
        );
    }
    Ok(())
}

fn cmd_ladder(ctx: &Ctx) -> Result<(), CliError> {
    let encodes = ladder_encodes(ctx)?;
    let rows: Vec<RqRow> = encodes.iter().map(|e| e.row.clone()).collect();
    upsert_rqpoints(&ctx.out.join("rqpoints.csv"), rows)?;
    println!(
        "ladder produced {} candidate point(s) -> {}",
        encodes.len(),
        ctx.out.join("rqpoints.csv").display()
    );
    Ok(())
}

fn ladder_encodes(ctx: &Ctx) -> Result<Vec<ScoredEncode>, CliError> {
    let adapters = ctx.adapters()?;
    let set = MetricSet::from_manifest(&ctx.manifest);
    let jobs = build_jobs(ctx, true)?;
    run_encode_jobs(ctx, &adapters, &set, jobs, false)
}

fn cmd_hull(ctx: &Ctx) -> Result<(), CliError> {
    let metric = ctx.selection_metric().to_string();
    let encodes = ladder_encodes(ctx)?;
    let rows: Vec<RqRow> = encodes.iter().map(|e| e.row.clone()).collect();
    upsert_rqpoints(&ctx.out.join("rqpoints.csv"), rows)?;

    // Candidates per (sequence, codec, rate index); selection keeps the
    // best-scoring rung per target.
    let mut groups: BTreeMap<(String, String, String), Vec<&ScoredEncode>> = BTreeMap::new();
    for e in &encodes {
        groups
            .entry((
                e.row.sequence.clone(),
                e.row.codec.clone(),
                e.row.rate_index.clone(),
            ))
            .or_default()
            .push(e);
    }
    let mut hull_rows = Vec::new();
    for ((sequence, codec, rate_index), candidates) in &groups {
        let points: Vec<RatePoint> = candidates.iter().map(|e| e.point.clone()).collect();
        let selected = select_per_target(&points, &metric).map_err(map_rq_error)?;
        let winner = candidates
            .iter()
            .find(|e| e.point == selected)
            .expect("selected point comes from candidates");
        hull_rows.push(HullRow {
            sequence: sequence.clone(),
            codec: codec.clone(),
            group: winner.row.group.clone(),
            rate_index: rate_index.clone(),
            target_kbps: winner.row.target_kbps.unwrap_or(0.0),
            enc_w: winner.row.enc_w,
            enc_h: winner.row.enc_h,
            eval_w: winner.row.eval_w,
            eval_h: winner.row.eval_h,
            actual_kbps: winner.row.actual_kbps,
            qp: winner.row.qp,
            metric: metric.clone(),
            score: selected.score(&metric).expect("selection checked the score"),
        });
    }
    hull_rows.sort_by(|a, b| {
        (&a.sequence, &a.codec, &a.rate_index).cmp(&(&b.sequence, &b.codec, &b.rate_index))
    });
    write_csv(&ctx.out.join("hull.csv"), &hull_rows)?;
    write_hull_plots(ctx, &metric, &encodes, &hull_rows)?;
    println!(
        "selected {} hull point(s) -> {}",
        hull_rows.len(),
        ctx.out.join("hull.csv").display()
    );
    Ok(())
}

/// Rate-quality plot per sequence/codec (one series per rung plus the
/// selected envelope) and one fixed-vs-selected overlay per codec averaged
/// over sequences.
fn write_hull_plots(
    ctx: &Ctx,
    metric: &str,
    encodes: &[ScoredEncode],
    hull_rows: &[HullRow],
) -> Result<(), CliError> {
    let timestamp = ctx.timestamp();
    let plot_dir = ctx.out.join("plots");

    let mut by_seq_codec: BTreeMap<(String, String), Vec<&ScoredEncode>> = BTreeMap::new();
    for e in encodes {
        by_seq_codec
            .entry((e.row.sequence.clone(), e.row.codec.clone()))
            .or_default()
            .push(e);
    }
    for ((sequence, codec), points) in &by_seq_codec {
        let mut series: Vec<PlotSeries> = Vec::new();
        let mut rungs: BTreeMap<(u32, u32), Vec<(f64, f64)>> = BTreeMap::new();
        for e in points {
            if let Some(score) = e.row.metric_value(metric) {
                rungs
                    .entry((e.row.enc_w, e.row.enc_h))
                    .or_default()
                    .push((e.row.actual_kbps, score));
            }
        }
        for ((w, h), mut pts) in rungs {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            series.push(PlotSeries::new(format!("{w}x{h}"), pts));
        }
        let mut selected: Vec<(f64, f64)> = hull_rows
            .iter()
            .filter(|r| &r.sequence == sequence && &r.codec == codec)
            .map(|r| (r.actual_kbps, r.score))
            .collect();
        selected.sort_by(|a, b| a.0.total_cmp(&b.0));
        if !selected.is_empty() {
            series.push(PlotSeries::new("selected", selected));
        }
        let svg = line_plot(
            &format!("{sequence} / {codec}"),
            "bitrate (kbps)",
            metric,
            &series,
            timestamp.as_deref(),
        );
        write_text(&plot_dir.join(format!("rq_{sequence}_{codec}.svg")), &svg)?;
    }

    // Overlay: per codec, average each rung's curve and the selected curve
    // across sequences by rate index.
    let mut codecs: Vec<String> = Vec::new();
    for e in encodes {
        if !codecs.contains(&e.row.codec) {
            codecs.push(e.row.codec.clone());
        }
    }
    for codec in &codecs {
        let mut series = Vec::new();
        let mut rung_curves: BTreeMap<(u32, u32), BTreeMap<String, Vec<(f64, f64)>>> =
            BTreeMap::new();
        for e in encodes {
            if &e.row.codec != codec || e.row.rate_index.is_empty() {
                continue;
            }
            if let Some(score) = e.row.metric_value(metric) {
                rung_curves
                    .entry((e.row.enc_w, e.row.enc_h))
                    .or_default()
                    .entry(e.row.rate_index.clone())
                    .or_default()
                    .push((e.row.actual_kbps, score));
            }
        }
        for ((w, h), by_index) in rung_curves {
            series.push(PlotSeries::new(
                format!("fixed {w}x{h}"),
                mean_curve(by_index),
            ));
        }
        let mut hull_by_index: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for r in hull_rows {
            if &r.codec == codec {
                hull_by_index
                    .entry(r.rate_index.clone())
                    .or_default()
                    .push((r.actual_kbps, r.score));
            }
        }
        if !hull_by_index.is_empty() {
            series.push(PlotSeries::new("selected", mean_curve(hull_by_index)));
        }
        let svg = line_plot(
            &format!("{codec}: fixed ladder vs per-target selection"),
            "bitrate (kbps)",
            metric,
            &series,
            timestamp.as_deref(),
        );
        write_text(&plot_dir.join(format!("do_overlay_{codec}.svg")), &svg)?;
    }
    Ok(())
}

/// Averages per-rate-index point clouds into one curve, sorted by rate.
fn mean_curve(by_index: BTreeMap<String, Vec<(f64, f64)>>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = by_index
        .values()
        .filter(|pts| !pts.is_empty())
        .map(|pts| {
            let n = pts.len() as f64;
            let rate = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let quality = pts.iter().map(|p| p.1).sum::<f64>() / n;
            (rate, quality)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::data(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

#[derive(Debug, Deserialize)]
struct CurveCsvRow {
    bitrate_kbps: f64,
    quality: f64,
}

fn read_curve(path: &Path) -> Result<Vec<RatePoint>, CliError> {
    let rows: Vec<CurveCsvRow> = read_csv(path)?;
    Ok(rows
        .into_iter()
        .map(|r| RatePoint::synthetic(r.bitrate_kbps, "quality", r.quality))
        .collect())
}

fn fmt_opt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Manifest-free BD between two curve files.
fn bd_standalone(a: &Path, b: &Path) -> Result<(), CliError> {
    let anchor = build_rq_curve(read_curve(a)?, "quality").map_err(map_rq_error)?;
    let test = build_rq_curve(read_curve(b)?, "quality").map_err(map_rq_error)?;
    let bd = bd_rate(&anchor, &test).map_err(map_rq_error)?;
    let name = |p: &Path| {
        p.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string())
    };
    println!("anchor,test,bd_rate_percent,bd_quality,overlap_lo,overlap_hi");
    println!(
        "{},{},{},{},{},{}",
        name(a),
        name(b),
        fmt_opt(bd.bd_rate_percent),
        fmt_opt(bd.bd_quality),
        bd.overlap_interval.0,
        bd.overlap_interval.1
    );
    Ok(())
}

type CurveKey = (String, String, String);

/// Rate-indexed fixed-resolution curves from rqpoints rows, keyed by
/// (group, sequence, codec).
fn fixed_curves(rows: &[RqRow], metric: &str) -> BTreeMap<CurveKey, Vec<RatePoint>> {
    let mut curves: BTreeMap<CurveKey, Vec<RatePoint>> = BTreeMap::new();
    for row in rows {
        if row.rate_index.is_empty() {
            continue;
        }
        if (row.enc_w, row.enc_h) != (row.eval_w, row.eval_h) {
            continue;
        }
        if let Some(score) = row.metric_value(metric) {
            curves
                .entry((row.group.clone(), row.sequence.clone(), row.codec.clone()))
                .or_default()
                .push(RatePoint::synthetic(row.actual_kbps, metric, score));
        }
    }
    curves
}

fn cmd_bd(ctx: &Ctx, anchor: Option<&str>) -> Result<(), CliError> {
    let metric = ctx.selection_metric().to_string();
    let rq_path = ctx.out.join("rqpoints.csv");
    if !rq_path.exists() {
        return Err(CliError::data(format!(
            "{} not found; run target, ladder or hull first",
            rq_path.display()
        )));
    }
    let rows: Vec<RqRow> = read_csv(&rq_path)?;
    let anchor_codec = anchor
        .map(str::to_string)
        .unwrap_or_else(|| ctx.manifest.codecs[0].id.clone());
    if !ctx.manifest.codecs.iter().any(|c| c.id == anchor_codec) {
        return Err(CliError::manifest(format!(
            "anchor codec {anchor_codec:?} is not in the manifest"
        )));
    }

    let curves = fixed_curves(&rows, &metric);
    let mut bd_rows: Vec<BdRow> = Vec::new();

    // Codec-vs-anchor deltas on fixed-resolution curves.
    let mut arenas: BTreeMap<(String, String), Vec<&CurveKey>> = BTreeMap::new();
    for key in curves.keys() {
        arenas
            .entry((key.0.clone(), key.1.clone()))
            .or_default()
            .push(key);
    }
    for ((group, sequence), keys) in &arenas {
        let anchor_key = (group.clone(), sequence.clone(), anchor_codec.clone());
        let Some(anchor_points) = curves.get(&anchor_key) else {
            continue;
        };
        let anchor_curve =
            build_rq_curve(anchor_points.clone(), &metric).map_err(map_rq_error)?;
        for key in keys {
            if key.2 == anchor_codec {
                continue;
            }
            let test_curve =
                build_rq_curve(curves[*key].clone(), &metric).map_err(map_rq_error)?;
            let bd = bd_rate(&anchor_curve, &test_curve).map_err(map_rq_error)?;
            bd_rows.push(BdRow {
                group: group.clone(),
                sequence: sequence.clone(),
                metric: metric.clone(),
                comparison: "codec".into(),
                anchor: anchor_codec.clone(),
                test: key.2.clone(),
                bd_rate_percent: (!bd.bd_rate_percent.is_nan()).then_some(bd.bd_rate_percent),
                bd_quality: (!bd.bd_quality.is_nan()).then_some(bd.bd_quality),
                overlap_lo: bd.overlap_interval.0,
                overlap_hi: bd.overlap_interval.1,
            });
        }
    }

    // Per-target selection vs the same codec's reference-resolution curve.
    let hull_path = ctx.out.join("hull.csv");
    if hull_path.exists() {
        let hull_rows: Vec<HullRow> = read_csv(&hull_path)?;
        let mut hull_curves: BTreeMap<CurveKey, Vec<RatePoint>> = BTreeMap::new();
        for row in &hull_rows {
            if row.metric != metric {
                continue;
            }
            hull_curves
                .entry((row.group.clone(), row.sequence.clone(), row.codec.clone()))
                .or_default()
                .push(RatePoint::synthetic(row.actual_kbps, &metric, row.score));
        }
        for (key, points) in hull_curves {
            let Some(fixed_points) = curves.get(&key) else {
                continue;
            };
            let fixed_curve =
                build_rq_curve(fixed_points.clone(), &metric).map_err(map_rq_error)?;
            let hull_curve = build_rq_curve(points, &metric).map_err(map_rq_error)?;
            let bd = bd_rate(&fixed_curve, &hull_curve).map_err(map_rq_error)?;
            bd_rows.push(BdRow {
                group: key.0.clone(),
                sequence: key.1.clone(),
                metric: metric.clone(),
                comparison: "do".into(),
                anchor: key.2.clone(),
                test: format!("{}:do", key.2),
                bd_rate_percent: (!bd.bd_rate_percent.is_nan()).then_some(bd.bd_rate_percent),
                bd_quality: (!bd.bd_quality.is_nan()).then_some(bd.bd_quality),
                overlap_lo: bd.overlap_interval.0,
                overlap_hi: bd.overlap_interval.1,
            });
        }
    }

    if bd_rows.is_empty() {
        return Err(CliError::data(
            "no comparable rate-indexed curves found in rqpoints.csv",
        ));
    }
    bd_rows.sort_by(|a, b| {
        (&a.metric, &a.comparison, &a.anchor, &a.test, &a.group, &a.sequence).cmp(&(
            &b.metric,
            &b.comparison,
            &b.anchor,
            &b.test,
            &b.group,
            &b.sequence,
        ))
    });
    write_csv(&ctx.out.join("bdreport.csv"), &bd_rows)?;
    print!("{}", render_bd_matrix(&bd_rows));
    Ok(())
}

#[derive(Debug, Deserialize)]
struct TrialCsvRow {
    subject_id: String,
    sequence: String,
    codec: String,
    rate_index: String,
    score_reference: f64,
    score_distorted: f64,
}

fn read_trials(path: &Path) -> Result<Vec<TrialScore>, CliError> {
    let rows: Vec<TrialCsvRow> = read_csv(path)?;
    if rows.is_empty() {
        return Err(CliError::data(format!("{} holds no trials", path.display())));
    }
    Ok(rows
        .into_iter()
        .map(|r| TrialScore {
            subject_id: r.subject_id,
            sequence: r.sequence,
            codec: r.codec,
            rate_index: r.rate_index,
            score_reference: r.score_reference,
            score_distorted: r.score_distorted,
        })
        .collect())
}

/// Screens subjects when the panel is large enough; smaller panels pass
/// through with a notice.
fn screened_trials(trials: Vec<TrialScore>) -> Result<Vec<TrialScore>, CliError> {
    match screen_subjects(&trials) {
        Ok(report) => {
            println!(
                "screening: {} subject(s) retained, {} rejected",
                report.retained.len(),
                report.rejected.len()
            );
            for diag in &report.diagnostics {
                if diag.rejected {
                    println!(
                        "  rejected {}: {} above / {} below over {} scores",
                        diag.subject_id, diag.p_above, diag.q_below, diag.n_scores
                    );
                }
            }
            let rejected = report.rejected;
            Ok(trials
                .into_iter()
                .filter(|t| !rejected.contains(&t.subject_id))
                .collect())
        }
        Err(SubjectiveError::FewSubjects { need, got }) => {
            eprintln!("rqbench: panel of {got} below screening minimum {need}; keeping everyone");
            Ok(trials)
        }
        Err(e) => Err(map_subjective_error(e)),
    }
}

fn cmd_dmos(ctx: &Ctx, scores: &Path) -> Result<(), CliError> {
    let trials = screened_trials(read_trials(scores)?)?;
    let diffs = difference_scores(&trials).map_err(map_subjective_error)?;
    let records = compute_dmos(&diffs).map_err(map_subjective_error)?;
    let mut rows: Vec<DmosRow> = records
        .iter()
        .map(|r| DmosRow {
            sequence: r.sequence.clone(),
            codec: r.codec.clone(),
            rate_index: r.rate_index.clone(),
            dmos: r.dmos,
            stdev: r.stdev,
            n: r.n_subjects,
        })
        .collect();
    rows.sort_by(|a, b| {
        (&a.sequence, &a.codec, &a.rate_index).cmp(&(&b.sequence, &b.codec, &b.rate_index))
    });
    for row in &rows {
        if row.dmos < 0.0 {
            println!(
                "note: {}/{}/{} dmos {:.2} is negative (distorted rated above the reference)",
                row.sequence, row.codec, row.rate_index, row.dmos
            );
        }
    }
    write_csv(&ctx.out.join("dmos.csv"), &rows)?;
    println!(
        "wrote {} rate point(s) -> {}",
        rows.len(),
        ctx.out.join("dmos.csv").display()
    );
    Ok(())
}

fn cmd_anova(ctx: &Ctx, scores: &Path, alpha: f64) -> Result<(), CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::manifest(format!(
            "--alpha {alpha} must lie strictly between 0 and 1"
        )));
    }
    let trials = screened_trials(read_trials(scores)?)?;
    let diffs = difference_scores(&trials).map_err(map_subjective_error)?;
    let cells = significance_matrix(&diffs, alpha).map_err(map_subjective_error)?;
    let mut rows: Vec<SigRow> = cells
        .iter()
        .map(|c| SigRow {
            first: c.codec_pair.0.clone(),
            second: c.codec_pair.1.clone(),
            significant: c.n_significant,
            total: c.n_total,
            wins: c.wins,
            losses: c.losses,
            cell: c.render(),
        })
        .collect();
    rows.sort_by(|a, b| (&a.first, &a.second).cmp(&(&b.first, &b.second)));
    for row in &rows {
        println!("{} vs {}: {}", row.first, row.second, row.cell);
    }
    let path = ctx.out.join("significance.csv");
    if rows.is_empty() {
        // Serde-driven writers emit headers lazily, so an empty matrix
        // (single codec in the panel) needs the header spelled out.
        eprintln!("note: fewer than two codecs in the panel, nothing to compare");
        write_text(
            &path,
            "first,second,significant,total,wins,losses,cell\n",
        )?;
    } else {
        write_csv(&path, &rows)?;
    }
    Ok(())
}

fn cmd_correlate(ctx: &Ctx, dmos: Option<&Path>, srocc_floor: f64) -> Result<(), CliError> {
    let rq_path = ctx.out.join("rqpoints.csv");
    if !rq_path.exists() {
        return Err(CliError::data(format!(
            "{} not found; run target, ladder or hull first",
            rq_path.display()
        )));
    }
    let dmos_path = dmos
        .map(Path::to_path_buf)
        .unwrap_or_else(|| ctx.out.join("dmos.csv"));
    if !dmos_path.exists() {
        return Err(CliError::data(format!(
            "{} not found; run dmos first or pass --dmos",
            dmos_path.display()
        )));
    }
    let mut rows: Vec<RqRow> = read_csv(&rq_path)?;
    let dmos_rows: Vec<DmosRow> = read_csv(&dmos_path)?;
    let mut by_point: BTreeMap<(String, String, String), &DmosRow> = BTreeMap::new();
    for row in &dmos_rows {
        by_point.insert(
            (row.sequence.clone(), row.codec.clone(), row.rate_index.clone()),
            row,
        );
    }

    // Fold subjective quality (100 - DMOS) into the run table so the subj
    // column travels with the objective scores.
    for row in &mut rows {
        if row.rate_index.is_empty() {
            continue;
        }
        let key = (row.sequence.clone(), row.codec.clone(), row.rate_index.clone());
        if let Some(d) = by_point.get(&key) {
            row.subj = Some(100.0 - d.dmos);
        }
    }
    upsert_rqpoints(&rq_path, rows.clone())?;

    // The subj column is the target axis, so it never appears as a metric
    // under evaluation.
    let observations: Vec<MetricObservation> = rows
        .iter()
        .filter(|r| !r.rate_index.is_empty())
        .map(|r| {
            let mut metrics = BTreeMap::new();
            for id in ["psnr", "ssim", "msssim", "vmaf"] {
                if let Some(v) = r.metric_value(id) {
                    metrics.insert(id.to_string(), v);
                }
            }
            MetricObservation {
                group: r.group.clone(),
                sequence: r.sequence.clone(),
                codec: r.codec.clone(),
                rate_index: r.rate_index.clone(),
                metrics,
            }
        })
        .collect();
    let records: Vec<DmosRecord> = dmos_rows
        .iter()
        .map(|r| DmosRecord {
            sequence: r.sequence.clone(),
            codec: r.codec.clone(),
            rate_index: r.rate_index.clone(),
            dmos: r.dmos,
            stdev: r.stdev,
            n_subjects: r.n,
            diff_scores: Vec::new(),
        })
        .collect();
    let report =
        evaluate_metric_suite(&observations, &records, srocc_floor).map_err(map_correlation_error)?;
    let mut corr_rows = Vec::new();
    for group in &report.groups {
        for row in &group.rows {
            corr_rows.push(CorrRow {
                group: group.group.clone(),
                metric: row.metric.clone(),
                srocc: row.stats.srocc,
                lcc: row.stats.lcc,
                or: row.stats.outlier_ratio,
                rmse: row.stats.rmse,
                n: row.stats.n_points,
            });
        }
    }
    write_csv(&ctx.out.join("correlation.csv"), &corr_rows)?;
    print!("{}", report.render_text());
    Ok(())
}

fn cmd_siti(ctx: &Ctx) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for entry in ctx.selected_entries() {
        let seq = entry.load(&ctx.base)?;
        let descriptors = si_ti(&seq);
        rows.push(SitiRow {
            sequence: seq.name.clone(),
            width: seq.width(),
            height: seq.height(),
            frames: seq.frames.len(),
            si: descriptors.si,
            ti: descriptors.ti,
        });
    }
    rows.sort_by(|a, b| a.sequence.cmp(&b.sequence));
    for row in &rows {
        println!(
            "{} {}x{} ({} frames): SI {:.3}, TI {:.3}",
            row.sequence, row.width, row.height, row.frames, row.si, row.ti
        );
    }
    write_csv(&ctx.out.join("siti.csv"), &rows)?;
    Ok(())
}

fn report_targets(path: &Path, emit: Option<&Path>) -> Result<(), CliError> {
    let rows: Vec<TargetsCsvRow> = read_csv(path)?;
    let manifest = manifest_from_targets_csv(&rows)?;
    match emit {
        Some(out) => {
            write_text(out, &manifest)?;
            println!("wrote manifest for {} sequence(s) -> {}", rows.len(), out.display());
        }
        None => print!("{manifest}"),
    }
    Ok(())
}

fn report_matrix(path: &Path) -> Result<(), CliError> {
    if !path.exists() {
        return Err(CliError::data(format!(
            "{} not found; run bd first or pass --bdreport/--targets-csv",
            path.display()
        )));
    }
    let rows: Vec<BdRow> = read_csv(path)?;
    if rows.is_empty() {
        return Err(CliError::data(format!("{} holds no rows", path.display())));
    }
    print!("{}", render_bd_matrix(&rows));
    Ok(())
}
