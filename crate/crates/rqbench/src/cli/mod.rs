//! Batch front end: a manifest-driven command set over the library.
//!
//! Every operation reads a TOML run manifest, writes CSV artifacts with
//! fixed headers into the manifest's output directory, and exits 0 on
//! success. Failures print one machine-readable line on stderr:
//!
//! ```text
//! rqbench: kind=<manifest|process|data> exit=<code> detail=<message>
//! ```
//!
//! Exit codes: 2 for manifest or configuration problems, 3 for encoder or
//! external-tool process failures, 4 for data validation failures.
//!
//! Re-running a command with unchanged inputs rewrites every CSV with
//! byte-identical content; SVG plots are identical too once `--no-timestamp`
//! drops their generation-time comment.

mod commands;
mod manifest;
mod plot;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use manifest::{
    CodecEntry, ExternalMetricEntry, FpsSpec, ResolutionGroup, RunManifest, SequenceEntry,
    DEFAULT_TOLERANCE, NATIVE_METRICS,
};
pub use plot::{line_plot, PlotSeries};
pub use report::{
    manifest_from_targets_csv, read_csv, render_bd_matrix, write_csv, BdRow, CorrRow, DmosRow,
    HullRow, RqRow, SigRow, SitiRow, TargetsCsvRow,
};

use crate::codecs::CodecError;

/// CLI failure with its exit-code class.
#[derive(Debug, Clone, thiserror::Error)]
pub enum CliError {
    /// Bad manifest, flags, or configuration. Exit 2.
    #[error("{0}")]
    Manifest(String),
    /// An encoder or external tool failed to run. Exit 3.
    #[error("{0}")]
    Process(String),
    /// Inputs parsed but their content is invalid. Exit 4.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn manifest(msg: impl Into<String>) -> Self {
        CliError::Manifest(msg.into())
    }

    pub fn process(msg: impl Into<String>) -> Self {
        CliError::Process(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Manifest(_) => 2,
            CliError::Process(_) => 3,
            CliError::Data(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Manifest(_) => "manifest",
            CliError::Process(_) => "process",
            CliError::Data(_) => "data",
        }
    }

    /// The stderr line: single line, fixed `key=value` fields, message last.
    pub fn render_line(&self) -> String {
        let detail = self.to_string().replace('\n', "; ");
        format!(
            "rqbench: kind={} exit={} detail={}",
            self.kind(),
            self.exit_code(),
            detail
        )
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        match &e {
            CodecError::QpOutOfRange { .. }
            | CodecError::MissingPlaceholder(_)
            | CodecError::NoExtraHook => CliError::Manifest(e.to_string()),
            CodecError::TargetUnreachable { .. } => CliError::Data(e.to_string()),
            _ => CliError::Process(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rqbench",
    about = "Codec comparison and rate-quality optimization harness",
    version
)]
struct CliArgs {
    /// Run manifest (TOML). Required by every command that encodes or reads
    /// run artifacts.
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,

    /// Worker threads for independent encodes.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Seed for anything randomized. The default pipeline is deterministic;
    /// the seed only feeds operations that explicitly sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Restrict the run to sequences of one resolution group.
    #[arg(long, global = true, value_name = "NAME")]
    group: Option<String>,

    /// Override the manifest's selection metric.
    #[arg(long, global = true, value_name = "ID")]
    metric: Option<String>,

    /// Override the manifest's rate tolerance (relative, e.g. 0.03).
    #[arg(long, global = true, value_name = "FRACTION")]
    tolerance: Option<f64>,

    /// Omit the generation-time comment from SVG plots so reruns are
    /// byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,

    /// Record encode wall time into rqpoints.csv. Forces --jobs 1 and makes
    /// that one column vary across reruns.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: CommandKind,
}

#[derive(Debug, Subcommand)]
enum CommandKind {
    /// Encode every sequence with every codec at one fixed QP.
    Encode {
        /// Integer quantizer, within each codec's configured range.
        #[arg(long)]
        qp: i32,
    },
    /// Search QP to hit each manifest target bitrate at the native resolution.
    Target,
    /// Encode the resolution ladder at each target; score at the reference
    /// resolution after upsampling.
    Ladder,
    /// Ladder encodes plus per-target selection of the best rung, with RQ
    /// and overlay plots.
    Hull,
    /// Rate-quality deltas: codec vs anchor from run artifacts, or one
    /// standalone curve pair via --curve-a/--curve-b.
    Bd {
        /// Anchor codec id; defaults to the manifest's first codec.
        #[arg(long)]
        anchor: Option<String>,
        /// Standalone mode: anchor curve CSV with header bitrate_kbps,quality.
        #[arg(long, value_name = "CSV", requires = "curve_b")]
        curve_a: Option<PathBuf>,
        /// Standalone mode: test curve CSV.
        #[arg(long, value_name = "CSV", requires = "curve_a")]
        curve_b: Option<PathBuf>,
    },
    /// Difference scores, subject screening, and DMOS per rate point.
    Dmos {
        /// Trial scores CSV: subject_id,sequence,codec,rate_index,
        /// score_reference,score_distorted.
        #[arg(long, value_name = "CSV")]
        scores: PathBuf,
    },
    /// Pairwise per-point one-way ANOVA between codecs.
    Anova {
        #[arg(long, value_name = "CSV")]
        scores: PathBuf,
        /// Significance level.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Fit objective metrics against DMOS and report SROCC/LCC/OR/RMSE.
    Correlate {
        /// DMOS table; defaults to <output_dir>/dmos.csv.
        #[arg(long, value_name = "CSV")]
        dmos: Option<PathBuf>,
        /// |SROCC| below this marks the metric as weak.
        #[arg(long, default_value_t = 0.5)]
        srocc_floor: f64,
    },
    /// Spatial and temporal information descriptors per sequence.
    Siti,
    /// Render summary tables; convert a target-bitrate table into a manifest.
    Report {
        /// Target table CSV: sequence,group,targets (slash-separated kbps).
        #[arg(long, value_name = "CSV")]
        targets_csv: Option<PathBuf>,
        /// Where to write the manifest generated from --targets-csv
        /// (stdout when omitted).
        #[arg(long, value_name = "FILE")]
        emit_manifest: Option<PathBuf>,
        /// BD report to summarize; defaults to <output_dir>/bdreport.csv.
        #[arg(long, value_name = "CSV")]
        bdreport: Option<PathBuf>,
    },
}

/// Parses `args` (argv[0] included) and runs one command, returning the
/// process exit code. All failures are reported on stderr as a single
/// machine-readable line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match CliArgs::try_parse_from(args) {
        Ok(parsed) => parsed,
        Err(e) => {
            // Help and version are successful exits by convention.
            if e.use_stderr() {
                let line = CliError::manifest(format!("argument error: {e}")).render_line();
                eprintln!("{line}");
                return 2;
            }
            print!("{e}");
            return 0;
        }
    };
    match commands::dispatch(parsed) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.render_line());
            e.exit_code()
        }
    }
}
