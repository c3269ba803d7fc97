//! Encoder adapters: a uniform `encode_with_qp` over the built-in toy codec
//! and arbitrary external encoder commands.
//!
//! External encoders communicate purely through files and a command
//! template; nothing is linked in. Wall time is measured around the encode
//! invocation only, never around input preparation.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use crate::media::{read_raw_video, write_raw_video, MediaError, VideoSequence};

use super::toy::{toy_encode, ToyError, TOY_QP_MAX};

#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error("qp {qp} outside adapter range [{min}, {max}]")]
    QpOutOfRange { qp: i32, min: i32, max: i32 },
    #[error("encode template missing required placeholder {{{0}}}")]
    MissingPlaceholder(&'static str),
    #[error("fractional refinement configured but template has no {{extra}} hook")]
    NoExtraHook,
    #[error("encoder process failed ({command}): {detail}")]
    ProcessFailure { command: String, detail: String },
    #[error("reconstruction geometry mismatch: expected {expected}, got {got}")]
    GeometryMismatch { expected: String, got: String },
    #[error(
        "target {target_kbps} kbps unreachable: qp {qp_lo} gives {rate_lo:.3} kbps, \
         qp {qp_hi} gives {rate_hi:.3} kbps"
    )]
    TargetUnreachable {
        target_kbps: f64,
        qp_lo: f64,
        rate_lo: f64,
        qp_hi: f64,
        rate_hi: f64,
    },
    #[error("complexity lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("benchmark time at index {0} is not positive")]
    NonPositiveBenchmark(usize),
    #[error(transparent)]
    Toy(#[from] ToyError),
    #[error(transparent)]
    Media(#[from] MediaError),
}

/// How an adapter actually encodes.
#[derive(Debug, Clone)]
pub enum Backend {
    /// The built-in deterministic codec.
    Toy,
    /// External command; placeholders {input},{recon},{bitstream},{qp},
    /// {width},{height},{fps},{bitdepth},{extra} are substituted and the
    /// result runs under `sh -c`.
    Command { encode_template: String },
}

/// One encoder the harness can drive: identity, backend, QP range, and the
/// fixed arguments substituted for {extra} (the common test conditions).
#[derive(Debug, Clone)]
pub struct EncoderAdapter {
    pub codec_id: String,
    pub backend: Backend,
    pub qp_min: i32,
    pub qp_max: i32,
    pub fixed_args: String,
    /// Extra-args template enabling sub-integer rate control, with {frac}
    /// (fractional part, decimal) and {qp} available. Appended to
    /// `fixed_args` in the {extra} slot during fractional refinement.
    pub fractional_extra: Option<String>,
}

impl EncoderAdapter {
    /// The built-in codec under its default name.
    pub fn toy() -> Self {
        Self::toy_named("toy")
    }

    /// The built-in codec registered under a caller-chosen name, so one run
    /// can carry several independently configured instances.
    pub fn toy_named(codec_id: impl Into<String>) -> Self {
        EncoderAdapter {
            codec_id: codec_id.into(),
            backend: Backend::Toy,
            qp_min: 0,
            qp_max: TOY_QP_MAX as i32,
            fixed_args: String::new(),
            fractional_extra: None,
        }
    }

    /// External-command adapter. The template must reference {input}, {qp},
    /// {recon} and {bitstream}; a fractional hook additionally requires an
    /// {extra} slot to ride in.
    pub fn command(
        codec_id: impl Into<String>,
        encode_template: impl Into<String>,
        qp_range: (i32, i32),
        fixed_args: impl Into<String>,
        fractional_extra: Option<String>,
    ) -> Result<Self, CodecError> {
        let encode_template = encode_template.into();
        for required in ["input", "qp", "recon", "bitstream"] {
            if !encode_template.contains(&format!("{{{required}}}")) {
                return Err(CodecError::MissingPlaceholder(match required {
                    "input" => "input",
                    "qp" => "qp",
                    "recon" => "recon",
                    _ => "bitstream",
                }));
            }
        }
        if fractional_extra.is_some() && !encode_template.contains("{extra}") {
            return Err(CodecError::NoExtraHook);
        }
        let (qp_min, qp_max) = qp_range;
        assert!(qp_min <= qp_max, "qp range inverted");
        Ok(EncoderAdapter {
            codec_id: codec_id.into(),
            backend: Backend::Command { encode_template },
            qp_min,
            qp_max,
            fixed_args: fixed_args.into(),
            fractional_extra,
        })
    }

    pub fn supports_fractional(&self) -> bool {
        self.fractional_extra.is_some()
    }
}

/// Outcome of a single encode at one QP.
#[derive(Debug, Clone)]
pub struct EncodeResult {
    /// The QP driven; fractional only after sub-integer refinement.
    pub qp: f64,
    pub bitstream_bytes: u64,
    pub bitrate_kbps: f64,
    pub recon: VideoSequence,
    pub wall_seconds: f64,
}

fn bitrate_kbps(bytes: u64, seq: &VideoSequence) -> f64 {
    bytes as f64 * 8.0 / seq.duration_seconds() / 1000.0
}

fn check_recon(seq: &VideoSequence, recon: &VideoSequence) -> Result<(), CodecError> {
    let expected = format!(
        "{} frames {}x{}@{}bit",
        seq.frame_count(),
        seq.width(),
        seq.height(),
        seq.bit_depth()
    );
    let got = format!(
        "{} frames {}x{}@{}bit",
        recon.frame_count(),
        recon.width(),
        recon.height(),
        recon.bit_depth()
    );
    if expected != got {
        return Err(CodecError::GeometryMismatch { expected, got });
    }
    Ok(())
}

fn render_template(
    template: &str,
    seq: &VideoSequence,
    qp_text: &str,
    extra: &str,
    input: &Path,
    recon: &Path,
    bitstream: &Path,
) -> String {
    let fps = if seq.fps.den == 1 {
        seq.fps.num.to_string()
    } else {
        format!("{}", seq.fps.as_f64())
    };
    template
        .replace("{input}", &input.display().to_string())
        .replace("{recon}", &recon.display().to_string())
        .replace("{bitstream}", &bitstream.display().to_string())
        .replace("{qp}", qp_text)
        .replace("{width}", &seq.width().to_string())
        .replace("{height}", &seq.height().to_string())
        .replace("{fps}", &fps)
        .replace("{bitdepth}", &seq.bit_depth().to_string())
        .replace("{extra}", extra)
}

fn run_command_encode(
    adapter: &EncoderAdapter,
    template: &str,
    seq: &VideoSequence,
    qp: f64,
    qp_text: &str,
    extra: &str,
) -> Result<EncodeResult, CodecError> {
    let dir = tempfile::tempdir().map_err(|e| CodecError::ProcessFailure {
        command: adapter.codec_id.clone(),
        detail: format!("cannot create work dir: {e}"),
    })?;
    let input = dir.path().join("input.yuv");
    let recon_path = dir.path().join("recon.yuv");
    let bitstream = dir.path().join("stream.bin");
    write_raw_video(seq, &input)?;

    let command = render_template(template, seq, qp_text, extra, &input, &recon_path, &bitstream);
    let started = Instant::now();
    let output = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .output()
        .map_err(|e| CodecError::ProcessFailure {
            command: command.clone(),
            detail: e.to_string(),
        })?;
    let wall_seconds = started.elapsed().as_secs_f64();

    if !output.status.success() {
        return Err(CodecError::ProcessFailure {
            command,
            detail: format!(
                "exit {:?}; stdout: {}; stderr: {}",
                output.status.code(),
                String::from_utf8_lossy(&output.stdout).trim(),
                String::from_utf8_lossy(&output.stderr).trim()
            ),
        });
    }
    let bitstream_bytes = std::fs::metadata(&bitstream)
        .map_err(|_| CodecError::ProcessFailure {
            command: command.clone(),
            detail: "encoder produced no bitstream file".into(),
        })?
        .len();
    if !recon_path.exists() {
        return Err(CodecError::ProcessFailure {
            command,
            detail: "encoder produced no reconstruction file".into(),
        });
    }
    let recon = read_raw_video(&recon_path, seq.width(), seq.height(), seq.bit_depth(), seq.fps)?;
    check_recon(seq, &recon)?;
    Ok(EncodeResult {
        qp,
        bitstream_bytes,
        bitrate_kbps: bitrate_kbps(bitstream_bytes, seq),
        recon,
        wall_seconds,
    })
}

/// Encodes `seq` at an integer QP, measuring wall time around the encode
/// invocation only.
pub fn encode_with_qp(
    adapter: &EncoderAdapter,
    seq: &VideoSequence,
    qp: i32,
) -> Result<EncodeResult, CodecError> {
    if qp < adapter.qp_min || qp > adapter.qp_max {
        return Err(CodecError::QpOutOfRange {
            qp,
            min: adapter.qp_min,
            max: adapter.qp_max,
        });
    }
    match &adapter.backend {
        Backend::Toy => {
            let started = Instant::now();
            let (bitstream, recon) = toy_encode(seq, qp as u8)?;
            let wall_seconds = started.elapsed().as_secs_f64();
            check_recon(seq, &recon)?;
            Ok(EncodeResult {
                qp: qp as f64,
                bitstream_bytes: bitstream.len() as u64,
                bitrate_kbps: bitrate_kbps(bitstream.len() as u64, seq),
                recon,
                wall_seconds,
            })
        }
        Backend::Command { encode_template } => run_command_encode(
            adapter,
            encode_template,
            seq,
            qp as f64,
            &qp.to_string(),
            &adapter.fixed_args,
        ),
    }
}

/// Encodes at `base_qp + frac` through the adapter's fractional-extra hook.
/// Only meaningful for command adapters that declare one.
pub(crate) fn encode_fractional(
    adapter: &EncoderAdapter,
    seq: &VideoSequence,
    base_qp: i32,
    frac: f64,
) -> Result<EncodeResult, CodecError> {
    let hook = adapter
        .fractional_extra
        .as_ref()
        .expect("caller checks supports_fractional");
    let Backend::Command { encode_template } = &adapter.backend else {
        unreachable!("fractional hooks exist only on command adapters");
    };
    let rendered_hook = hook
        .replace("{frac}", &format!("{frac:.6}"))
        .replace("{qp}", &base_qp.to_string());
    let extra = if adapter.fixed_args.is_empty() {
        rendered_hook
    } else {
        format!("{} {}", adapter.fixed_args, rendered_hook)
    };
    run_command_encode(
        adapter,
        encode_template,
        seq,
        base_qp as f64 + frac,
        &base_qp.to_string(),
        &extra,
    )
}

/// Mean over rate points of codec time / benchmark time.
pub fn complexity_ratio(
    times_codec: &[f64],
    times_benchmark: &[f64],
) -> Result<f64, CodecError> {
    if times_codec.len() != times_benchmark.len() || times_codec.is_empty() {
        return Err(CodecError::LengthMismatch(
            times_codec.len(),
            times_benchmark.len(),
        ));
    }
    let mut acc = 0.0;
    for (i, (&c, &b)) in times_codec.iter().zip(times_benchmark).enumerate() {
        if b <= 0.0 {
            return Err(CodecError::NonPositiveBenchmark(i));
        }
        acc += c / b;
    }
    Ok(acc / times_codec.len() as f64)
}

/// Renders a complexity ratio the way reports print it, e.g. "9.37×".
pub fn format_complexity(ratio: f64) -> String {
    format!("{ratio:.2}×")
}
