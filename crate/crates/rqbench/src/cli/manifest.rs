//! Run manifest: the TOML file that names sequences, codecs, ladders and
//! targets for a batch run.
//!
//! Validation here is the gate for exit code 2. Anything that can be caught
//! by looking at the manifest alone (bad targets, ladder larger than its
//! reference, unknown selection metric) is caught before any work starts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::codecs::EncoderAdapter;
use crate::media::{self, Fps, VideoSequence};
use crate::synth::{self, SynthSpec};

use super::CliError;

pub const DEFAULT_TOLERANCE: f64 = 0.03;

/// Built-in metric identifiers the pipeline can compute without external
/// tools. Everything else must come from an `[[external_metrics]]` entry.
pub const NATIVE_METRICS: [&str; 3] = ["psnr", "ssim", "msssim"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    #[serde(default)]
    pub schema: Option<u32>,
    pub output_dir: PathBuf,
    pub selection_metric: String,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Metrics computed for every reconstruction. Defaults to just the
    /// selection metric.
    #[serde(default)]
    pub metrics: Vec<String>,
    pub sequences: Vec<SequenceEntry>,
    pub codecs: Vec<CodecEntry>,
    #[serde(default)]
    pub resolution_groups: BTreeMap<String, ResolutionGroup>,
    /// Target bitrates in kbps, keyed by sequence name. Order defines the
    /// rate indices R1, R2, ...
    #[serde(default)]
    pub targets: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub external_metrics: Vec<ExternalMetricEntry>,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceEntry {
    /// Display name. Defaults to the basename of `path`.
    #[serde(default)]
    pub name: Option<String>,
    /// Raw planar video file. Geometry is parsed from the filename when the
    /// explicit fields are absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Deterministic built-in source: "standard", "smooth" or "detail".
    /// Mutually exclusive with `path`.
    #[serde(default)]
    pub synthetic: Option<String>,
    /// Noise seed for a synthetic source.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub width: Option<u32>,
    #[serde(default)]
    pub height: Option<u32>,
    #[serde(default)]
    pub frames: Option<u32>,
    #[serde(default)]
    pub fps: Option<FpsSpec>,
    #[serde(default)]
    pub bit_depth: Option<u8>,
    #[serde(default)]
    pub group: Option<String>,
}

/// Frame rate written either as a bare number or as `[num, den]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum FpsSpec {
    Integer(u32),
    Rational([u32; 2]),
}

impl FpsSpec {
    pub fn to_fps(self) -> Result<Fps, String> {
        let (num, den) = match self {
            FpsSpec::Integer(n) => (n, 1),
            FpsSpec::Rational([n, d]) => (n, d),
        };
        if num == 0 || den == 0 {
            return Err(format!("frame rate {num}/{den} is not positive"));
        }
        Ok(Fps { num, den })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecEntry {
    pub id: String,
    /// "toy" for the built-in codec, "command" for an external encoder.
    pub kind: String,
    #[serde(default)]
    pub qp_range: Option<[i32; 2]>,
    #[serde(default)]
    pub encode_template: Option<String>,
    #[serde(default)]
    pub fixed_args: Option<String>,
    /// Extra arguments appended when a fractional rate point is requested;
    /// `{frac}` expands to the fractional part. Presence enables fractional
    /// QP search for a command codec.
    #[serde(default)]
    pub fractional_extra: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionGroup {
    /// Resolution every reconstruction is brought back to before scoring.
    pub reference: [u32; 2],
    /// Candidate encode resolutions, each no larger than the reference.
    pub ladder: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalMetricEntry {
    pub id: String,
    pub command_template: String,
    pub score_pattern: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::manifest(format!("cannot read manifest {}: {e}", path.display()))
        })?;
        let manifest: RunManifest = toml::from_str(&text).map_err(|e| {
            CliError::manifest(format!("cannot parse manifest {}: {e}", path.display()))
        })?;
        manifest.validate().map_err(CliError::manifest)?;
        Ok(manifest)
    }

    /// Every metric id a manifest run can produce scores for.
    pub fn configured_metrics(&self) -> Vec<String> {
        let mut ids: Vec<String> = if self.metrics.is_empty() {
            vec![self.selection_metric.clone()]
        } else {
            self.metrics.clone()
        };
        for ext in &self.external_metrics {
            if !ids.iter().any(|m| m == &ext.id) {
                ids.push(ext.id.clone());
            }
        }
        ids
    }

    fn validate(&self) -> Result<(), String> {
        if self.sequences.is_empty() {
            return Err("manifest lists no sequences".into());
        }
        if self.codecs.is_empty() {
            return Err("manifest lists no codecs".into());
        }
        if !(self.tolerance > 0.0) {
            return Err(format!("tolerance {} is not positive", self.tolerance));
        }
        for (name, targets) in &self.targets {
            if targets.is_empty() {
                return Err(format!("sequence {name} has an empty target list"));
            }
            for &t in targets {
                if !(t > 0.0) {
                    return Err(format!("sequence {name} has non-positive target {t} kbps"));
                }
            }
        }
        for (name, rg) in &self.resolution_groups {
            let [rw, rh] = rg.reference;
            if rw == 0 || rh == 0 {
                return Err(format!("group {name} has a degenerate reference resolution"));
            }
            if rg.ladder.is_empty() {
                return Err(format!("group {name} has an empty ladder"));
            }
            for &[w, h] in &rg.ladder {
                if w == 0 || h == 0 {
                    return Err(format!("group {name} ladder contains a degenerate rung"));
                }
                if w > rw || h > rh {
                    return Err(format!(
                        "group {name} ladder rung {w}x{h} exceeds reference {rw}x{rh}"
                    ));
                }
            }
        }
        let metrics = self.configured_metrics();
        if !metrics.iter().any(|m| m == &self.selection_metric) {
            return Err(format!(
                "selection metric {:?} is not among the configured metrics {:?}",
                self.selection_metric, metrics
            ));
        }
        for m in &metrics {
            let native = NATIVE_METRICS.contains(&m.as_str());
            let external = self.external_metrics.iter().any(|e| &e.id == m);
            if !native && !external {
                return Err(format!("metric {m:?} is neither built in nor an external tool"));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for entry in &self.sequences {
            entry.validate()?;
            let name = entry.display_name();
            if !seen.insert(name.clone()) {
                return Err(format!("duplicate sequence name {name:?}"));
            }
            if let Some(group) = &entry.group {
                if !self.resolution_groups.is_empty()
                    && !self.resolution_groups.contains_key(group)
                {
                    return Err(format!(
                        "sequence {name} names group {group:?} but no such resolution group exists"
                    ));
                }
            }
        }
        let mut codec_ids = std::collections::BTreeSet::new();
        for codec in &self.codecs {
            codec.validate()?;
            if !codec_ids.insert(codec.id.clone()) {
                return Err(format!("duplicate codec id {:?}", codec.id));
            }
        }
        Ok(())
    }
}

impl SequenceEntry {
    fn validate(&self) -> Result<(), String> {
        match (&self.path, &self.synthetic) {
            (Some(_), Some(_)) => {
                return Err(format!(
                    "sequence {} sets both path and synthetic",
                    self.display_name()
                ))
            }
            (None, None) => {
                return Err(format!(
                    "sequence {} sets neither path nor synthetic",
                    self.display_name()
                ))
            }
            _ => {}
        }
        if let Some(kind) = &self.synthetic {
            if !matches!(kind.as_str(), "standard" | "smooth" | "detail") {
                return Err(format!("unknown synthetic source kind {kind:?}"));
            }
            if self.name.is_none() {
                return Err("synthetic sequences need an explicit name".into());
            }
            for (field, value) in [("width", self.width), ("height", self.height)] {
                match value {
                    None => return Err(format!("synthetic sequence needs {field}")),
                    Some(0) => return Err(format!("synthetic sequence has zero {field}")),
                    Some(_) => {}
                }
            }
            match self.frames {
                None | Some(0) => {
                    return Err("synthetic sequence needs a positive frame count".into())
                }
                Some(_) => {}
            }
        }
        if let Some(fps) = self.fps {
            fps.to_fps()?;
        }
        if let Some(depth) = self.bit_depth {
            if !matches!(depth, 8 | 10) {
                return Err(format!("unsupported bit depth {depth}"));
            }
        }
        Ok(())
    }

    pub fn display_name(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        match &self.path {
            Some(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            None => "<unnamed>".into(),
        }
    }

    /// Load or synthesize the full sequence. `base` resolves relative paths
    /// (the directory the manifest lives in).
    pub fn load(&self, base: &Path) -> Result<VideoSequence, CliError> {
        if let Some(kind) = &self.synthetic {
            let fps = match self.fps {
                Some(spec) => spec.to_fps().map_err(CliError::manifest)?,
                None => Fps { num: 30, den: 1 },
            };
            let spec = SynthSpec {
                width: self.width.expect("validated"),
                height: self.height.expect("validated"),
                frames: self.frames.expect("validated") as usize,
                fps,
                bit_depth: self.bit_depth.unwrap_or(8),
            };
            let name = self.display_name();
            let seed = self.seed.unwrap_or(0);
            let seq = match kind.as_str() {
                "standard" => synth::standard_sequence(&name, seed, spec),
                "smooth" => synth::smooth_sequence(&name, seed, spec),
                "detail" => synth::detail_sequence(&name, seed, spec),
                _ => unreachable!("validated"),
            };
            return Ok(seq);
        }
        let rel = self.path.as_ref().expect("validated");
        let path = if rel.is_absolute() { rel.clone() } else { base.join(rel) };
        let parsed = path
            .file_name()
            .and_then(|n| media::parse_sequence_filename(&n.to_string_lossy()).ok());
        let geometry = match (self.width, self.height) {
            (Some(w), Some(h)) => Some((w, h)),
            _ => parsed.as_ref().map(|p| (p.width, p.height)),
        };
        let (width, height) = geometry.ok_or_else(|| {
            CliError::manifest(format!(
                "sequence {}: geometry is neither given nor parseable from the filename",
                self.display_name()
            ))
        })?;
        let fps = match self.fps {
            Some(spec) => spec.to_fps().map_err(CliError::manifest)?,
            None => parsed
                .as_ref()
                .map(|p| Fps { num: p.fps, den: 1 })
                .unwrap_or(Fps { num: 30, den: 1 }),
        };
        let bit_depth = self
            .bit_depth
            .or_else(|| parsed.as_ref().map(|p| p.bit_depth))
            .unwrap_or(8);
        let mut seq = media::read_raw_video(&path, width, height, bit_depth, fps)
            .map_err(|e| CliError::data(format!("reading {}: {e}", path.display())))?;
        seq.name = self.display_name();
        Ok(seq)
    }
}

impl CodecEntry {
    fn validate(&self) -> Result<(), String> {
        match self.kind.as_str() {
            "toy" => {
                if self.encode_template.is_some() {
                    return Err(format!(
                        "codec {}: toy codecs take no encode_template",
                        self.id
                    ));
                }
            }
            "command" => {
                if self.encode_template.is_none() {
                    return Err(format!(
                        "codec {}: command codecs need an encode_template",
                        self.id
                    ));
                }
            }
            other => return Err(format!("codec {}: unknown kind {other:?}", self.id)),
        }
        if let Some([lo, hi]) = self.qp_range {
            if lo > hi {
                return Err(format!("codec {}: empty qp_range [{lo}, {hi}]", self.id));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<EncoderAdapter, CliError> {
        match self.kind.as_str() {
            "toy" => {
                let mut adapter = EncoderAdapter::toy_named(&self.id);
                if let Some([lo, hi]) = self.qp_range {
                    adapter.qp_min = lo;
                    adapter.qp_max = hi;
                }
                Ok(adapter)
            }
            "command" => {
                let range = self.qp_range.map(|[lo, hi]| (lo, hi)).unwrap_or((0, 63));
                EncoderAdapter::command(
                    &self.id,
                    self.encode_template.clone().expect("validated"),
                    range,
                    self.fixed_args.clone().unwrap_or_default(),
                    self.fractional_extra.clone(),
                )
                .map_err(|e| CliError::manifest(format!("codec {}: {e}", self.id)))
            }
            _ => unreachable!("validated"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_toml() -> String {
        r#"
output_dir = "out"
selection_metric = "psnr"

[[sequences]]
name = "s1"
synthetic = "standard"
width = 64
height = 64
frames = 4
group = "C"

[[codecs]]
id = "toy"
kind = "toy"

[resolution_groups.C]
reference = [64, 64]
ladder = [[64, 64], [32, 32]]

[targets]
s1 = [100.0, 200.0]
"#
        .to_string()
    }

    fn parse(text: &str) -> Result<RunManifest, String> {
        let manifest: RunManifest = toml::from_str(text).map_err(|e| e.to_string())?;
        manifest.validate()?;
        Ok(manifest)
    }

    #[test]
    fn well_formed_manifest_passes() {
        let m = parse(&base_toml()).unwrap();
        assert_eq!(m.tolerance, DEFAULT_TOLERANCE);
        assert_eq!(m.configured_metrics(), vec!["psnr".to_string()]);
        assert_eq!(m.sequences[0].display_name(), "s1");
    }

    #[test]
    fn non_positive_target_rejected() {
        let text = base_toml().replace("[100.0, 200.0]", "[100.0, 0.0]");
        let err = parse(&text).unwrap_err();
        assert!(err.contains("non-positive target"), "{err}");
    }

    #[test]
    fn ladder_rung_above_reference_rejected() {
        let text = base_toml().replace("[[64, 64], [32, 32]]", "[[128, 64]]");
        let err = parse(&text).unwrap_err();
        assert!(err.contains("exceeds reference"), "{err}");
    }

    #[test]
    fn unknown_selection_metric_rejected() {
        // Named nowhere else: the metric defaults into the configured list
        // and then fails the implementability check.
        let text = base_toml().replace(
            "selection_metric = \"psnr\"",
            "selection_metric = \"vmaf\"",
        );
        let err = parse(&text).unwrap_err();
        assert!(err.contains("neither built in"), "{err}");

        // Explicit metrics list that omits the selection metric.
        let text = base_toml().replace(
            "selection_metric = \"psnr\"",
            "selection_metric = \"ssim\"\nmetrics = [\"psnr\"]",
        );
        let err = parse(&text).unwrap_err();
        assert!(err.contains("selection metric"), "{err}");
    }

    #[test]
    fn external_tool_satisfies_selection_metric() {
        let mut text = base_toml().replace(
            "selection_metric = \"psnr\"",
            "selection_metric = \"vmaf\"",
        );
        text.push_str(
            "\n[[external_metrics]]\nid = \"vmaf\"\ncommand_template = \"vmaf {reference} {distorted}\"\nscore_pattern = \"score: ([0-9.]+)\"\n",
        );
        let m = parse(&text).unwrap();
        assert!(m.configured_metrics().contains(&"vmaf".to_string()));
    }

    #[test]
    fn sequence_with_both_sources_rejected() {
        let text = base_toml().replace(
            "synthetic = \"standard\"",
            "synthetic = \"standard\"\npath = \"x.yuv\"",
        );
        let err = parse(&text).unwrap_err();
        assert!(err.contains("both path and synthetic"), "{err}");
    }

    #[test]
    fn unknown_group_reference_rejected() {
        let text = base_toml().replace("group = \"C\"", "group = \"Z\"");
        let err = parse(&text).unwrap_err();
        assert!(err.contains("no such resolution group"), "{err}");
    }

    #[test]
    fn command_codec_requires_template() {
        let text = base_toml().replace("kind = \"toy\"", "kind = \"command\"");
        let err = parse(&text).unwrap_err();
        assert!(err.contains("encode_template"), "{err}");
    }

    #[test]
    fn fps_spec_forms() {
        assert_eq!(FpsSpec::Integer(30).to_fps().unwrap(), Fps { num: 30, den: 1 });
        assert_eq!(
            FpsSpec::Rational([30000, 1001]).to_fps().unwrap(),
            Fps { num: 30000, den: 1001 }
        );
        assert!(FpsSpec::Integer(0).to_fps().is_err());
    }
}
