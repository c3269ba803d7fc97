//! Adapter for metrics computed by external tools (VMAF, VIF, VSNR, …).
//!
//! The harness never links metric implementations; a tool is a command
//! template plus a regex that captures the pooled score from its output.

use std::path::Path;
use std::process::Command;

use regex::Regex;

use super::{MetricError, MetricScore};

/// Geometry handed to tools that cannot infer it from raw files.
#[derive(Debug, Clone, Copy)]
pub struct StreamGeometry {
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub bit_depth: u8,
}

/// An external metric: command template with {reference}, {distorted},
/// {width}, {height}, {fps}, {bitdepth} placeholders, and a score-capture
/// regex applied to the tool's combined output.
#[derive(Debug, Clone)]
pub struct ExternalMetricTool {
    pub metric_id: String,
    pub command_template: String,
    /// Must contain one capture group holding a decimal number.
    pub score_pattern: String,
    /// Optional command whose first output line is recorded as the tool
    /// version, for provenance.
    pub version_command: Option<String>,
}

/// An externally computed score plus tool provenance.
#[derive(Debug, Clone)]
pub struct ExternalScore {
    pub score: MetricScore,
    pub tool_version: Option<String>,
}

fn run_sh(command: &str) -> Result<(String, bool), String> {
    let output = Command::new("sh")
        .arg("-c")
        .arg(command)
        .output()
        .map_err(|e| e.to_string())?;
    let text = format!(
        "{}\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    Ok((text, output.status.success()))
}

/// Runs the tool on a (reference, distorted) file pair and parses the
/// pooled score via the tool's capture regex.
pub fn external_metric(
    tool: &ExternalMetricTool,
    reference: &Path,
    distorted: &Path,
    geometry: StreamGeometry,
) -> Result<ExternalScore, MetricError> {
    let command = tool
        .command_template
        .replace("{reference}", &reference.display().to_string())
        .replace("{distorted}", &distorted.display().to_string())
        .replace("{width}", &geometry.width.to_string())
        .replace("{height}", &geometry.height.to_string())
        .replace("{fps}", &geometry.fps.to_string())
        .replace("{bitdepth}", &geometry.bit_depth.to_string());

    let (output, ok) = run_sh(&command).map_err(|detail| MetricError::ToolFailure {
        command: command.clone(),
        detail,
    })?;
    if !ok {
        return Err(MetricError::ToolFailure {
            command,
            detail: output.trim().to_string(),
        });
    }

    let re = Regex::new(&tool.score_pattern).map_err(|e| MetricError::ParseFailure {
        pattern: tool.score_pattern.clone(),
        output: format!("invalid pattern: {e}"),
    })?;
    let value = re
        .captures(&output)
        .and_then(|c| c.get(1))
        .and_then(|m| m.as_str().parse::<f64>().ok())
        .ok_or_else(|| MetricError::ParseFailure {
            pattern: tool.score_pattern.clone(),
            output: output.trim().to_string(),
        })?;

    let tool_version = tool.version_command.as_deref().and_then(|vc| {
        run_sh(vc)
            .ok()
            .filter(|(_, ok)| *ok)
            .map(|(out, _)| out.lines().next().unwrap_or("").trim().to_string())
            .filter(|s| !s.is_empty())
    });

    Ok(ExternalScore {
        score: MetricScore::scalar(tool.metric_id.clone(), value),
        tool_version,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry() -> StreamGeometry {
        StreamGeometry {
            width: 320,
            height: 180,
            fps: 30.0,
            bit_depth: 8,
        }
    }

    fn stub(template: &str, pattern: &str, version: Option<&str>) -> ExternalMetricTool {
        ExternalMetricTool {
            metric_id: "vmaf".into(),
            command_template: template.into(),
            score_pattern: pattern.into(),
            version_command: version.map(String::from),
        }
    }

    #[test]
    fn stub_tool_score_is_parsed() {
        let tool = stub(
            "echo processing {reference} vs {distorted} at {width}x{height}; echo 'score: 50.0'",
            r"score:\s*([0-9.]+)",
            Some("echo stub-metric 1.2.3"),
        );
        let got = external_metric(&tool, Path::new("/tmp/r.yuv"), Path::new("/tmp/d.yuv"), geometry())
            .unwrap();
        assert_eq!(got.score.value, 50.0);
        assert_eq!(got.score.metric_id, "vmaf");
        assert_eq!(got.tool_version.as_deref(), Some("stub-metric 1.2.3"));
    }

    #[test]
    fn geometry_placeholders_are_substituted() {
        let tool = stub(
            "echo dims {width}x{height} fps {fps} depth {bitdepth}; echo v=9.5",
            r"v=([0-9.]+) dummy-never-matches|dims 320x180 fps 30 depth 8",
            None,
        );
        // The pattern above matches only when substitution happened, but has
        // no usable capture; expect a parse failure that proves the match
        // text was present.
        let err = external_metric(&tool, Path::new("r"), Path::new("d"), geometry()).unwrap_err();
        match err {
            MetricError::ParseFailure { output, .. } => {
                assert!(output.contains("dims 320x180 fps 30 depth 8"))
            }
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn failing_tool_is_reported_with_output() {
        let tool = stub("echo exploding >&2; exit 3", r"([0-9.]+)", None);
        let err = external_metric(&tool, Path::new("r"), Path::new("d"), geometry()).unwrap_err();
        match err {
            MetricError::ToolFailure { detail, .. } => assert!(detail.contains("exploding")),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn missing_score_is_a_parse_error() {
        let tool = stub("echo no numbers here", r"score:\s*([0-9.]+)", None);
        let err = external_metric(&tool, Path::new("r"), Path::new("d"), geometry()).unwrap_err();
        assert!(matches!(err, MetricError::ParseFailure { .. }));
    }

    #[test]
    fn version_failure_degrades_to_none() {
        let tool = stub("echo s=1.0", r"s=([0-9.]+)", Some("exit 1"));
        let got = external_metric(&tool, Path::new("r"), Path::new("d"), geometry()).unwrap();
        assert_eq!(got.tool_version, None);
    }
}
