//! Binary-level checks: exit codes, the machine-readable error line,
//! artifact schemas, and byte-idempotence of reruns. Everything runs on a
//! one-sequence manifest small enough to keep the whole file under a few
//! seconds.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rqbench::codecs::{encode_with_qp, EncoderAdapter};
use rqbench::synth::{smooth_sequence, SynthSpec};

fn rqbench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rqbench"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn rqbench")
}

fn error_line(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr)
        .lines()
        .find(|l| l.starts_with("rqbench:"))
        .unwrap_or_default()
        .to_string()
}

/// One 128x64 synthetic sequence, a two-rung ladder, the built-in codec.
fn write_mini_manifest(dir: &Path, targets: &[f64]) -> PathBuf {
    let mut list = String::new();
    for (i, t) in targets.iter().enumerate() {
        if i > 0 {
            list.push_str(", ");
        }
        write!(list, "{t:.3}").unwrap();
    }
    let text = format!(
        r#"schema = 1
output_dir = "out"
selection_metric = "psnr"
tolerance = 0.03
metrics = ["psnr"]

[[sequences]]
name = "mini"
synthetic = "smooth"
width = 128
height = 64
frames = 8
fps = 30
seed = 3
group = "C"

[[codecs]]
id = "toy"
kind = "toy"

[resolution_groups.C]
reference = [128, 64]
ladder = [[128, 64], [64, 32]]

[targets]
mini = [{list}]
"#
    );
    let path = dir.join("mini.toml");
    std::fs::write(&path, text).expect("write manifest");
    path
}

/// Measured toy rates for the manifest clip, so every target is achievable
/// with zero error at an integer QP.
fn achievable_targets() -> Vec<f64> {
    let clip = smooth_sequence("mini", 3, SynthSpec::new(128, 64, 8));
    let adapter = EncoderAdapter::toy();
    let mut rates: Vec<f64> = [52, 40, 28, 16]
        .iter()
        .map(|&qp| encode_with_qp(&adapter, &clip, qp).expect("probe").bitrate_kbps)
        .collect();
    rates.sort_by(f64::total_cmp);
    rates
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = rqbench(dir.path(), &["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("rqbench"));
    for sub in ["target", "ladder", "hull", "bd", "dmos", "anova", "correlate", "siti", "report"] {
        assert!(text.contains(sub), "--help does not list {sub}");
    }
}

#[test]
fn argument_errors_use_the_machine_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = rqbench(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out).starts_with("rqbench: kind=manifest exit=2 detail="));
}

#[test]
fn missing_manifest_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = rqbench(dir.path(), &["target"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out).starts_with("rqbench: kind=manifest exit=2"));
}

#[test]
fn invalid_manifest_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mini_manifest(dir.path(), &[100.0]);
    let broken = std::fs::read_to_string(&path)
        .unwrap()
        .replace("synthetic = \"smooth\"", "synthetic = \"smooth\"\npath = \"x.yuv\"");
    std::fs::write(&path, broken).unwrap();

    let out = rqbench(dir.path(), &["--manifest", "mini.toml", "siti"]);
    assert_eq!(out.status.code(), Some(2));
    let line = error_line(&out);
    assert!(line.starts_with("rqbench: kind=manifest exit=2"), "{line}");
}

#[test]
fn failing_encoder_command_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_mini_manifest(dir.path(), &[100.0]);
    let broken = std::fs::read_to_string(&path).unwrap().replace(
        "id = \"toy\"\nkind = \"toy\"",
        concat!(
            "id = \"brokentool\"\nkind = \"command\"\nqp_range = [0, 63]\n",
            "encode_template = \"echo boom >&2; false # {input} {qp} {recon} {bitstream}\"",
        ),
    );
    std::fs::write(&path, broken).unwrap();

    let out = rqbench(dir.path(), &["--manifest", "mini.toml", "encode", "--qp", "30"]);
    assert_eq!(out.status.code(), Some(3));
    let line = error_line(&out);
    assert!(line.starts_with("rqbench: kind=process exit=3"), "{line}");
}

#[test]
fn unreachable_target_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    write_mini_manifest(dir.path(), &[0.5]);
    let out = rqbench(dir.path(), &["--manifest", "mini.toml", "target"]);
    assert_eq!(out.status.code(), Some(4));
    let line = error_line(&out);
    assert!(line.starts_with("rqbench: kind=data exit=4"), "{line}");
    assert!(line.contains("0.5"), "detail does not name the target: {line}");
}

#[test]
fn pipeline_artifacts_and_rerun_idempotence() {
    let dir = tempfile::tempdir().unwrap();
    write_mini_manifest(dir.path(), &achievable_targets());
    let run = |sub: &str| {
        let out = rqbench(dir.path(), &["--manifest", "mini.toml", "--no-timestamp", sub]);
        assert!(
            out.status.success(),
            "{sub} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run("target");
    run("hull");
    run("bd");

    let out_dir = dir.path().join("out");
    let rq = std::fs::read_to_string(out_dir.join("rqpoints.csv")).expect("rqpoints.csv");
    assert!(rq.lines().count() > 8, "expected native and rung rows");

    let hull = std::fs::read_to_string(out_dir.join("hull.csv")).expect("hull.csv");
    assert_eq!(hull.lines().count(), 5, "header plus one selection per target");

    let bd = std::fs::read_to_string(out_dir.join("bdreport.csv")).expect("bdreport.csv");
    assert!(bd.lines().count() >= 2, "expected at least the selection-vs-fixed row");

    let plots: Vec<PathBuf> = std::fs::read_dir(out_dir.join("plots"))
        .expect("plots dir")
        .map(|e| e.unwrap().path())
        .collect();
    assert!(!plots.is_empty(), "hull wrote no plots");
    assert!(plots.iter().all(|p| p.extension().is_some_and(|e| e == "svg")));

    let snapshot = |paths: &[PathBuf]| -> Vec<(PathBuf, Vec<u8>)> {
        paths
            .iter()
            .map(|p| (p.clone(), std::fs::read(p).expect("artifact")))
            .collect()
    };
    let mut tracked = vec![
        out_dir.join("rqpoints.csv"),
        out_dir.join("hull.csv"),
        out_dir.join("bdreport.csv"),
    ];
    tracked.extend(plots);
    let before = snapshot(&tracked);

    run("target");
    run("hull");
    run("bd");
    for (path, bytes) in before {
        let after = std::fs::read(&path).expect("artifact after rerun");
        assert_eq!(bytes, after, "{} changed across reruns", path.display());
    }
}

#[test]
fn bd_standalone_identical_and_halved_curves() {
    let dir = tempfile::tempdir().unwrap();
    let base = "bitrate_kbps,quality\n400,30\n800,33.1\n1600,36.3\n3200,39.2\n";
    let halved = "bitrate_kbps,quality\n200,30\n400,33.1\n800,36.3\n1600,39.2\n";
    std::fs::write(dir.path().join("a.csv"), base).unwrap();
    std::fs::write(dir.path().join("b.csv"), halved).unwrap();

    let bd_of = |test: &str| -> f64 {
        let out = rqbench(
            dir.path(),
            &["bd", "--curve-a", "a.csv", "--curve-b", test],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8_lossy(&out.stdout).to_string();
        let row = text.lines().nth(1).expect("data row");
        row.split(',').nth(2).expect("bd_rate column").parse().expect("numeric bd")
    };

    assert!(bd_of("a.csv").abs() < 1e-9, "identical curves must give zero");
    assert!((bd_of("b.csv") + 50.0).abs() < 1e-6, "halved rates must give -50%");
}

fn write_scores(path: &Path, codecs: &[(&str, f64)]) {
    let mut text = String::from(
        "subject_id,sequence,codec,rate_index,score_reference,score_distorted\n",
    );
    for subject in 0..15 {
        for sequence in ["x", "y"] {
            for (codec, base) in codecs {
                for rate_index in ["R1", "R2"] {
                    let diff = base + (subject % 5) as f64;
                    writeln!(
                        text,
                        "s{subject:02},{sequence},{codec},{rate_index},80,{}",
                        80.0 - diff
                    )
                    .unwrap();
                }
            }
        }
    }
    std::fs::write(path, text).expect("write scores");
}

#[test]
fn dmos_and_anova_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    write_mini_manifest(dir.path(), &[100.0]);
    write_scores(&dir.path().join("scores.csv"), &[("a", 25.0), ("b", 10.0)]);

    let out = rqbench(
        dir.path(),
        &["--manifest", "mini.toml", "dmos", "--scores", "scores.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dmos = std::fs::read_to_string(dir.path().join("out/dmos.csv")).expect("dmos.csv");
    let mut lines = dmos.lines();
    assert_eq!(
        lines.next(),
        Some("sequence,codec,rate_index,dmos,stdev,n"),
        "dmos.csv header is contractual"
    );
    assert_eq!(lines.count(), 8, "2 sequences x 2 codecs x 2 rate points");
    // Every panel row retained: 15 subjects with a mild spread reject nobody.
    assert!(dmos.lines().skip(1).all(|l| l.ends_with(",15")), "{dmos}");

    let out = rqbench(
        dir.path(),
        &["--manifest", "mini.toml", "anova", "--scores", "scores.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sig =
        std::fs::read_to_string(dir.path().join("out/significance.csv")).expect("significance");
    assert!(sig.starts_with("first,second,significant,total,wins,losses,cell\n"));
    // 15 dB of planted DMOS separation at every point: a loses all four.
    assert!(
        sig.contains("a,b,4,4,0,4,\"4/4, (0/-4)\""),
        "unexpected significance rows:\n{sig}"
    );
    assert!(sig.contains("b,a,4,4,4,0"), "mirrored pair missing:\n{sig}");
}

#[test]
fn single_codec_panel_writes_header_only_matrix() {
    let dir = tempfile::tempdir().unwrap();
    write_mini_manifest(dir.path(), &[100.0]);
    write_scores(&dir.path().join("solo.csv"), &[("solo", 20.0)]);

    let out = rqbench(
        dir.path(),
        &["--manifest", "mini.toml", "anova", "--scores", "solo.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sig =
        std::fs::read_to_string(dir.path().join("out/significance.csv")).expect("significance");
    assert_eq!(sig, "first,second,significant,total,wins,losses,cell\n");
}
