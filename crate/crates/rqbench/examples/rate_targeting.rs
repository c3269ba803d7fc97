//! Hit pre-determined bitrates by searching the QP axis.
//!
//! The search brackets each target with integer QPs, interpolates on the
//! observed rate curve, and accepts the first encode within the relative
//! tolerance. Targets outside the achievable range come back as a typed
//! error instead of a silently wrong encode.
//!
//! ```bash
//! cargo run --release --example rate_targeting
//! ```

use rqbench::codecs::{encode_with_qp, target_bitrate_search, CodecError, EncoderAdapter};
use rqbench::synth::{standard_sequence, SynthSpec};

fn main() {
    let source = standard_sequence("demo", 0, SynthSpec::new(320, 180, 30));
    let adapter = EncoderAdapter::toy();
    let tolerance = 0.03;

    // Targets sampled off the clip's own rate curve, nudged one percent,
    // so each sits inside some integer QP's tolerance window.
    let targets: Vec<f64> = [16, 28, 40, 52]
        .iter()
        .map(|&qp| encode_with_qp(&adapter, &source, qp).expect("probe").bitrate_kbps * 1.01)
        .collect();

    for target in targets {
        let hit = target_bitrate_search(&adapter, &source, target, tolerance)
            .expect("target in range");
        println!(
            "target {target:>8.1} kbps: qp {:>5.1} -> {:>8.1} kbps ({:+.2}%, {} encodes)",
            hit.achieved.qp,
            hit.achieved.bitrate_kbps,
            hit.relative_error * 100.0,
            hit.iterations
        );
        assert!(hit.relative_error.abs() <= tolerance);
    }

    // One kbps sits below what the deepest QP can produce for this clip.
    match target_bitrate_search(&adapter, &source, 1.0, tolerance) {
        Err(CodecError::TargetUnreachable { target_kbps, rate_lo, .. }) => {
            println!("\ntarget {target_kbps} kbps declared unreachable (floor is {rate_lo:.1} kbps)");
        }
        other => panic!("expected TargetUnreachable, got {other:?}"),
    }
}
