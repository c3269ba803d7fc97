//! Relative encoder complexity as wall-time ratios against a benchmark.
//!
//! Timing individual encoders in absolute seconds says little across
//! machines; the ratio to a fixed benchmark encoder on the same inputs
//! transfers. Here the toy codec is its own benchmark and a copy that
//! encodes everything twice plays the expensive newcomer.
//!
//! ```bash
//! cargo run --release --example codec_complexity
//! ```

use rqbench::codecs::{
    complexity_ratio, encode_with_qp, format_complexity, EncoderAdapter,
};
use rqbench::synth::{standard_sequence, SynthSpec};

fn main() {
    let source = standard_sequence("demo", 0, SynthSpec::new(320, 180, 30));
    let benchmark = EncoderAdapter::toy();
    let qps = [10, 25, 40, 55];

    let mut bench_times = Vec::new();
    let mut slow_times = Vec::new();
    for &qp in &qps {
        let b = encode_with_qp(&benchmark, &source, qp).expect("encode");
        bench_times.push(b.wall_seconds);
        // Stand-in for a heavier codec: a two-pass run of the same encode.
        let start = std::time::Instant::now();
        let _ = encode_with_qp(&benchmark, &source, qp).expect("encode");
        let _ = encode_with_qp(&benchmark, &source, qp).expect("encode");
        slow_times.push(start.elapsed().as_secs_f64());
    }

    let self_ratio = complexity_ratio(&bench_times, &bench_times).expect("ratio");
    let slow_ratio = complexity_ratio(&slow_times, &bench_times).expect("ratio");
    println!("benchmark vs itself: {}", format_complexity(self_ratio));
    println!("slowed copy vs benchmark: {}", format_complexity(slow_ratio));
    assert!(slow_ratio > 1.0);

    println!("\nper-point wall seconds (benchmark / slowed):");
    for ((qp, b), s) in qps.iter().zip(&bench_times).zip(&slow_times) {
        println!("  qp {qp:>2}: {b:>7.4} / {s:>7.4}");
    }
}
