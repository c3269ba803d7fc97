//! Encode a synthetic clip with the bundled toy codec across its QP range
//! and watch rate fall while distortion grows.
//!
//! ```bash
//! cargo run --release --example toy_codec_roundtrip
//! ```

use rqbench::codecs::{encode_with_qp, EncoderAdapter, TOY_QP_MAX};
use rqbench::metrics::{psnr, PsnrMode};
use rqbench::synth::{standard_sequence, SynthSpec};

fn main() {
    let spec = SynthSpec::new(320, 180, 30);
    let source = standard_sequence("demo", 0, spec);
    let adapter = EncoderAdapter::toy();

    println!("{} {}x{} @{} fps, {} frames", source.name, source.width(),
        source.height(), source.fps, source.frames.len());
    println!("{:>4}  {:>12}  {:>10}  {:>8}", "qp", "bytes", "kbps", "psnr");

    let mut last_rate = f64::INFINITY;
    for qp in [0, 8, 16, 24, 32, 40, 48, 56, TOY_QP_MAX as i32] {
        let enc = encode_with_qp(&adapter, &source, qp).expect("toy encode");
        let quality = psnr(&source, &enc.recon, PsnrMode::Luma).expect("psnr");
        println!(
            "{qp:>4}  {:>12}  {:>10.1}  {:>8.3}",
            enc.bitstream_bytes, enc.bitrate_kbps, quality.value
        );
        assert!(enc.bitrate_kbps <= last_rate, "rate must fall as qp rises");
        last_rate = enc.bitrate_kbps;
    }
    println!("\nrate spans three orders of magnitude over the qp range");
}
