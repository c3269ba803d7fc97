//! The built-in full-reference metrics plus the SI/TI content descriptors.
//!
//! ```bash
//! cargo run --release --example quality_metrics
//! ```

use rqbench::codecs::{encode_with_qp, EncoderAdapter};
use rqbench::metrics::{ms_ssim, psnr, si_ti, ssim, PsnrMode};
use rqbench::synth::{detail_sequence, smooth_sequence, standard_sequence, SynthSpec};

fn main() {
    // MS-SSIM needs five dyadic scales, so frames must be at least 128px.
    let spec = SynthSpec::new(256, 144, 12);
    let adapter = EncoderAdapter::toy();

    println!(
        "{:<10} {:>4}  {:>8}  {:>8}  {:>8}  {:>8}",
        "sequence", "qp", "kbps", "psnr", "ssim", "ms-ssim"
    );
    let clips = [
        standard_sequence("standard", 0, spec),
        smooth_sequence("smooth", 7, spec),
        detail_sequence("detail", 11, spec),
    ];
    for source in &clips {
        for qp in [16, 40] {
            let enc = encode_with_qp(&adapter, source, qp).expect("encode");
            let p = psnr(source, &enc.recon, PsnrMode::Luma).expect("psnr");
            let s = ssim(source, &enc.recon).expect("ssim");
            let m = ms_ssim(source, &enc.recon).expect("ms-ssim");
            println!(
                "{:<10} {qp:>4}  {:>8.1}  {:>8.3}  {:>8.5}  {:>8.5}",
                source.name, enc.bitrate_kbps, p.value, s.value, m.value
            );
        }
    }

    println!("\nsource complexity (higher means harder to code):");
    for source in &clips {
        let d = si_ti(source);
        println!("{:<10} SI {:>7.2}   TI {:>7.2}", source.name, d.si, d.ti);
    }
}
