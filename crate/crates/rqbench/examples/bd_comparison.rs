//! Bjontegaard deltas between rate-quality curves.
//!
//! `bd_rate` integrates the horizontal gap between two fitted curves over
//! their shared quality range: the average bitrate change at equal
//! quality, in percent. `bd_quality` integrates the vertical gap over the
//! shared log-rate range.
//!
//! ```bash
//! cargo run --example bd_comparison
//! ```

use rqbench::ratequality::{bd_quality, bd_rate, build_rq_curve, RatePoint};

fn curve(metric: &str, samples: &[(f64, f64)]) -> rqbench::ratequality::RQCurve {
    let points = samples
        .iter()
        .map(|&(r, q)| RatePoint::synthetic(r, metric, q))
        .collect();
    build_rq_curve(points, metric).expect("monotone curve")
}

fn main() {
    let anchor = curve("psnr", &[
        (400.0, 30.0), (800.0, 33.1), (1600.0, 36.3), (3200.0, 39.2),
    ]);

    // Same qualities at 70% of the rate, the shape of a newer codec.
    let cheaper = curve("psnr", &[
        (280.0, 30.0), (560.0, 33.1), (1120.0, 36.3), (2240.0, 39.2),
    ]);
    let res = bd_rate(&anchor, &cheaper).expect("bd");
    println!("30% cheaper curve:  bd-rate {:+.2}%   bd-psnr {:+.3} dB", res.bd_rate_percent, res.bd_quality);

    let same = bd_rate(&anchor, &anchor).expect("bd");
    println!("curve vs itself:    bd-rate {:+.2}%   bd-psnr {:+.3} dB", same.bd_rate_percent, same.bd_quality);

    // A fixed quality offset at identical rates, seen from both axes.
    let brighter = curve("psnr", &[
        (400.0, 31.0), (800.0, 34.1), (1600.0, 37.3), (3200.0, 40.2),
    ]);
    let dq = bd_quality(&anchor, &brighter).expect("bd");
    println!("+1 dB at all rates: bd-rate {:+.2}%   bd-psnr {:+.3} dB", dq.bd_rate_percent, dq.bd_quality);

    println!(
        "\noverlap used for the last comparison: {:.3} to {:.3} (log10 kbps)",
        dq.overlap_interval.0, dq.overlap_interval.1
    );
}
