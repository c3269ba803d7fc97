//! Build the upper convex hull over rate points pooled from several
//! resolutions, then pick a winner per rate target.
//!
//! The hull is the dynamic-optimizer frontier: for any bitrate it answers
//! "what is the best quality any rung offers here", and per-target
//! selection picks the single best encode near each target.
//!
//! ```bash
//! cargo run --example convex_hull
//! ```

use rqbench::ratequality::{select_per_target, upper_convex_hull, RatePoint};

fn rung(points: &mut Vec<RatePoint>, res: (u32, u32), samples: &[(f64, f64)]) {
    for &(rate, quality) in samples {
        let mut p = RatePoint::synthetic(rate, "psnr", quality);
        p.encode_resolution = res;
        points.push(p);
    }
}

fn main() {
    let mut points = Vec::new();
    // The low rung saturates early; the native rung keeps climbing.
    rung(&mut points, (160, 90), &[
        (250.0, 31.0), (500.0, 34.5), (1000.0, 36.5), (2000.0, 37.2),
    ]);
    rung(&mut points, (320, 180), &[
        (250.0, 28.0), (500.0, 33.0), (1000.0, 36.8), (2000.0, 40.0),
    ]);

    let hull = upper_convex_hull(&points, "psnr").expect("hull");
    println!("hull keeps {} of {} points:", hull.vertices.len(), points.len());
    for p in &hull.vertices {
        println!(
            "  {:>6.0} kbps  {:>5.2} dB  encoded at {}x{}",
            p.bitrate_kbps,
            p.score("psnr").unwrap(),
            p.encode_resolution.0,
            p.encode_resolution.1
        );
    }

    for rate in [300.0, 700.0, 1500.0] {
        println!(
            "envelope quality at {rate:>6.0} kbps: {:.2} dB",
            hull.envelope_quality_at(rate)
        );
    }

    // Selection at a single target considers every candidate, not only
    // hull survivors, and settles ties toward fewer encoded pixels.
    let near_500: Vec<RatePoint> = points
        .iter()
        .filter(|p| (p.bitrate_kbps - 500.0).abs() < 1.0)
        .cloned()
        .collect();
    let winner = select_per_target(&near_500, "psnr").expect("candidates");
    println!(
        "winner at 500 kbps: {}x{} ({:.2} dB)",
        winner.encode_resolution.0,
        winner.encode_resolution.1,
        winner.score("psnr").unwrap()
    );
}
