//! Raw 4:2:0 video round trip, plus geometry parsing from filenames.
//!
//! Files are planar YUV, frame after frame, with chroma at half size in
//! both axes. Samples wider than 8 bits go little-endian, two bytes each.
//!
//! ```bash
//! cargo run --example media_io
//! ```

use rqbench::media::{
    frame_byte_size, parse_sequence_filename, read_raw_video, write_raw_video,
};
use rqbench::synth::{standard_sequence, SynthSpec};
use rqbench::Fps;

fn main() {
    let dir = tempfile::tempdir().expect("tempdir");

    let mut spec = SynthSpec::new(64, 36, 5);
    spec.bit_depth = 10;
    let seq = standard_sequence("clip", 0, spec);

    let name = "clip_64x36_30fps_10bit.yuv";
    let path = write_raw_video(&seq, dir.path().join(name)).expect("write");
    let on_disk = std::fs::metadata(&path).expect("stat").len();
    println!(
        "wrote {} frames, {} bytes ({} per frame)",
        seq.frame_count(),
        on_disk,
        frame_byte_size(seq.width(), seq.height(), seq.bit_depth())
    );

    let parsed = parse_sequence_filename(name).expect("parse");
    println!(
        "filename says: {} {}x{} @{} fps, {}-bit",
        parsed.base, parsed.width, parsed.height, parsed.fps, parsed.bit_depth
    );

    let back = read_raw_video(
        &path,
        parsed.width,
        parsed.height,
        parsed.bit_depth,
        Fps::new(parsed.fps, 1),
    )
    .expect("read");

    assert_eq!(back.frame_count(), seq.frame_count());
    for (a, b) in seq.frames.iter().zip(&back.frames) {
        assert_eq!(a, b, "round trip must be lossless");
    }
    println!("round trip lossless: yes");

    let first = &back.frames[0];
    let [y, u, v] = first.planes();
    println!(
        "plane sizes: Y {}x{}  U {}x{}  V {}x{}",
        y.width, y.height, u.width, u.height, v.width, v.height
    );
}
