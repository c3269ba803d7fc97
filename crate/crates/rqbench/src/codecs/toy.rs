//! Built-in deterministic block codec, the desk-scale stand-in for the
//! external encoders the harness normally drives.
//!
//! Intra/inter frame coding with an 8×8 floating-point DCT, uniform
//! quantization (step = 2^((qp − 4)/6)), zig-zag scan, zero-block run
//! lengths and exponential-Golomb entropy coding. The transform basis and
//! the step table are frozen `f64` literals, and every rounding site uses
//! round-half-away-from-zero, so bitstreams are byte-identical across
//! platforms. The encoder reconstructs through the same dequantize/inverse
//! path the decoder uses, making its returned recon bit-exact.

use thiserror::Error;

use crate::media::{Fps, Plane, VideoFrame, VideoSequence};

/// Inclusive upper end of the toy codec's QP range.
pub const TOY_QP_MAX: u8 = 63;

const MAGIC: [u8; 4] = *b"TYC1";
const HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum ToyError {
    #[error("qp {0} outside the toy codec range 0..={TOY_QP_MAX}")]
    QpRange(u8),
    #[error("malformed bitstream: {0}")]
    Malformed(String),
}

/// Orthonormal 8-point DCT-II basis, row u = c_u·cos((2n+1)uπ/16).
/// Frozen literals keep the transform independent of platform libm.
#[rustfmt::skip]
static DCT_BASIS: [[f64; 8]; 8] = [
    [0.35355339059327376, 0.35355339059327376, 0.35355339059327376, 0.35355339059327376, 0.35355339059327376, 0.35355339059327376, 0.35355339059327376, 0.35355339059327376],
    [0.49039264020161522, 0.41573480615127262, 0.27778511650980111, 0.097545161008064134, -0.097545161008064134, -0.27778511650980111, -0.41573480615127262, -0.49039264020161522],
    [0.46193976625564338, 0.19134171618254489, -0.19134171618254489, -0.46193976625564338, -0.46193976625564338, -0.19134171618254489, 0.19134171618254489, 0.46193976625564338],
    [0.41573480615127262, -0.097545161008064134, -0.49039264020161522, -0.27778511650980111, 0.27778511650980111, 0.49039264020161522, 0.097545161008064134, -0.41573480615127262],
    [0.35355339059327376, -0.35355339059327376, -0.35355339059327376, 0.35355339059327376, 0.35355339059327376, -0.35355339059327376, -0.35355339059327376, 0.35355339059327376],
    [0.27778511650980111, -0.49039264020161522, 0.097545161008064134, 0.41573480615127262, -0.41573480615127262, -0.097545161008064134, 0.49039264020161522, -0.27778511650980111],
    [0.19134171618254489, -0.46193976625564338, 0.46193976625564338, -0.19134171618254489, -0.19134171618254489, 0.46193976625564338, -0.46193976625564338, 0.19134171618254489],
    [0.097545161008064134, -0.27778511650980111, 0.41573480615127262, -0.49039264020161522, 0.49039264020161522, -0.41573480615127262, 0.27778511650980111, -0.097545161008064134],
];

/// Quantizer step per QP: 2^((qp − 4)/6), frozen for the same reason.
#[rustfmt::skip]
static QSTEP: [f64; 64] = [
    0.62996052494743658, 0.70710678118654752, 0.79370052598409974, 0.8908987181403393,
    1.0, 1.122462048309373, 1.2599210498948732, 1.414213562373095,
    1.5874010519681995, 1.7817974362806786, 2.0, 2.244924096618746,
    2.5198420997897463, 2.8284271247461901, 3.1748021039363989, 3.5635948725613572,
    4.0, 4.4898481932374919, 5.0396841995794927, 5.6568542494923802,
    6.3496042078727979, 7.1271897451227144, 8.0, 8.9796963864749839,
    10.079368399158985, 11.31370849898476, 12.699208415745596, 14.254379490245429,
    16.0, 17.959392772949968, 20.158736798317971, 22.627416997969521,
    25.398416831491192, 28.508758980490858, 32.0, 35.918785545899935,
    40.317473596635941, 45.254833995939042, 50.796833662982383, 57.017517960981716,
    64.0, 71.837571091799871, 80.634947193271883, 90.509667991878083,
    101.59366732596477, 114.03503592196343, 128.0, 143.67514218359974,
    161.26989438654377, 181.01933598375617, 203.18733465192953, 228.07007184392686,
    256.0, 287.35028436719948, 322.53978877308753, 362.03867196751233,
    406.37466930385907, 456.14014368785372, 512.0, 574.70056873439897,
    645.07957754617506, 724.07734393502466, 812.74933860771813, 912.28028737570745,
];

/// Zig-zag scan order: entry k is the row-major index of the k-th scanned
/// coefficient.
#[rustfmt::skip]
static ZIGZAG: [usize; 64] = [
     0,  1,  8, 16,  9,  2,  3, 10,
    17, 24, 32, 25, 18, 11,  4,  5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13,  6,  7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
];

fn forward_dct(block: &[f64; 64]) -> [f64; 64] {
    // A · X
    let mut tmp = [0.0f64; 64];
    for u in 0..8 {
        for x in 0..8 {
            let mut acc = 0.0;
            for n in 0..8 {
                acc += DCT_BASIS[u][n] * block[n * 8 + x];
            }
            tmp[u * 8 + x] = acc;
        }
    }
    // (A · X) · Aᵀ
    let mut out = [0.0f64; 64];
    for u in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for x in 0..8 {
                acc += tmp[u * 8 + x] * DCT_BASIS[v][x];
            }
            out[u * 8 + v] = acc;
        }
    }
    out
}

fn inverse_dct(coef: &[f64; 64]) -> [f64; 64] {
    // Aᵀ · C
    let mut tmp = [0.0f64; 64];
    for n in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for u in 0..8 {
                acc += DCT_BASIS[u][n] * coef[u * 8 + v];
            }
            tmp[n * 8 + v] = acc;
        }
    }
    // (Aᵀ · C) · A
    let mut out = [0.0f64; 64];
    for n in 0..8 {
        for m in 0..8 {
            let mut acc = 0.0;
            for v in 0..8 {
                acc += tmp[n * 8 + v] * DCT_BASIS[v][m];
            }
            out[n * 8 + m] = acc;
        }
    }
    out
}

struct BitWriter {
    bytes: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter {
            bytes: Vec::new(),
            acc: 0,
            nbits: 0,
        }
    }

    fn put_bit(&mut self, bit: u32) {
        self.acc = (self.acc << 1) | (bit & 1);
        self.nbits += 1;
        if self.nbits == 8 {
            self.bytes.push(self.acc as u8);
            self.acc = 0;
            self.nbits = 0;
        }
    }

    fn put_bits(&mut self, value: u32, n: u32) {
        for i in (0..n).rev() {
            self.put_bit((value >> i) & 1);
        }
    }

    /// Unsigned exponential-Golomb.
    fn put_ue(&mut self, v: u32) {
        debug_assert!(v < u32::MAX);
        let code = v + 1;
        let len = 32 - code.leading_zeros();
        self.put_bits(0, len - 1);
        self.put_bits(code, len);
    }

    /// Signed exponential-Golomb: positive v → 2v−1, negative → −2v.
    fn put_se(&mut self, v: i32) {
        let mapped = if v > 0 {
            (v as u32) * 2 - 1
        } else {
            (-(v as i64) as u32) * 2
        };
        self.put_ue(mapped);
    }

    fn align(&mut self) {
        while self.nbits != 0 {
            self.put_bit(0);
        }
    }

    fn into_bytes(mut self) -> Vec<u8> {
        self.align();
        self.bytes
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    bit: u32,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        BitReader {
            bytes,
            pos: 0,
            bit: 0,
        }
    }

    fn get_bit(&mut self) -> Result<u32, ToyError> {
        if self.pos >= self.bytes.len() {
            return Err(ToyError::Malformed("bitstream truncated".into()));
        }
        let b = (self.bytes[self.pos] >> (7 - self.bit)) & 1;
        self.bit += 1;
        if self.bit == 8 {
            self.bit = 0;
            self.pos += 1;
        }
        Ok(b as u32)
    }

    fn get_bits(&mut self, n: u32) -> Result<u32, ToyError> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.get_bit()?;
        }
        Ok(v)
    }

    fn get_ue(&mut self) -> Result<u32, ToyError> {
        let mut zeros = 0u32;
        while self.get_bit()? == 0 {
            zeros += 1;
            if zeros > 31 {
                return Err(ToyError::Malformed("overlong exp-golomb code".into()));
            }
        }
        let mut code = 1u32;
        for _ in 0..zeros {
            code = (code << 1) | self.get_bit()?;
        }
        Ok(code - 1)
    }

    fn get_se(&mut self) -> Result<i32, ToyError> {
        let m = self.get_ue()?;
        if m % 2 == 1 {
            Ok(((m + 1) / 2) as i32)
        } else {
            Ok(-((m / 2) as i32))
        }
    }

    fn align(&mut self) {
        if self.bit != 0 {
            self.bit = 0;
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len() && self.bit == 0
    }
}

fn pad_to_blocks(plane: &Plane) -> Plane {
    let pw = plane.width.div_ceil(8) * 8;
    let ph = plane.height.div_ceil(8) * 8;
    if pw == plane.width && ph == plane.height {
        return plane.clone();
    }
    let mut data = Vec::with_capacity(pw * ph);
    for y in 0..ph {
        let sy = y.min(plane.height - 1);
        let row = plane.row(sy);
        data.extend_from_slice(row);
        data.extend(std::iter::repeat(row[plane.width - 1]).take(pw - plane.width));
    }
    Plane::new(pw, ph, data)
}

fn crop(plane: &Plane, w: usize, h: usize) -> Plane {
    if plane.width == w && plane.height == h {
        return plane.clone();
    }
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        data.extend_from_slice(&plane.row(y)[..w]);
    }
    Plane::new(w, h, data)
}

/// Quantized coefficients of one plane, zig-zag order per block.
struct PlaneCode {
    blocks: Vec<[i32; 64]>,
    recon: Plane,
}

/// Transforms and quantizes one padded plane against an optional predictor,
/// reconstructing through the decoder's exact dequantize/inverse path.
fn transform_plane(src: &Plane, pred: Option<&Plane>, step: f64, sample_max: u16) -> PlaneCode {
    let (w, h) = (src.width, src.height);
    let (bx, by) = (w / 8, h / 8);
    let mut blocks = Vec::with_capacity(bx * by);
    let mut recon = vec![0u16; w * h];
    let mut block = [0.0f64; 64];
    for byi in 0..by {
        for bxi in 0..bx {
            for dy in 0..8 {
                for dx in 0..8 {
                    let idx = (byi * 8 + dy) * w + bxi * 8 + dx;
                    let p = pred.map_or(0.0, |p| p.data[idx] as f64);
                    block[dy * 8 + dx] = src.data[idx] as f64 - p;
                }
            }
            let coef = forward_dct(&block);
            let mut zz = [0i32; 64];
            let mut deq = [0.0f64; 64];
            for k in 0..64 {
                let q = (coef[ZIGZAG[k]] / step).round();
                zz[k] = q as i32;
                deq[ZIGZAG[k]] = q * step;
            }
            let resid = inverse_dct(&deq);
            for dy in 0..8 {
                for dx in 0..8 {
                    let idx = (byi * 8 + dy) * w + bxi * 8 + dx;
                    let p = pred.map_or(0.0, |p| p.data[idx] as f64);
                    recon[idx] =
                        (p + resid[dy * 8 + dx]).round().clamp(0.0, sample_max as f64) as u16;
                }
            }
            blocks.push(zz);
        }
    }
    PlaneCode {
        blocks,
        recon: Plane::new(w, h, recon),
    }
}

/// Entropy-codes a plane's quantized blocks: runs of all-zero blocks, then
/// per nonzero block its coefficient count, zero runs and levels.
fn write_plane(bw: &mut BitWriter, blocks: &[[i32; 64]]) {
    let mut i = 0;
    let n = blocks.len();
    while i < n {
        let mut zrun = 0u32;
        while i < n && blocks[i].iter().all(|&q| q == 0) {
            zrun += 1;
            i += 1;
        }
        bw.put_ue(zrun);
        if i < n {
            let zz = &blocks[i];
            let nnz = zz.iter().filter(|&&q| q != 0).count() as u32;
            bw.put_ue(nnz - 1);
            let mut run = 0u32;
            for &q in zz.iter() {
                if q == 0 {
                    run += 1;
                } else {
                    bw.put_ue(run);
                    bw.put_se(q);
                    run = 0;
                }
            }
            i += 1;
        }
    }
}

fn read_plane_blocks(br: &mut BitReader, n_blocks: usize) -> Result<Vec<[i32; 64]>, ToyError> {
    let mut blocks = vec![[0i32; 64]; n_blocks];
    let mut i = 0;
    while i < n_blocks {
        let zrun = br.get_ue()? as usize;
        i = i
            .checked_add(zrun)
            .filter(|&v| v <= n_blocks)
            .ok_or_else(|| ToyError::Malformed("zero-run past end of plane".into()))?;
        if i < n_blocks {
            let nnz = br.get_ue()? + 1;
            if nnz > 64 {
                return Err(ToyError::Malformed("coefficient count exceeds block".into()));
            }
            let mut pos = 0usize;
            for _ in 0..nnz {
                pos += br.get_ue()? as usize;
                if pos >= 64 {
                    return Err(ToyError::Malformed("coefficient run past block end".into()));
                }
                let level = br.get_se()?;
                if level == 0 {
                    return Err(ToyError::Malformed("zero level in nonzero slot".into()));
                }
                blocks[i][pos] = level;
                pos += 1;
            }
            i += 1;
        }
    }
    Ok(blocks)
}

fn reconstruct_plane(
    blocks: &[[i32; 64]],
    w: usize,
    h: usize,
    pred: Option<&Plane>,
    step: f64,
    sample_max: u16,
) -> Plane {
    let bx = w / 8;
    let mut out = vec![0u16; w * h];
    for (bi, zz) in blocks.iter().enumerate() {
        let (byi, bxi) = (bi / bx, bi % bx);
        let mut deq = [0.0f64; 64];
        for k in 0..64 {
            deq[ZIGZAG[k]] = zz[k] as f64 * step;
        }
        let resid = inverse_dct(&deq);
        for dy in 0..8 {
            for dx in 0..8 {
                let idx = (byi * 8 + dy) * w + bxi * 8 + dx;
                let p = pred.map_or(0.0, |p| p.data[idx] as f64);
                out[idx] = (p + resid[dy * 8 + dx]).round().clamp(0.0, sample_max as f64) as u16;
            }
        }
    }
    Plane::new(w, h, out)
}

fn plane_code_bytes(codes: &[PlaneCode]) -> Vec<Vec<u8>> {
    codes
        .iter()
        .map(|c| {
            let mut bw = BitWriter::new();
            write_plane(&mut bw, &c.blocks);
            bw.into_bytes()
        })
        .collect()
}

/// Encodes a sequence at the given QP. Returns the bitstream and the
/// decoder-identical reconstruction.
///
/// Dimensions need not be multiples of 8: planes are edge-padded to whole
/// blocks internally and cropped again on reconstruction.
pub fn toy_encode(seq: &VideoSequence, qp: u8) -> Result<(Vec<u8>, VideoSequence), ToyError> {
    if qp > TOY_QP_MAX {
        return Err(ToyError::QpRange(qp));
    }
    let step = QSTEP[qp as usize];
    let max = (1u16 << seq.bit_depth()) - 1;

    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(seq.width() as u16).to_le_bytes());
    out.extend_from_slice(&(seq.height() as u16).to_le_bytes());
    out.push(seq.bit_depth());
    out.push(qp);
    out.extend_from_slice(&(seq.fps.num as u16).to_le_bytes());
    out.extend_from_slice(&(seq.fps.den as u16).to_le_bytes());
    out.extend_from_slice(&(seq.frame_count() as u16).to_le_bytes());

    let mut prev: Option<[Plane; 3]> = None;
    let mut recon_frames = Vec::with_capacity(seq.frame_count());
    for frame in &seq.frames {
        let padded = [
            pad_to_blocks(&frame.plane_y),
            pad_to_blocks(&frame.plane_u),
            pad_to_blocks(&frame.plane_v),
        ];

        let intra: Vec<PlaneCode> = padded
            .iter()
            .map(|p| transform_plane(p, None, step, max))
            .collect();
        let intra_bytes = plane_code_bytes(&intra);
        let intra_len: usize = intra_bytes.iter().map(Vec::len).sum();

        let inter: Option<(Vec<PlaneCode>, Vec<Vec<u8>>, usize)> = prev.as_ref().map(|pv| {
            let codes: Vec<PlaneCode> = padded
                .iter()
                .zip(pv.iter())
                .map(|(p, pr)| transform_plane(p, Some(pr), step, max))
                .collect();
            let bytes = plane_code_bytes(&codes);
            let len = bytes.iter().map(Vec::len).sum();
            (codes, bytes, len)
        });

        // Smaller coded size wins; ties go to intra.
        let use_inter = inter.as_ref().is_some_and(|(_, _, len)| *len < intra_len);
        let (codes, payloads) = if use_inter {
            let (codes, bytes, _) = inter.unwrap();
            (codes, bytes)
        } else {
            (intra, intra_bytes)
        };

        out.push(use_inter as u8);
        for p in &payloads {
            out.extend_from_slice(p);
        }

        let recons: Vec<Plane> = codes.into_iter().map(|c| c.recon).collect();
        let [ry, ru, rv]: [Plane; 3] = recons.try_into().expect("three planes");
        recon_frames.push(
            VideoFrame::new(
                frame.width,
                frame.height,
                frame.bit_depth,
                crop(&ry, frame.plane_y.width, frame.plane_y.height),
                crop(&ru, frame.plane_u.width, frame.plane_u.height),
                crop(&rv, frame.plane_v.width, frame.plane_v.height),
            )
            .expect("recon geometry"),
        );
        prev = Some([ry, ru, rv]);
    }

    let recon = VideoSequence::new(seq.name.clone(), seq.fps, recon_frames).expect("recon frames");
    Ok((out, recon))
}

/// Decodes a toy-codec bitstream back to a sequence (named after the magic).
pub fn toy_decode(bitstream: &[u8]) -> Result<VideoSequence, ToyError> {
    if bitstream.len() < HEADER_LEN {
        return Err(ToyError::Malformed("shorter than header".into()));
    }
    if bitstream[0..4] != MAGIC {
        return Err(ToyError::Malformed("bad magic".into()));
    }
    let width = u16::from_le_bytes([bitstream[4], bitstream[5]]) as u32;
    let height = u16::from_le_bytes([bitstream[6], bitstream[7]]) as u32;
    let bit_depth = bitstream[8];
    let qp = bitstream[9];
    let fps_num = u16::from_le_bytes([bitstream[10], bitstream[11]]) as u32;
    let fps_den = u16::from_le_bytes([bitstream[12], bitstream[13]]) as u32;
    let frame_count = u16::from_le_bytes([bitstream[14], bitstream[15]]) as usize;

    if width == 0 || height == 0 || width % 2 != 0 || height % 2 != 0 {
        return Err(ToyError::Malformed(format!("bad dimensions {width}x{height}")));
    }
    if bit_depth != 8 && bit_depth != 10 {
        return Err(ToyError::Malformed(format!("bad bit depth {bit_depth}")));
    }
    if qp > TOY_QP_MAX {
        return Err(ToyError::Malformed(format!("bad qp {qp}")));
    }
    if fps_num == 0 || fps_den == 0 {
        return Err(ToyError::Malformed("zero fps field".into()));
    }
    if frame_count == 0 {
        return Err(ToyError::Malformed("zero frame count".into()));
    }

    let step = QSTEP[qp as usize];
    let max = (1u16 << bit_depth) - 1;
    let dims = [
        (width as usize, height as usize),
        (width as usize / 2, height as usize / 2),
        (width as usize / 2, height as usize / 2),
    ];
    let padded_dims: Vec<(usize, usize)> = dims
        .iter()
        .map(|&(w, h)| (w.div_ceil(8) * 8, h.div_ceil(8) * 8))
        .collect();

    let mut br = BitReader::new(&bitstream[HEADER_LEN..]);
    let mut prev: Option<Vec<Plane>> = None;
    let mut frames = Vec::with_capacity(frame_count);
    for t in 0..frame_count {
        br.align();
        if br.at_end() {
            return Err(ToyError::Malformed("bitstream truncated".into()));
        }
        let mode = br.get_bits(8)?;
        let inter = match mode {
            0 => false,
            1 => true,
            m => return Err(ToyError::Malformed(format!("unknown frame mode {m}"))),
        };
        if inter && t == 0 {
            return Err(ToyError::Malformed("inter mode on first frame".into()));
        }

        let mut planes = Vec::with_capacity(3);
        for (pi, &(pw, ph)) in padded_dims.iter().enumerate() {
            let blocks = read_plane_blocks(&mut br, (pw / 8) * (ph / 8))?;
            br.align();
            let pred = if inter {
                Some(&prev.as_ref().unwrap()[pi])
            } else {
                None
            };
            planes.push(reconstruct_plane(&blocks, pw, ph, pred, step, max));
        }

        let frame = VideoFrame::new(
            width,
            height,
            bit_depth,
            crop(&planes[0], dims[0].0, dims[0].1),
            crop(&planes[1], dims[1].0, dims[1].1),
            crop(&planes[2], dims[2].0, dims[2].1),
        )
        .map_err(|e| ToyError::Malformed(e.to_string()))?;
        frames.push(frame);
        prev = Some(planes);
    }
    if !br.at_end() {
        return Err(ToyError::Malformed("trailing data after last frame".into()));
    }

    VideoSequence::new("tyc1", Fps::new(fps_num, fps_den), frames)
        .map_err(|e| ToyError::Malformed(e.to_string()))
}
