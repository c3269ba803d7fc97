//! Raw video container: reading, writing and validating planar 4:2:0
//! sequences at 8- or 10-bit depth.
//!
//! Files are headerless `.yuv` with planar Y,U,V per frame and frames
//! concatenated. 10-bit samples occupy the low 10 bits of little-endian
//! 16-bit words; the high bits must be zero. Geometry comes either from
//! explicit arguments or from the filename convention
//! `<base>_<W>x<H>_<fps>fps_<depth>bit.yuv`.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Errors raised by raw-video I/O and validation.
#[derive(Debug, Error)]
pub enum MediaError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("file size {actual} is not a multiple of the {frame_bytes}-byte frame size ({width}x{height} {bit_depth}-bit)")]
    SizeMismatch {
        actual: u64,
        frame_bytes: u64,
        width: u32,
        height: u32,
        bit_depth: u8,
    },
    #[error("sample value {value} out of range for {bit_depth}-bit content (frame {frame}, plane {plane})")]
    SampleOutOfRange {
        value: u16,
        bit_depth: u8,
        frame: usize,
        plane: char,
    },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("cannot parse sequence filename {name:?}: bad token {token:?}")]
    ParseName { name: String, token: String },
    #[error("empty sequence")]
    EmptySequence,
    #[error("frame {index} has geometry {got}, expected {expected}")]
    FrameMismatch {
        index: usize,
        got: String,
        expected: String,
    },
}

/// One image plane of unsigned samples (stored in `u16` for both depths).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u16>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<u16>) -> Self {
        assert_eq!(data.len(), width * height, "plane size mismatch");
        Plane {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: u16) -> Self {
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u16] {
        &self.data[y * self.width..(y + 1) * self.width]
    }
}

/// A single planar 4:2:0 frame. Chroma planes are half width and height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoFrame {
    pub width: u32,
    pub height: u32,
    pub bit_depth: u8,
    pub plane_y: Plane,
    pub plane_u: Plane,
    pub plane_v: Plane,
}

impl VideoFrame {
    /// Builds a frame after checking every container invariant: even
    /// dimensions, exact plane sizes and samples within `[0, 2^depth - 1]`.
    pub fn new(
        width: u32,
        height: u32,
        bit_depth: u8,
        plane_y: Plane,
        plane_u: Plane,
        plane_v: Plane,
    ) -> Result<Self, MediaError> {
        if width == 0 || height == 0 || width % 2 != 0 || height % 2 != 0 {
            return Err(MediaError::InvalidGeometry(format!(
                "dimensions must be even and positive, got {width}x{height}"
            )));
        }
        if bit_depth != 8 && bit_depth != 10 {
            return Err(MediaError::InvalidGeometry(format!(
                "bit depth must be 8 or 10, got {bit_depth}"
            )));
        }
        let (w, h) = (width as usize, height as usize);
        if plane_y.width != w || plane_y.height != h {
            return Err(MediaError::InvalidGeometry("luma plane size".into()));
        }
        if plane_u.width != w / 2
            || plane_u.height != h / 2
            || plane_v.width != w / 2
            || plane_v.height != h / 2
        {
            return Err(MediaError::InvalidGeometry("chroma plane size".into()));
        }
        let max = (1u16 << bit_depth) - 1;
        for (plane, tag) in [(&plane_y, 'y'), (&plane_u, 'u'), (&plane_v, 'v')] {
            if let Some(&bad) = plane.data.iter().find(|&&s| s > max) {
                return Err(MediaError::SampleOutOfRange {
                    value: bad,
                    bit_depth,
                    frame: 0,
                    plane: tag,
                });
            }
        }
        Ok(VideoFrame {
            width,
            height,
            bit_depth,
            plane_y,
            plane_u,
            plane_v,
        })
    }

    /// Constant-valued frame, same value on every plane.
    pub fn constant(width: u32, height: u32, bit_depth: u8, value: u16) -> Self {
        let (w, h) = (width as usize, height as usize);
        VideoFrame::new(
            width,
            height,
            bit_depth,
            Plane::filled(w, h, value),
            Plane::filled(w / 2, h / 2, value),
            Plane::filled(w / 2, h / 2, value),
        )
        .expect("constant frame")
    }

    /// Maximum representable sample value, `2^depth - 1`.
    #[inline]
    pub fn sample_max(&self) -> u16 {
        (1u16 << self.bit_depth) - 1
    }

    pub fn planes(&self) -> [&Plane; 3] {
        [&self.plane_y, &self.plane_u, &self.plane_v]
    }

    fn geometry_tag(&self) -> String {
        format!("{}x{}@{}bit", self.width, self.height, self.bit_depth)
    }
}

/// Frame rate as a positive rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fps {
    pub num: u32,
    pub den: u32,
}

impl Fps {
    pub fn new(num: u32, den: u32) -> Self {
        assert!(num > 0 && den > 0, "fps must be positive");
        Fps { num, den }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::fmt::Display for Fps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// An ordered run of identically-sized frames with a frame rate and a name.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoSequence {
    pub name: String,
    pub fps: Fps,
    pub frames: Vec<VideoFrame>,
}

impl VideoSequence {
    pub fn new(name: impl Into<String>, fps: Fps, frames: Vec<VideoFrame>) -> Result<Self, MediaError> {
        if frames.is_empty() {
            return Err(MediaError::EmptySequence);
        }
        let expected = frames[0].geometry_tag();
        for (i, f) in frames.iter().enumerate().skip(1) {
            if f.geometry_tag() != expected {
                return Err(MediaError::FrameMismatch {
                    index: i,
                    got: f.geometry_tag(),
                    expected,
                });
            }
        }
        Ok(VideoSequence {
            name: name.into(),
            fps,
            frames,
        })
    }

    pub fn width(&self) -> u32 {
        self.frames[0].width
    }

    pub fn height(&self) -> u32 {
        self.frames[0].height
    }

    pub fn bit_depth(&self) -> u8 {
        self.frames[0].bit_depth
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.frames.len() as f64 / self.fps.as_f64()
    }
}

/// Bytes occupied by one stored sample: 1 for 8-bit, 2 for 10-bit.
pub fn bytes_per_sample(bit_depth: u8) -> u64 {
    if bit_depth > 8 {
        2
    } else {
        1
    }
}

/// Exact byte size of one planar 4:2:0 frame on disk.
pub fn frame_byte_size(width: u32, height: u32, bit_depth: u8) -> u64 {
    let samples = width as u64 * height as u64 * 3 / 2;
    samples * bytes_per_sample(bit_depth)
}

/// Reads a headerless planar 4:2:0 file into a [`VideoSequence`].
///
/// The file size must be an exact multiple of one frame's byte size, and
/// 10-bit samples must fit in their low 10 bits.
pub fn read_raw_video(
    path: impl AsRef<Path>,
    width: u32,
    height: u32,
    bit_depth: u8,
    fps: Fps,
) -> Result<VideoSequence, MediaError> {
    let path = path.as_ref();
    if width == 0 || height == 0 || width % 2 != 0 || height % 2 != 0 {
        return Err(MediaError::InvalidGeometry(format!(
            "dimensions must be even and positive, got {width}x{height}"
        )));
    }
    let bytes = fs::read(path).map_err(|source| MediaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let frame_bytes = frame_byte_size(width, height, bit_depth);
    if bytes.is_empty() || bytes.len() as u64 % frame_bytes != 0 {
        return Err(MediaError::SizeMismatch {
            actual: bytes.len() as u64,
            frame_bytes,
            width,
            height,
            bit_depth,
        });
    }
    let n_frames = (bytes.len() as u64 / frame_bytes) as usize;
    let max = (1u16 << bit_depth) - 1;
    let (w, h) = (width as usize, height as usize);
    let plane_dims = [(w, h), (w / 2, h / 2), (w / 2, h / 2)];
    let per_sample = bytes_per_sample(bit_depth) as usize;

    let mut frames = Vec::with_capacity(n_frames);
    let mut offset = 0usize;
    for frame_idx in 0..n_frames {
        let mut planes = Vec::with_capacity(3);
        for (&(pw, ph), tag) in plane_dims.iter().zip(['y', 'u', 'v']) {
            let n = pw * ph;
            let mut data = Vec::with_capacity(n);
            if per_sample == 1 {
                data.extend(bytes[offset..offset + n].iter().map(|&b| b as u16));
            } else {
                for chunk in bytes[offset..offset + 2 * n].chunks_exact(2) {
                    data.push(u16::from_le_bytes([chunk[0], chunk[1]]));
                }
            }
            offset += n * per_sample;
            if let Some(&bad) = data.iter().find(|&&s| s > max) {
                return Err(MediaError::SampleOutOfRange {
                    value: bad,
                    bit_depth,
                    frame: frame_idx,
                    plane: tag,
                });
            }
            planes.push(Plane::new(pw, ph, data));
        }
        let v = planes.pop().unwrap();
        let u = planes.pop().unwrap();
        let y = planes.pop().unwrap();
        frames.push(VideoFrame::new(width, height, bit_depth, y, u, v)?);
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".into());
    VideoSequence::new(name, fps, frames)
}

/// Writes a sequence as headerless planar YUV; [`read_raw_video`] inverts it.
pub fn write_raw_video(seq: &VideoSequence, path: impl AsRef<Path>) -> Result<PathBuf, MediaError> {
    let path = path.as_ref();
    let per_sample = bytes_per_sample(seq.bit_depth());
    let mut out = Vec::with_capacity(
        seq.frame_count() * frame_byte_size(seq.width(), seq.height(), seq.bit_depth()) as usize,
    );
    for frame in &seq.frames {
        for plane in frame.planes() {
            if per_sample == 1 {
                out.extend(plane.data.iter().map(|&s| s as u8));
            } else {
                for &s in &plane.data {
                    out.extend_from_slice(&s.to_le_bytes());
                }
            }
        }
    }
    let mut file = fs::File::create(path).map_err(|source| MediaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(&out).map_err(|source| MediaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}

/// Fields parsed from the `<base>_<W>x<H>_<fps>fps_<depth>bit.yuv` convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedName {
    pub base: String,
    pub width: u32,
    pub height: u32,
    pub fps: u32,
    pub bit_depth: u8,
}

/// Parses geometry out of a conventional raw-video filename so callers do
/// not have to repeat geometry flags.
pub fn parse_sequence_filename(name: &str) -> Result<ParsedName, MediaError> {
    let err = |token: &str| MediaError::ParseName {
        name: name.to_string(),
        token: token.to_string(),
    };
    let stem = name.strip_suffix(".yuv").ok_or_else(|| err(name))?;
    let parts: Vec<&str> = stem.split('_').collect();
    if parts.len() < 4 {
        return Err(err(stem));
    }
    let depth_tok = parts[parts.len() - 1];
    let fps_tok = parts[parts.len() - 2];
    let dims_tok = parts[parts.len() - 3];
    let base = parts[..parts.len() - 3].join("_");
    if base.is_empty() {
        return Err(err(stem));
    }

    let depth_str = depth_tok.strip_suffix("bit").ok_or_else(|| err(depth_tok))?;
    let bit_depth: u8 = depth_str.parse().map_err(|_| err(depth_tok))?;
    let fps_str = fps_tok.strip_suffix("fps").ok_or_else(|| err(fps_tok))?;
    let fps: u32 = fps_str.parse().map_err(|_| err(fps_tok))?;
    let (w_str, h_str) = dims_tok.split_once('x').ok_or_else(|| err(dims_tok))?;
    let width: u32 = w_str.parse().map_err(|_| err(dims_tok))?;
    let height: u32 = h_str.parse().map_err(|_| err(dims_tok))?;

    Ok(ParsedName {
        base,
        width,
        height,
        fps,
        bit_depth,
    })
}
