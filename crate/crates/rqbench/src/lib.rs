//! Rate-quality benchmarking harness for video codecs.
//!
//! `rqbench` reproduces a full codec-comparison methodology end to end:
//! multi-resolution encoding ladders with convex-hull (dynamic-optimizer)
//! selection, target-bitrate QP search, objective quality metrics,
//! Bjøntegaard Delta comparisons, subjective DMOS analytics with
//! significance testing, and objective-metric correlation analysis.
//!
//! The crate is organised around the stages of that pipeline:
//!
//! - [`media`]: raw planar YUV 4:2:0 I/O at 8/10-bit depth
//! - [`resample`]: Lanczos-3 spatial resampling for ladder construction
//! - [`codecs`]: encoder adapters, a built-in deterministic toy codec,
//!   target-bitrate search and complexity accounting
//! - [`metrics`]: PSNR, SSIM, MS-SSIM, SI/TI and external-metric adapters
//! - [`ratequality`]: rate-quality curves, convex hulls and BD measurements
//! - [`subjective`]: DSCQS difference scores, DMOS, BT.500 screening and
//!   one-way ANOVA significance matrices
//! - [`correlation`]: logistic fitting of metrics against DMOS and the
//!   SROCC/LCC/OR/RMSE statistics
//! - [`cli`]: run manifests, subcommands and CSV/SVG report emission
//! - [`synth`]: seeded synthetic test content used by the examples and
//!   the desk-scale test corpus
//!
//! Each major capability has a runnable demo under `examples/`; the thin
//! `rqbench` binary fronts the same library through subcommands.

mod linalg;
pub mod cli;
pub mod codecs;
pub mod correlation;
pub mod media;
pub mod metrics;
pub mod ratequality;
pub mod resample;
pub mod subjective;
pub mod synth;

pub use media::{Fps, VideoFrame, VideoSequence};
