//! Encoder orchestration: adapters over external codec commands, the
//! built-in deterministic toy codec, target-bitrate QP search, and
//! complexity accounting.

mod adapter;
mod target;
pub mod toy;

pub use adapter::{
    complexity_ratio, encode_with_qp, format_complexity, Backend, CodecError, EncodeResult,
    EncoderAdapter,
};
pub use target::{target_bitrate_search, RateTargetOutcome};
pub use toy::{toy_decode, toy_encode, ToyError, TOY_QP_MAX};
