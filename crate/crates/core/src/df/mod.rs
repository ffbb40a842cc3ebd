//! Decode-and-forward: constellations, the bit-rate compatibility rule
//! between source and relay modulations, the relay decoding-error model and
//! the generalised maximum-likelihood detector.

mod block;
mod constellation;
mod mld;
mod relay;

pub use block::{choose_compatible_modulation, BlockShape};
pub use constellation::{Constellation, MAX_ORDER};
pub use mld::{
    likelihood_direct, likelihood_relay, log_likelihood_direct, Detector, LlrBlock, RelayBranch, MAX_BLOCK_BITS,
};
pub use relay::{hard_decode, relay_decode_and_remap, remap, RelayErrorModel};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DfError {
    #[error("modulation order {order} is not supported; use 2 (BPSK) or a square QAM order 4, 16, ..., 4096")]
    UnsupportedOrder { order: usize },
    #[error(
        "no square QAM relay modulation matches a {source_order}-ary source: the relay needs {bits_per_symbol} bits per symbol; \
         pick a sub-channel width that makes this 1 or an even integer up to 12"
    )]
    Incompatible { source_order: usize, bits_per_symbol: f64 },
    #[error("bandwidths must be positive, got downlink {downlink} and sub-channel {subchannel}")]
    InvalidBandwidth { downlink: f64, subchannel: f64 },
    #[error("block of {bits} bits exceeds the detector's enumeration bound of {max} bits; use a smaller block shape")]
    EnumerationBound { bits: usize, max: usize },
    #[error("received block lengths do not match the block shape")]
    ShapeMismatch,
    #[error("row {row} of the relay error model is not a probability distribution")]
    InvalidModel { row: usize },
    #[error("MRC combining needs the relay to use the source constellation")]
    MrcNeedsSameConstellation,
}
