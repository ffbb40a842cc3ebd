//! Block shapes that keep the coded bit rate equal on both sides of a relay,
//! and the bit-word helpers shared by the relay and the detector.
//!
//! A block of `n` coded bits is held in a `u64`, first bit in the most
//! significant used position. Source symbol `t` carries bits
//! `t*bs .. (t+1)*bs`, relay symbol `j` carries bits `j*br .. (j+1)*br`.

use serde::{Deserialize, Serialize};

use super::constellation::{Constellation, MAX_ORDER};
use super::DfError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockShape {
    /// Source symbols per block.
    pub s: usize,
    /// Relay symbols per block.
    pub r: usize,
    /// Coded bits per block.
    pub n: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl BlockShape {
    /// Smallest block for the given bits per source / relay symbol.
    pub fn for_bits(source_bits: u32, relay_bits: u32) -> Self {
        let (bs, br) = (source_bits as usize, relay_bits as usize);
        let n = bs / gcd(bs, br) * br;
        BlockShape {
            s: n / bs,
            r: n / br,
            n,
        }
    }

    pub fn source_bits(&self) -> u32 {
        (self.n / self.s) as u32
    }

    pub fn relay_bits(&self) -> u32 {
        (self.n / self.r) as u32
    }

    /// Label of source symbol `t` inside `word`.
    pub fn source_label(&self, word: u64, t: usize) -> usize {
        label_at(word, self.n, self.source_bits(), t)
    }

    /// Label of relay symbol `j` inside `word`.
    pub fn relay_label(&self, word: u64, j: usize) -> usize {
        label_at(word, self.n, self.relay_bits(), j)
    }

    /// Packs source-symbol labels into a bit word.
    pub fn word_from_source_labels(&self, labels: &[usize]) -> u64 {
        pack(labels, self.source_bits())
    }

    pub fn word_from_relay_labels(&self, labels: &[usize]) -> u64 {
        pack(labels, self.relay_bits())
    }

    /// Value of bit `k` (0 = first) of `word`.
    pub fn bit(&self, word: u64, k: usize) -> bool {
        (word >> (self.n - 1 - k)) & 1 == 1
    }
}

fn label_at(word: u64, n: usize, bits: u32, idx: usize) -> usize {
    let shift = n - (idx + 1) * bits as usize;
    ((word >> shift) & ((1u64 << bits) - 1)) as usize
}

fn pack(labels: &[usize], bits: u32) -> u64 {
    labels.iter().fold(0u64, |acc, &l| (acc << bits) | l as u64)
}

/// Relay order that carries the source's coded bit rate over a sub-channel
/// of width `subchannel` when the downlink is `downlink` wide.
///
/// Symbol rates scale with bandwidth, so `log2 Mr = log2 Ms * B_DL / ΔB`.
pub fn choose_compatible_modulation(
    source_order: usize,
    downlink: f64,
    subchannel: f64,
) -> Result<(usize, BlockShape), DfError> {
    let source = Constellation::new(source_order)?;
    if !(downlink > 0.0 && subchannel > 0.0) {
        return Err(DfError::InvalidBandwidth { downlink, subchannel });
    }
    let required = source.bits_per_symbol() as f64 * downlink / subchannel;
    let rounded = required.round();
    let incompatible = || DfError::Incompatible {
        source_order,
        bits_per_symbol: required,
    };
    if (required - rounded).abs() > 1e-9 * required.max(1.0) || rounded < 1.0 {
        return Err(incompatible());
    }
    let relay_bits = rounded as u32;
    if relay_bits > MAX_ORDER.trailing_zeros() {
        return Err(incompatible());
    }
    let relay_order = 1usize << relay_bits;
    Constellation::new(relay_order).map_err(|_| incompatible())?;
    Ok((relay_order, BlockShape::for_bits(source.bits_per_symbol(), relay_bits)))
}
