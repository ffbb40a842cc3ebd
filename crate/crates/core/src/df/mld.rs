//! Maximum-likelihood detection over the direct block and any number of
//! decoded-and-forwarded relay blocks.
//!
//! The joint likelihood of a candidate bit word factorises into the direct
//! Gaussian term and, per relay branch, a mixture over the relay's possible
//! substitutions. Per-bit ratios are sums of joint likelihoods over all
//! words with the bit set versus cleared, accumulated in the log domain.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::block::BlockShape;
use super::constellation::Constellation;
use super::relay::RelayErrorModel;
use super::DfError;

/// Largest block the detector enumerates, in bits.
pub const MAX_BLOCK_BITS: usize = 20;

const RATIO_FLOOR: f64 = 1e-300;
const RATIO_CEIL: f64 = 1e300;

/// `log CN(y; mean, noise)`.
fn log_gauss(y: Complex64, mean: Complex64, noise: f64) -> f64 {
    -(y - mean).norm_sqr() / noise - (PI * noise).ln()
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `p(y | x) = prod_t exp(-|y_t - x_t|^2 / N) / (pi N)` for a block of
/// received symbols and the candidate transmitted symbols (already scaled).
pub fn likelihood_direct(y: &[Complex64], x: &[Complex64], noise: f64) -> f64 {
    log_likelihood_direct(y, x, noise).exp()
}

pub fn log_likelihood_direct(y: &[Complex64], x: &[Complex64], noise: f64) -> f64 {
    assert_eq!(y.len(), x.len(), "block lengths differ");
    y.iter().zip(x).map(|(&y, &x)| log_gauss(y, x, noise)).sum()
}

/// One decoded-and-forwarded observation of the block.
#[derive(Debug, Clone, Copy)]
pub struct RelayBranch<'a> {
    /// `r` received relay symbols.
    pub y: &'a [Complex64],
    /// Amplitude the relay transmits with (`sqrt` of its power).
    pub amplitude: f64,
    /// Noise power of the cooperation sub-channel.
    pub noise: f64,
    pub model: &'a RelayErrorModel,
}

impl RelayBranch<'_> {
    /// `log p(y_j | relay label u)` marginalised over substitutions, for
    /// every position `j` and label `u`: `table[j * Mr + u]`.
    fn log_table(&self, relay: &Constellation) -> Vec<f64> {
        let mr = relay.order();
        let mut table = Vec::with_capacity(self.y.len() * mr);
        for &y in self.y {
            let per_point: Vec<f64> = relay
                .points()
                .iter()
                .map(|&p| log_gauss(y, p * self.amplitude, self.noise))
                .collect();
            for u in 0..mr {
                let row = self.model.row(u);
                table.push(log_sum_exp(
                    row.iter()
                        .zip(&per_point)
                        .filter(|(p, _)| **p > 0.0)
                        .map(|(p, l)| p.ln() + l),
                ));
            }
        }
        table
    }
}

/// `p(y_12 | b)` for one relay branch and candidate word `b`.
pub fn likelihood_relay(branch: &RelayBranch<'_>, word: u64, shape: &BlockShape, relay: &Constellation) -> f64 {
    let table = branch.log_table(relay);
    let mr = relay.order();
    (0..shape.r)
        .map(|j| table[j * mr + shape.relay_label(word, j)])
        .sum::<f64>()
        .exp()
}

/// Per-bit likelihood ratios `p(y | b_k = 1) / p(y | b_k = 0)`, stored as
/// natural logs.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrBlock {
    log_ratios: Vec<f64>,
}

impl LlrBlock {
    pub fn len(&self) -> usize {
        self.log_ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_ratios.is_empty()
    }

    /// `ln` of the ratio for bit `k`.
    pub fn log_ratio(&self, k: usize) -> f64 {
        self.log_ratios[k]
    }

    pub fn log_ratios(&self) -> &[f64] {
        &self.log_ratios
    }

    /// The ratio itself, clamped to `[1e-300, 1e300]`.
    pub fn ratio(&self, k: usize) -> f64 {
        self.log_ratios[k].exp().clamp(RATIO_FLOOR, RATIO_CEIL)
    }

    /// Hard decisions (`ratio > 1`) packed as a block word.
    pub fn decisions(&self) -> u64 {
        self.log_ratios
            .iter()
            .fold(0u64, |acc, &l| (acc << 1) | u64::from(l > 0.0))
    }
}

/// Everything the detector needs besides the received samples.
#[derive(Debug, Clone, Copy)]
pub struct Detector<'a> {
    pub shape: &'a BlockShape,
    pub source: &'a Constellation,
    pub relay: &'a Constellation,
    /// Amplitude of the source symbols at the receiver (`sqrt(P)`).
    pub source_amplitude: f64,
    /// Downlink noise power.
    pub direct_noise: f64,
}

impl Detector<'_> {
    /// Joint log-likelihood of every candidate word, indexed by the word.
    pub fn log_likelihoods(&self, direct: &[Complex64], branches: &[RelayBranch<'_>]) -> Result<Vec<f64>, DfError> {
        let shape = self.shape;
        if shape.n > MAX_BLOCK_BITS {
            return Err(DfError::EnumerationBound {
                bits: shape.n,
                max: MAX_BLOCK_BITS,
            });
        }
        if direct.len() != shape.s || branches.iter().any(|b| b.y.len() != shape.r) {
            return Err(DfError::ShapeMismatch);
        }
        let ms = self.source.order();
        let mr = self.relay.order();
        let direct_table: Vec<f64> = direct
            .iter()
            .flat_map(|&y| {
                self.source
                    .points()
                    .iter()
                    .map(move |&p| log_gauss(y, p * self.source_amplitude, self.direct_noise))
            })
            .collect();
        let relay_tables: Vec<Vec<f64>> = branches.iter().map(|b| b.log_table(self.relay)).collect();

        let words = 1u64 << shape.n;
        Ok((0..words)
            .map(|w| {
                let mut ll = 0.0;
                for t in 0..shape.s {
                    ll += direct_table[t * ms + shape.source_label(w, t)];
                }
                for table in &relay_tables {
                    for j in 0..shape.r {
                        ll += table[j * mr + shape.relay_label(w, j)];
                    }
                }
                ll
            })
            .collect())
    }

    /// Generalised MLD: per-bit likelihood ratios of the block.
    pub fn llr(&self, direct: &[Complex64], branches: &[RelayBranch<'_>]) -> Result<LlrBlock, DfError> {
        let ll = self.log_likelihoods(direct, branches)?;
        let n = self.shape.n;
        // max per (bit, value) first so no set underflows to zero
        let mut max = vec![[f64::NEG_INFINITY; 2]; n];
        for (w, &l) in ll.iter().enumerate() {
            for (k, m) in max.iter_mut().enumerate() {
                let v = (w >> (n - 1 - k)) & 1;
                if l > m[v] {
                    m[v] = l;
                }
            }
        }
        let mut sums = vec![[0.0f64; 2]; n];
        for (w, &l) in ll.iter().enumerate() {
            for k in 0..n {
                let v = (w >> (n - 1 - k)) & 1;
                sums[k][v] += (l - max[k][v]).exp();
            }
        }
        let log_ratios = (0..n)
            .map(|k| (max[k][1] + sums[k][1].ln()) - (max[k][0] + sums[k][0].ln()))
            .collect();
        Ok(LlrBlock { log_ratios })
    }

    /// Maximum-ratio combining of the direct block with relay blocks that
    /// use the source constellation symbol for symbol, then slicing.
    /// Relay decoding errors are ignored. Needs `Ms == Mr`.
    pub fn mrc_decide(&self, direct: &[Complex64], branches: &[RelayBranch<'_>]) -> Result<u64, DfError> {
        if self.source.order() != self.relay.order() || self.shape.s != self.shape.r {
            return Err(DfError::MrcNeedsSameConstellation);
        }
        let bits = self.source.bits_per_symbol();
        let a = self.source_amplitude;
        let gain = a * a / self.direct_noise
            + branches
                .iter()
                .map(|b| b.amplitude * b.amplitude / b.noise)
                .sum::<f64>();
        Ok((0..self.shape.s).fold(0u64, |acc, t| {
            let mut z = direct[t] * (a / self.direct_noise);
            for b in branches {
                z += b.y[t] * (b.amplitude / b.noise);
            }
            (acc << bits) | self.source.nearest(z / gain) as u64
        }))
    }
}
