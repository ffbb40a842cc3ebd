//! Relay-side processing: hard decoding, bit remapping, and the
//! substitution model of the relay's decoding errors.

use num_complex::Complex64;

use super::block::BlockShape;
use super::constellation::Constellation;
use super::DfError;

/// `Pr[relay sends label v | correct relay label is u]`, pooled over the
/// relay symbol positions of a block.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayErrorModel {
    order: usize,
    /// Row-major `order x order`.
    transition: Vec<f64>,
}

impl RelayErrorModel {
    /// Error-free relay.
    pub fn identity(order: usize) -> Self {
        let mut transition = vec![0.0; order * order];
        for u in 0..order {
            transition[u * order + u] = 1.0;
        }
        RelayErrorModel { order, transition }
    }

    /// Relay output independent of the correct symbol.
    pub fn uniform(order: usize) -> Self {
        RelayErrorModel {
            order,
            transition: vec![1.0 / order as f64; order * order],
        }
    }

    /// Builds a model from explicit rows, checking they are distributions.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DfError> {
        let order = rows.len();
        let mut transition = Vec::with_capacity(order * order);
        for (u, row) in rows.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.len() != order || row.iter().any(|p| p.is_nan() || *p < 0.0) || (sum - 1.0).abs() > 1e-12 {
                return Err(DfError::InvalidModel { row: u });
            }
            transition.extend_from_slice(row);
        }
        Ok(RelayErrorModel { order, transition })
    }

    /// Empirical model from substitution counts. Rows that were never
    /// observed take the corresponding row of `fallback`.
    pub fn from_counts(counts: &[u64], fallback: &RelayErrorModel) -> Self {
        let order = fallback.order;
        assert_eq!(counts.len(), order * order, "count matrix size");
        let mut transition = vec![0.0; order * order];
        for u in 0..order {
            let row = &counts[u * order..(u + 1) * order];
            let total: u64 = row.iter().sum();
            for v in 0..order {
                transition[u * order + v] = if total == 0 {
                    fallback.prob(u, v)
                } else {
                    row[v] as f64 / total as f64
                };
            }
        }
        RelayErrorModel { order, transition }
    }

    /// Model of a relay that slices each source symbol on its own
    /// (`amplitude * point + noise` of variance `noise`) and remaps the
    /// bits onto `relay`. Bits of a source symbol that straddle two relay
    /// symbols are marginalised.
    pub fn hard_decision(
        source: &Constellation,
        relay: &Constellation,
        shape: &BlockShape,
        amplitude: f64,
        noise: f64,
    ) -> Self {
        let ms = source.order();
        let bs = source.bits_per_symbol() as usize;
        let br = relay.bits_per_symbol() as usize;
        let mr = relay.order();
        let sym = source.symbol_transitions(amplitude, noise);
        let mut transition = vec![0.0; mr * mr];
        for j in 0..shape.r {
            let (start, end) = (j * br, (j + 1) * br);
            // per overlapping source symbol: (local bit range, width, offset inside the relay label)
            let mut parts: Vec<Vec<f64>> = Vec::new();
            let mut layout: Vec<(usize, usize)> = Vec::new();
            for t in (start / bs)..end.div_ceil(bs) {
                let lo = start.max(t * bs) - t * bs;
                let hi = end.min((t + 1) * bs) - t * bs;
                let w = hi - lo;
                let shift = bs - hi;
                let mask = (1usize << w) - 1;
                let mut m = vec![0.0; 1 << (2 * w)];
                for x in 0..ms {
                    for y in 0..ms {
                        let (xu, yv) = ((x >> shift) & mask, (y >> shift) & mask);
                        m[(xu << w) | yv] += sym[x * ms + y];
                    }
                }
                let weight = (1usize << w) as f64 / ms as f64;
                m.iter_mut().for_each(|p| *p *= weight);
                let offset = end - (t * bs + hi);
                parts.push(m);
                layout.push((w, offset));
            }
            for u in 0..mr {
                for v in 0..mr {
                    let mut p = 1.0;
                    for (m, &(w, offset)) in parts.iter().zip(&layout) {
                        let mask = (1usize << w) - 1;
                        let (uu, vv) = ((u >> offset) & mask, (v >> offset) & mask);
                        p *= m[(uu << w) | vv];
                    }
                    transition[u * mr + v] += p / shape.r as f64;
                }
            }
        }
        RelayErrorModel { order: mr, transition }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.transition[from * self.order + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.transition[from * self.order..(from + 1) * self.order]
    }

    /// Average probability that the relay symbol is wrong.
    pub fn symbol_error_rate(&self) -> f64 {
        (0..self.order).map(|u| 1.0 - self.prob(u, u)).sum::<f64>() / self.order as f64
    }

    pub fn is_identity(&self) -> bool {
        (0..self.order).all(|u| self.prob(u, u) == 1.0)
    }
}

/// Hard-decodes a block of source symbols received with `amplitude` and
/// returns the decoded bit word.
pub fn hard_decode(y: &[Complex64], amplitude: f64, source: &Constellation, shape: &BlockShape) -> u64 {
    debug_assert_eq!(y.len(), shape.s);
    y.iter().fold(0u64, |acc, &v| {
        (acc << source.bits_per_symbol()) | source.nearest(v / amplitude) as u64
    })
}

/// Relay labels that carry `word`.
pub fn remap(word: u64, shape: &BlockShape) -> Vec<usize> {
    (0..shape.r).map(|j| shape.relay_label(word, j)).collect()
}

/// Symbol-wise ML decision on the relay's downlink block followed by
/// remapping of the decided bits onto the relay constellation.
pub fn relay_decode_and_remap(
    y: &[Complex64],
    amplitude: f64,
    source: &Constellation,
    relay: &Constellation,
    shape: &BlockShape,
) -> Vec<usize> {
    debug_assert_eq!(relay.bits_per_symbol() as usize * shape.r, shape.n);
    remap(hard_decode(y, amplitude, source, shape), shape)
}
