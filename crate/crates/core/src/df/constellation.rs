//! Gray-labelled square QAM (and BPSK) with unit average energy.

use num_complex::Complex64;

use super::DfError;

/// Largest order the toolkit builds.
pub const MAX_ORDER: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits: u32,
    /// Levels per dimension (`sqrt(M)`; 2 for BPSK, which uses only I).
    levels: usize,
    /// Distance from the origin to the innermost level.
    scale: f64,
    /// `points[label]`.
    points: Vec<Complex64>,
}

/// Binary-reflected Gray code of a level index.
fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

impl Constellation {
    /// BPSK for `order == 2`, square QAM for any power of four up to 4096.
    pub fn new(order: usize) -> Result<Self, DfError> {
        if order == 2 {
            return Ok(Self::bpsk());
        }
        let bits = order.trailing_zeros();
        if order < 4 || !order.is_power_of_two() || !bits.is_multiple_of(2) || order > MAX_ORDER {
            return Err(DfError::UnsupportedOrder { order });
        }
        let levels = 1usize << (bits / 2);
        let half_bits = bits / 2;
        let scale = (3.0 / (2.0 * (order as f64 - 1.0))).sqrt();
        let mut points = vec![Complex64::new(0.0, 0.0); order];
        for i in 0..levels {
            for q in 0..levels {
                let label = (gray(i) << half_bits) | gray(q);
                points[label] = Complex64::new(
                    scale * (2.0 * i as f64 - (levels as f64 - 1.0)),
                    scale * (2.0 * q as f64 - (levels as f64 - 1.0)),
                );
            }
        }
        Ok(Constellation {
            order,
            bits,
            levels,
            scale,
            points,
        })
    }

    pub fn bpsk() -> Self {
        Constellation {
            order: 2,
            bits: 1,
            levels: 2,
            scale: 1.0,
            points: vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    pub fn is_bpsk(&self) -> bool {
        self.order == 2
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    fn slice_level(&self, x: f64) -> usize {
        let l = self.levels as f64;
        let idx = ((x / self.scale + l - 1.0) / 2.0).round();
        idx.clamp(0.0, l - 1.0) as usize
    }

    /// Label of the closest point to `y` (minimum Euclidean distance).
    pub fn nearest(&self, y: Complex64) -> usize {
        if self.is_bpsk() {
            return usize::from(y.re >= 0.0);
        }
        let half_bits = self.bits / 2;
        (gray(self.slice_level(y.re)) << half_bits) | gray(self.slice_level(y.im))
    }

    /// Per-dimension level transition probabilities of a minimum-distance
    /// slicer: `out[l][m] = Pr[decide level m | sent level l]` for points
    /// scaled by `amplitude` in complex noise of total variance `noise`.
    pub fn level_transitions(&self, amplitude: f64, noise: f64) -> Vec<Vec<f64>> {
        let l = self.levels;
        let sigma = (noise / 2.0).sqrt();
        let d = amplitude * self.scale;
        // Pr[N(0, sigma^2) <= t]
        let cdf = |t: f64| 0.5 * libm::erfc(-t / (sigma * std::f64::consts::SQRT_2));
        (0..l)
            .map(|from| {
                let centre = d * (2.0 * from as f64 - (l as f64 - 1.0));
                (0..l)
                    .map(|to| {
                        let lo = if to == 0 {
                            f64::NEG_INFINITY
                        } else {
                            d * (2.0 * to as f64 - l as f64)
                        };
                        let hi = if to == l - 1 {
                            f64::INFINITY
                        } else {
                            d * (2.0 * to as f64 + 2.0 - l as f64)
                        };
                        let upper = if hi.is_infinite() { 1.0 } else { cdf(hi - centre) };
                        let lower = if lo.is_infinite() { 0.0 } else { cdf(lo - centre) };
                        upper - lower
                    })
                    .collect()
            })
            .collect()
    }

    /// Symbol transition matrix of the hard slicer,
    /// `out[u * M + v] = Pr[decide label v | sent label u]`.
    pub fn symbol_transitions(&self, amplitude: f64, noise: f64) -> Vec<f64> {
        let m = self.order;
        let pam = self.level_transitions(amplitude, noise);
        let mut out = vec![0.0; m * m];
        if self.is_bpsk() {
            for u in 0..2 {
                for v in 0..2 {
                    out[u * 2 + v] = pam[u][v];
                }
            }
            return out;
        }
        let half_bits = self.bits / 2;
        let mask = (1usize << half_bits) - 1;
        let level_of = |g: usize| -> usize {
            // inverse Gray
            let mut i = g;
            let mut shift = g >> 1;
            while shift != 0 {
                i ^= shift;
                shift >>= 1;
            }
            i
        };
        for u in 0..m {
            let (ui, uq) = (level_of(u >> half_bits), level_of(u & mask));
            for v in 0..m {
                let (vi, vq) = (level_of(v >> half_bits), level_of(v & mask));
                out[u * m + v] = pam[ui][vi] * pam[uq][vq];
            }
        }
        out
    }

    /// Closed-form symbol error rate of the minimum-distance slicer at
    /// `snr = amplitude^2 / noise`.
    pub fn symbol_error_rate(&self, snr: f64) -> f64 {
        let q = |x: f64| 0.5 * libm::erfc(x / std::f64::consts::SQRT_2);
        if self.is_bpsk() {
            return q((2.0 * snr).sqrt());
        }
        let m = self.order as f64;
        let l = self.levels as f64;
        let p = 2.0 * (1.0 - 1.0 / l) * q((3.0 * snr / (m - 1.0)).sqrt());
        1.0 - (1.0 - p) * (1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_energy_and_bijection() {
        for order in [2, 4, 16, 64, 256, 1024, 4096] {
            let c = Constellation::new(order).unwrap();
            assert_relative_eq!(c.average_energy(), 1.0, max_relative = 1e-12);
            let mut seen = std::collections::HashSet::new();
            for p in c.points() {
                assert!(seen.insert((p.re.to_bits(), p.im.to_bits())));
            }
            for (label, p) in c.points().iter().enumerate() {
                assert_eq!(c.nearest(*p), label);
            }
        }
    }

    #[test]
    fn rejects_non_square_orders() {
        for order in [0, 1, 3, 8, 32, 8192] {
            assert!(Constellation::new(order).is_err());
        }
    }

    #[test]
    fn neighbours_differ_in_one_bit() {
        let c = Constellation::new(64).unwrap();
        let min_d = 2.0 * (3.0f64 / 126.0).sqrt();
        for (u, pu) in c.points().iter().enumerate() {
            for (v, pv) in c.points().iter().enumerate() {
                if ((pu - pv).norm() - min_d).abs() < 1e-9 {
                    assert_eq!((u ^ v).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn transitions_are_stochastic_and_match_ser() {
        for order in [2, 4, 16] {
            let c = Constellation::new(order).unwrap();
            let m = c.order();
            let t = c.symbol_transitions(2.0, 1.3);
            let mut ser = 0.0;
            for u in 0..m {
                let row: f64 = t[u * m..(u + 1) * m].iter().sum();
                assert_relative_eq!(row, 1.0, max_relative = 1e-12);
                ser += (1.0 - t[u * m + u]) / m as f64;
            }
            assert_relative_eq!(ser, c.symbol_error_rate(4.0 / 1.3), max_relative = 1e-10);
        }
    }

    #[test]
    fn qpsk_ser_formula() {
        // 1 - (1 - Q(sqrt(rho)))^2
        let c = Constellation::new(4).unwrap();
        let q = 0.5 * libm::erfc(10f64.sqrt() / 2f64.sqrt());
        assert_relative_eq!(
            c.symbol_error_rate(10.0),
            1.0 - (1.0 - q) * (1.0 - q),
            max_relative = 1e-12
        );
    }
}
