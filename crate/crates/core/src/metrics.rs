//! System-level criteria, the SIMO ceiling, the best exchange count and the
//! "who starts first" decision regions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::af::run_recursion;
use crate::channel::{plan_bandwidth, BandwidthPlan, ChannelParams, CoopConfig, Receiver, Scheme};

/// Relative tolerance under which two rates count as equal.
pub const RATE_TIE_TOLERANCE: f64 = 1e-12;

/// `B_DL * min(log2(1 + rho_I), log2(1 + rho_II))` in bits/s.
pub fn rate_af(plan: &BandwidthPlan, rho: [f64; 2]) -> f64 {
    plan.downlink * (1.0 + rho[0].min(rho[1])).log2()
}

/// Single receiver owning both downlink observations with noiseless
/// combining: `B_DL * log2(1 + P/N1 + P/N2)` with `B_DL = B`.
pub fn simo_bound(params: &ChannelParams) -> f64 {
    let b = params.bandwidth;
    let p = params.source_power;
    b * (1.0 + p / (params.n1 * b) + p / (params.n2 * b)).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    /// Achievable common rate (AF only).
    pub rate_af: Option<f64>,
    /// `max(BER_1, BER_2)`.
    pub pe_max: f64,
    /// `BER_1 + BER_2`.
    pub pe_sum: f64,
    /// `(pe_max, pe_sum)`: the system error probability lies in between.
    pub pe_sys_bounds: (f64, f64),
    /// Fraction of bits wrong at either receiver, when measured jointly.
    pub pe_sys_mc: Option<f64>,
}

impl CriteriaReport {
    /// Criteria from the two raw BERs and, if available, the joint one.
    pub fn from_ber(ber: [f64; 2], pe_sys_mc: Option<f64>) -> Self {
        let pe_max = ber[0].max(ber[1]);
        let pe_sum = ber[0] + ber[1];
        CriteriaReport {
            rate_af: None,
            pe_max,
            pe_sum,
            pe_sys_bounds: (pe_max, pe_sum),
            pe_sys_mc,
        }
    }

    pub fn with_rate(self, rate: f64) -> Self {
        CriteriaReport {
            rate_af: Some(rate),
            ..self
        }
    }

    /// Whether the joint estimate lies inside its bounds.
    pub fn sandwich_holds(&self) -> bool {
        match self.pe_sys_mc {
            Some(p) => self.pe_sys_bounds.0 <= p && p <= self.pe_sys_bounds.1,
            None => true,
        }
    }
}

/// Rate of `template` with `rounds` rounds (`Ks` or `Ka`).
pub fn rate_for_rounds(params: &ChannelParams, template: &CoopConfig, rounds: usize) -> f64 {
    let config = template.with_rounds(rounds);
    let trajectory = run_recursion(params, &config);
    rate_af(&plan_bandwidth(params, &config), trajectory.final_rho())
}

/// Round count in `0..=max_rounds` with the highest rate. Rates within
/// [`RATE_TIE_TOLERANCE`] of the best count as ties and the smallest count
/// wins. Also returns every rate.
pub fn optimal_k(params: &ChannelParams, template: &CoopConfig, max_rounds: usize) -> (usize, Vec<f64>) {
    let rates: Vec<f64> = (0..=max_rounds).map(|k| rate_for_rounds(params, template, k)).collect();
    let best = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let k = rates
        .iter()
        .position(|&r| best - r <= RATE_TIE_TOLERANCE * best.abs())
        .unwrap_or(0);
    (k, rates)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    /// Receiver 1 should start.
    #[serde(rename = "R1")]
    One,
    #[serde(rename = "R2")]
    Two,
    Tie,
}

impl Winner {
    pub fn swapped(self) -> Winner {
        match self {
            Winner::One => Winner::Two,
            Winner::Two => Winner::One,
            Winner::Tie => Winner::Tie,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Winner::One => "R1",
            Winner::Two => "R2",
            Winner::Tie => "tie",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * t,
                    Spacing::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }

    fn midpoint(&self, a: f64, b: f64) -> f64 {
        match self.spacing {
            Spacing::Linear => 0.5 * (a + b),
            Spacing::Log => (a * b).sqrt(),
        }
    }
}

/// Winners for one cooperation power ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCurve {
    pub ratio_db: f64,
    /// `winners[i][j]` at `n1 = n1_axis[i]`, `n2 = n2_axis[j]`.
    pub winners: Vec<Vec<Winner>>,
    /// Rate with receiver 1 starting minus rate with receiver 2 starting.
    pub rate_diff: Vec<Vec<f64>>,
    /// `(n1, n2)` points where the winner flips along each `n1` column,
    /// refined by one bisection, plus grid points that are exact ties.
    pub boundary: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub n1_axis: Vec<f64>,
    pub n2_axis: Vec<f64>,
    pub curves: Vec<RegionCurve>,
}

/// Cooperation powers for a ratio in dB around the template's geometric
/// mean budget: `P12 = p 10^(r/20)`, `P21 = p 10^(-r/20)`.
pub fn powers_for_ratio(params: &ChannelParams, ratio_db: f64) -> (f64, f64) {
    let base = (params.p12 * params.p21).sqrt();
    (base * 10f64.powf(ratio_db / 20.0), base * 10f64.powf(-ratio_db / 20.0))
}

fn starter_diff(params: &ChannelParams, template: &CoopConfig, rounds: usize) -> (f64, Winner) {
    let with = |starter| {
        let mut cfg = *template;
        cfg.scheme = Scheme::Asymmetric {
            exchanges: rounds,
            starter,
        };
        rate_for_rounds(params, &cfg, rounds)
    };
    let (r1, r2) = (with(Receiver::One), with(Receiver::Two));
    let diff = r1 - r2;
    let winner = if diff.abs() <= RATE_TIE_TOLERANCE * r1.abs().max(r2.abs()) {
        Winner::Tie
    } else if diff > 0.0 {
        Winner::One
    } else {
        Winner::Two
    };
    (diff, winner)
}

/// For every grid point and power ratio, which receiver should start an
/// asymmetric cooperation of `rounds` exchanges. `template` supplies the
/// strategy, regime, source power, bandwidth, cooperation noise densities
/// and (through its geometric mean) the cooperation power level.
pub fn decision_regions(
    params: &ChannelParams,
    template: &CoopConfig,
    rounds: usize,
    n1_axis: &GridAxis,
    n2_axis: &GridAxis,
    ratios_db: &[f64],
) -> RegionMap {
    let xs = n1_axis.values();
    let ys = n2_axis.values();
    let curves = ratios_db
        .iter()
        .map(|&ratio_db| {
            let (p12, p21) = powers_for_ratio(params, ratio_db);
            let at = |n1: f64, n2: f64| {
                let p = ChannelParams {
                    n1,
                    n2,
                    p12,
                    p21,
                    ..*params
                };
                starter_diff(&p, template, rounds)
            };
            let grid: Vec<Vec<(f64, Winner)>> = xs
                .par_iter()
                .map(|&n1| ys.iter().map(|&n2| at(n1, n2)).collect())
                .collect();
            let mut boundary = Vec::new();
            for (i, col) in grid.iter().enumerate() {
                for j in 0..col.len() {
                    if col[j].1 == Winner::Tie {
                        boundary.push((xs[i], ys[j]));
                        continue;
                    }
                    if j + 1 == col.len() {
                        continue;
                    }
                    let d0 = col[j].0;
                    let flips = (col[j].1 == Winner::One && col[j + 1].1 == Winner::Two)
                        || (col[j].1 == Winner::Two && col[j + 1].1 == Winner::One);
                    if !flips {
                        continue;
                    }
                    let (lo, hi) = (ys[j], ys[j + 1]);
                    let mid = n2_axis.midpoint(lo, hi);
                    let (dm, _) = at(xs[i], mid);
                    let (a, b) = if (dm > 0.0) == (d0 > 0.0) { (mid, hi) } else { (lo, mid) };
                    boundary.push((xs[i], n2_axis.midpoint(a, b)));
                }
            }
            RegionCurve {
                ratio_db,
                winners: grid.iter().map(|c| c.iter().map(|x| x.1).collect()).collect(),
                rate_diff: grid.iter().map(|c| c.iter().map(|x| x.0).collect()).collect(),
                boundary,
            }
        })
        .collect();
    RegionMap {
        n1_axis: xs,
        n2_axis: ys,
        curves,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{with_subchannel, Regime, Strategy};
    use approx::assert_relative_eq;

    fn plan(b: f64) -> BandwidthPlan {
        let p = ChannelParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        with_subchannel(&p, b, b, 0.0)
    }

    #[test]
    fn rate_examples() {
        assert_eq!(rate_af(&plan(1.0), [3.0, 3.0]), 2.0);
        assert_eq!(rate_af(&plan(1.0), [1e6, 3.0]), 2.0);
        assert_eq!(rate_af(&plan(0.5), [3.0, 7.0]), 1.0);
    }

    #[test]
    fn symmetric_h1_rate_uses_a_third_of_the_band() {
        let params = ChannelParams::from_snr_db(10.0, 0.0, 30.0, 30.0).unwrap();
        let cfg = CoopConfig::af(
            Scheme::Symmetric { pairs: 1 },
            Strategy::ForwardCombined,
            Regime::FixedTotal,
        );
        let rho = run_recursion(&params, &cfg).final_rho();
        let expect = (1.0 / 3.0) * (1.0 + rho[0].min(rho[1])).log2();
        assert_relative_eq!(rate_for_rounds(&params, &cfg, 1), expect, max_relative = 1e-15);
    }

    #[test]
    fn criteria_examples() {
        let c = CriteriaReport::from_ber([0.1, 0.2], None);
        assert_eq!(c.pe_max, 0.2);
        assert_relative_eq!(c.pe_sum, 0.3, max_relative = 1e-15);
        let z = CriteriaReport::from_ber([0.0, 0.0], Some(0.0));
        assert_eq!((z.pe_max, z.pe_sum, z.pe_sys_mc), (0.0, 0.0, Some(0.0)));
        assert!(z.sandwich_holds());
        assert!(!CriteriaReport::from_ber([0.1, 0.2], Some(0.35)).sandwich_holds());
    }

    #[test]
    fn simo_examples() {
        let p = ChannelParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(simo_bound(&p), 3f64.log2(), max_relative = 1e-15);
        let far = ChannelParams { n2: 1e15, ..p };
        assert_relative_eq!(simo_bound(&far), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn no_cooperation_power_means_no_rounds() {
        let p = ChannelParams::from_snr_db(10.0, 0.0, 30.0, 30.0).unwrap();
        let p = ChannelParams {
            p12: 0.0,
            p21: 0.0,
            ..p
        };
        for scheme in [
            Scheme::Symmetric { pairs: 0 },
            Scheme::Asymmetric {
                exchanges: 0,
                starter: Receiver::One,
            },
        ] {
            let cfg = CoopConfig::af(scheme, Strategy::ForwardCombined, Regime::FixedTotal);
            assert_eq!(optimal_k(&p, &cfg, 5).0, 0);
        }
    }

    #[test]
    fn flat_s2_prefers_one_round() {
        let p = ChannelParams::from_snr_db(10.0, 0.0, 30.0, 30.0).unwrap();
        let cfg = CoopConfig::af(
            Scheme::Symmetric { pairs: 0 },
            Strategy::ForwardDownlink,
            Regime::FixedDownlink,
        );
        let (k, rates) = optimal_k(&p, &cfg, 5);
        assert_eq!(k, 1);
        for r in &rates[2..] {
            assert_relative_eq!(*r, rates[1], max_relative = 1e-12);
        }
    }

    #[test]
    fn axis_values() {
        let lin = GridAxis {
            min: 1.0,
            max: 3.0,
            points: 3,
            spacing: Spacing::Linear,
        };
        assert_eq!(lin.values(), vec![1.0, 2.0, 3.0]);
        let log = GridAxis {
            min: 0.01,
            max: 100.0,
            points: 5,
            spacing: Spacing::Log,
        };
        let v = log.values();
        assert_relative_eq!(v[2], 1.0, max_relative = 1e-14);
        assert_eq!(v[4], 100.0);
    }

    #[test]
    fn equal_receivers_tie_on_the_diagonal() {
        let params = ChannelParams::new(1.0, 1.0, 1.0, 0.01, 0.01, 10.0, 10.0, 1.0).unwrap();
        let cfg = CoopConfig::af(
            Scheme::Asymmetric {
                exchanges: 2,
                starter: Receiver::One,
            },
            Strategy::ForwardCombined,
            Regime::FixedDownlink,
        );
        let axis = GridAxis {
            min: 0.5,
            max: 2.0,
            points: 3,
            spacing: Spacing::Linear,
        };
        let map = decision_regions(&params, &cfg, 2, &axis, &axis, &[0.0]);
        let c = &map.curves[0];
        assert_eq!(c.winners.iter().flatten().count(), 9);
        for i in 0..3 {
            assert_eq!(c.winners[i][i], Winner::Tie);
            assert!(c.boundary.contains(&(map.n1_axis[i], map.n1_axis[i])));
        }
    }

    #[test]
    fn boundary_points_sit_between_flipping_neighbours() {
        let params = ChannelParams::from_snr_db(0.0, 0.0, 0.0, 0.0).unwrap();
        let cfg = CoopConfig::af(
            Scheme::Asymmetric {
                exchanges: 2,
                starter: Receiver::One,
            },
            Strategy::ForwardCombined,
            Regime::FixedTotal,
        );
        let axis = GridAxis {
            min: 0.01,
            max: 100.0,
            points: 8,
            spacing: Spacing::Linear,
        };
        let map = decision_regions(&params, &cfg, 2, &axis, &axis, &[-10.0]);
        let c = &map.curves[0];
        assert!(!c.boundary.is_empty());
        for &(n1, n2) in &c.boundary {
            let i = map.n1_axis.iter().position(|&x| x == n1).unwrap();
            let j = map.n2_axis.iter().position(|&y| y > n2).unwrap();
            assert_ne!(c.winners[i][j - 1], c.winners[i][j]);
        }
    }
}
