//! Amplify-and-forward replay: draws the downlink and cooperation noises,
//! applies the gains and MRC weights of an analytic trajectory sample by
//! sample, and measures BERs, output SNRs and the output noise correlation.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{batch_rng, complex_noise, run_batches, Accumulator, BerEstimate, TrialConfig};
use crate::af::{run_recursion, SnrTrajectory};
use crate::channel::{ChannelParams, CoopConfig, Receiver, Strategy};
use crate::df::Constellation;

/// Empirical SNR of a combiner output, `|alpha_hat|^2 P_hat / N_hat`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrEstimate {
    pub value: f64,
    /// Large-sample standard error, `rho sqrt((1 + 2/rho) / n)`.
    pub stderr: f64,
    pub samples: u64,
}

/// Sample estimate of `E[Z_I Z_II*]` at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Value the recursion predicts.
    pub analytic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AfSimulation {
    /// Raw BER at both combiner outputs after the last iteration.
    pub ber: [BerEstimate; 2],
    /// Bits wrong at receiver 1 or receiver 2.
    pub joint: BerEstimate,
    /// Empirical SNRs per iteration `0..=K`.
    pub snr: Vec<[SnrEstimate; 2]>,
    pub cross: Vec<CrossEstimate>,
    pub trajectory: SnrTrajectory,
}

#[derive(Debug, Clone, Copy, Default)]
struct OutputStats {
    sum_ox: Complex64,
    sum_xx: f64,
    sum_oo: f64,
}

#[derive(Debug, Clone, Default)]
struct AfAccum {
    samples: u64,
    stats: Vec<[OutputStats; 2]>,
    cross_sum: Vec<f64>,
    cross_sq: Vec<f64>,
    errors: [u64; 2],
    joint: u64,
    bits_per_symbol: u64,
}

impl AfAccum {
    fn new(iterations: usize, bits_per_symbol: u64) -> Self {
        AfAccum {
            stats: vec![[OutputStats::default(); 2]; iterations],
            cross_sum: vec![0.0; iterations],
            cross_sq: vec![0.0; iterations],
            bits_per_symbol,
            ..AfAccum::default()
        }
    }

    fn bits(&self) -> u64 {
        self.samples * self.bits_per_symbol
    }
}

impl Accumulator for AfAccum {
    fn merge(&mut self, other: Self) {
        self.samples += other.samples;
        for (a, b) in self.stats.iter_mut().zip(&other.stats) {
            for r in 0..2 {
                a[r].sum_ox += b[r].sum_ox;
                a[r].sum_xx += b[r].sum_xx;
                a[r].sum_oo += b[r].sum_oo;
            }
        }
        for i in 0..self.cross_sum.len() {
            self.cross_sum[i] += other.cross_sum[i];
            self.cross_sq[i] += other.cross_sq[i];
        }
        for r in 0..2 {
            self.errors[r] += other.errors[r];
        }
        self.joint += other.joint;
    }

    fn bers(&self) -> Vec<BerEstimate> {
        self.errors
            .iter()
            .map(|&e| BerEstimate::new(e, self.bits(), self.samples))
            .collect()
    }
}

/// Runs the AF schedule of `config` with `exchanges` rounds (`Ks` or `Ka`)
/// and replays it.
pub fn simulate_af(
    params: &ChannelParams,
    config: &CoopConfig,
    exchanges: usize,
    constellation: &Constellation,
    trial: &TrialConfig,
) -> AfSimulation {
    let trajectory = run_recursion(params, &config.with_rounds(exchanges));
    simulate_af_trajectory(params, &trajectory, constellation, trial)
}

/// Per-iteration sample covariance of the two outputs' equivalent noises.
pub fn empirical_cross_correlation(
    params: &ChannelParams,
    trajectory: &SnrTrajectory,
    trial: &TrialConfig,
) -> Vec<CrossEstimate> {
    let qpsk = Constellation::new(4).expect("4-QAM exists");
    simulate_af_trajectory(params, trajectory, &qpsk, trial).cross
}

pub fn simulate_af_trajectory(
    params: &ChannelParams,
    trajectory: &SnrTrajectory,
    constellation: &Constellation,
    trial: &TrialConfig,
) -> AfSimulation {
    let iterations = trajectory.states.len();
    let bits_per_symbol = constellation.bits_per_symbol() as u64;
    let init = AfAccum::new(iterations, bits_per_symbol);
    let acc = run_batches(trial, init, |stream, len| {
        replay_batch(params, trajectory, constellation, trial.seed, stream, len)
    });

    let n = acc.samples;
    let snr = acc
        .stats
        .iter()
        .map(|pair| {
            pair.map(|s| {
                let p_hat = s.sum_xx / n as f64;
                let alpha = s.sum_ox / s.sum_xx;
                let noise = (s.sum_oo - s.sum_ox.norm_sqr() / s.sum_xx) / n as f64;
                let value = alpha.norm_sqr() * p_hat / noise;
                SnrEstimate {
                    value,
                    stderr: value * ((1.0 + 2.0 / value) / n as f64).sqrt(),
                    samples: n,
                }
            })
        })
        .collect();
    let cross = (0..iterations)
        .map(|i| {
            let mean = acc.cross_sum[i] / n as f64;
            let var = (acc.cross_sq[i] / n as f64 - mean * mean).max(0.0);
            CrossEstimate {
                value: mean,
                stderr: (var / n as f64).sqrt(),
                analytic: trajectory.states[i].cross,
            }
        })
        .collect();
    let bits = acc.bits();
    AfSimulation {
        ber: [
            BerEstimate::new(acc.errors[0], bits, n),
            BerEstimate::new(acc.errors[1], bits, n),
        ],
        joint: BerEstimate::new(acc.joint, bits, n),
        snr,
        cross,
        trajectory: trajectory.clone(),
    }
}

fn replay_batch(
    params: &ChannelParams,
    trajectory: &SnrTrajectory,
    constellation: &Constellation,
    seed: u64,
    stream: u64,
    len: u64,
) -> AfAccum {
    let mut rng = batch_rng(seed, stream);
    let plan = &trajectory.plan;
    let strategy = trajectory.config.strategy;
    let amp = params.source_power.sqrt();
    let m = constellation.order();
    let last = trajectory.last();
    let mut acc = AfAccum::new(trajectory.states.len(), constellation.bits_per_symbol() as u64);
    acc.samples = len;

    for _ in 0..len {
        let label = rng.random_range(0..m);
        let x = constellation.point(label) * amp;
        let y = [
            x + complex_noise(&mut rng, plan.noise1),
            x + complex_noise(&mut rng, plan.noise2),
        ];
        let mut out = y;
        let mut agg = [Complex64::new(0.0, 0.0); 2];
        for (i, state) in trajectory.states.iter().enumerate() {
            if i > 0 {
                let prev = out;
                for rx in Receiver::BOTH {
                    let d = rx.index();
                    if state.branches[d].is_none() {
                        continue;
                    }
                    let sender = rx.partner();
                    let p = sender.index();
                    let a = state.gains.from_sender(sender);
                    let coop_noise = plan.coop_noise_from(sender);
                    let (w_own, w_coop) = (state.weights.own(rx), state.weights.coop(rx));
                    match strategy {
                        Strategy::ForwardCombined => {
                            let c = prev[p] * a + complex_noise(&mut rng, coop_noise);
                            out[d] = prev[d] * w_own + c * w_coop;
                        }
                        Strategy::ForwardDownlink => {
                            let c = y[p] * a + complex_noise(&mut rng, coop_noise);
                            agg[d] += c * (a / coop_noise);
                            let info = state.coop_info[d];
                            out[d] = y[d] * w_own;
                            if info > 0.0 {
                                out[d] += agg[d] * (w_coop / info.sqrt());
                            }
                        }
                    }
                }
            }
            let stats = &mut acc.stats[i];
            for r in 0..2 {
                stats[r].sum_ox += out[r] * x.conj();
                stats[r].sum_xx += x.norm_sqr();
                stats[r].sum_oo += out[r].norm_sqr();
            }
            let e0 = out[0] - x * state.alpha[0];
            let e1 = out[1] - x * state.alpha[1];
            let prod = (e0 * e1.conj()).re;
            acc.cross_sum[i] += prod;
            acc.cross_sq[i] += prod * prod;
        }
        let mut wrong = 0usize;
        for (r, y) in out.iter().enumerate() {
            let decided = constellation.nearest(y / (last.alpha[r] * amp));
            let diff = decided ^ label;
            acc.errors[r] += diff.count_ones() as u64;
            wrong |= diff;
        }
        acc.joint += wrong.count_ones() as u64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Regime, Scheme};

    fn qpsk() -> Constellation {
        Constellation::new(4).unwrap()
    }

    fn q(x: f64) -> f64 {
        0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn no_cooperation_matches_qpsk_ber() {
        // rho = 10 dB at both receivers, no cooperation power
        let params = ChannelParams::from_snr_db(10.0, 10.0, 0.0, 0.0).unwrap();
        let params = ChannelParams {
            p12: 0.0,
            p21: 0.0,
            ..params
        };
        let cfg = CoopConfig::af(
            Scheme::Symmetric { pairs: 0 },
            Strategy::ForwardCombined,
            Regime::FixedDownlink,
        );
        let sim = simulate_af(&params, &cfg, 0, &qpsk(), &TrialConfig::new(400_000, 11));
        let p = q(10f64.sqrt());
        for b in sim.ber {
            assert!(
                (b.ber - p).abs() < 3.0 * (p * (1.0 - p) / b.bits as f64).sqrt(),
                "{} vs {p}",
                b.ber
            );
        }
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        let params = ChannelParams::from_snr_db(5.0, 2.0, 10.0, 10.0).unwrap();
        let cfg = CoopConfig::af(
            Scheme::Symmetric { pairs: 2 },
            Strategy::ForwardDownlink,
            Regime::FixedTotal,
        );
        let trial = TrialConfig {
            batch: 1000,
            ..TrialConfig::new(20_000, 5)
        };
        let a = simulate_af(&params, &cfg, 2, &qpsk(), &trial);
        let b = simulate_af(&params, &cfg, 2, &qpsk(), &trial);
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| simulate_af(&params, &cfg, 2, &qpsk(), &trial));
        assert_eq!(a, c);
    }

    #[test]
    fn single_exchange_helps_receiver_two() {
        let params = ChannelParams::from_snr_db(7.0, 3.0, 30.0, 30.0).unwrap();
        let cfg = CoopConfig::af(
            Scheme::Asymmetric {
                exchanges: 1,
                starter: Receiver::One,
            },
            Strategy::ForwardCombined,
            Regime::FixedDownlink,
        );
        let trial = TrialConfig::new(200_000, 2);
        let k0 = simulate_af(&params, &cfg, 0, &qpsk(), &trial);
        let k1 = simulate_af(&params, &cfg, 1, &qpsk(), &trial);
        let (a, b) = (k0.ber[1], k1.ber[1]);
        assert!(a.ber - b.ber > 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt());
    }

    #[test]
    fn empirical_snr_and_cross_follow_the_recursion() {
        let params = ChannelParams::from_snr_db(6.0, 1.0, 12.0, 9.0).unwrap();
        for (scheme, strategy) in [
            (Scheme::Symmetric { pairs: 2 }, Strategy::ForwardCombined),
            (
                Scheme::Asymmetric {
                    exchanges: 3,
                    starter: Receiver::Two,
                },
                Strategy::ForwardCombined,
            ),
            (
                Scheme::Asymmetric {
                    exchanges: 3,
                    starter: Receiver::One,
                },
                Strategy::ForwardDownlink,
            ),
        ] {
            let cfg = CoopConfig::af(scheme, strategy, Regime::FixedDownlink);
            let traj = run_recursion(&params, &cfg);
            let sim = simulate_af_trajectory(&params, &traj, &qpsk(), &TrialConfig::new(200_000, 9));
            for (i, (est, state)) in sim.snr.iter().zip(&traj.states).enumerate() {
                for (r, (e, rho)) in est.iter().zip(&state.rho).enumerate() {
                    let z = (e.value - rho) / e.stderr;
                    assert!(z.abs() < 4.0, "iteration {i} rx {r}: z = {z}");
                }
                let c = sim.cross[i];
                assert!((c.value - c.analytic).abs() < 4.0 * c.stderr + 1e-12, "{c:?}");
            }
        }
    }
}
