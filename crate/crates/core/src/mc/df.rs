//! Decode-and-forward simulation: a transmitting receiver hard-decodes its
//! own downlink block, remaps the bits onto the relay constellation and
//! sends them; a receiving receiver re-runs its detector over its direct
//! block and every relay block received so far.
//!
//! Relay blocks of different senders carry independent decoding errors.
//! From the third exchange on a receiver gets a second copy of the same
//! hard decisions, whose errors repeat; the detector still treats the
//! copies as independent.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{batch_rng, complex_noise, run_batches, Accumulator, BerEstimate, TrialConfig};
use crate::channel::{power_per_exchange, with_subchannel, BandwidthPlan, ChannelParams, CoopConfig, Receiver};
use crate::df::{
    choose_compatible_modulation, hard_decode, remap, BlockShape, Constellation, Detector, DfError, RelayBranch,
    RelayErrorModel,
};

/// Stream id reserved for the relay-model calibration pass.
const CALIBRATION_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combiner {
    /// Generalised maximum-likelihood detector.
    Mld,
    /// MRC of all branches followed by slicing; ignores relay errors.
    Mrc,
}

/// Where the detector's relay error model comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RelayModelSource {
    /// Measured on a separate calibration run of `symbols` relay symbols
    /// per sender.
    Calibrated { symbols: u64 },
    /// Closed-form transitions of symbol-wise hard decisions at the
    /// sender's downlink SNR.
    Analytic,
    /// Relays forward the true bits and the detector knows it.
    Genie,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfSettings {
    pub source_order: usize,
    /// Cooperation sub-channel width over downlink width, `ΔB / B_DL`.
    pub subchannel_ratio: f64,
    pub combiner: Combiner,
    pub relay_model: RelayModelSource,
}

impl Default for DfSettings {
    fn default() -> Self {
        DfSettings {
            source_order: 4,
            subchannel_ratio: 1.0,
            combiner: Combiner::Mld,
            relay_model: RelayModelSource::Calibrated { symbols: 100_000 },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfSimulation {
    pub ber: [BerEstimate; 2],
    /// Bits wrong at receiver 1 or receiver 2.
    pub joint: BerEstimate,
    pub relay_order: usize,
    pub shape: BlockShape,
    pub plan: BandwidthPlan,
    /// Relay error model used for each exchange and sender.
    pub models: Vec<Vec<(Receiver, RelayErrorModel)>>,
}

#[derive(Debug, Clone, Copy)]
struct Link {
    sender: Receiver,
    amplitude: f64,
    noise: f64,
}

struct Context {
    source: Constellation,
    relay: Constellation,
    shape: BlockShape,
    amplitude: f64,
    downlink_noise: [f64; 2],
    /// Transmissions of every exchange.
    schedule: Vec<Vec<Link>>,
    combiner: Combiner,
    genie: bool,
}

impl Context {
    fn detector(&self, rx: Receiver) -> Detector<'_> {
        Detector {
            shape: &self.shape,
            source: &self.source,
            relay: &self.relay,
            source_amplitude: self.amplitude,
            direct_noise: self.downlink_noise[rx.index()],
        }
    }
}

struct Received {
    y: Vec<Complex64>,
    link: Link,
    /// `(exchange index, position in that exchange)` of the model.
    model: (usize, usize),
}

struct BlockState {
    word: u64,
    direct: [Vec<Complex64>; 2],
    /// Symbol-wise hard decisions on each downlink block.
    hard: [u64; 2],
    /// Current detector output of each receiver.
    decision: [u64; 2],
    received: [Vec<Received>; 2],
}

impl BlockState {
    fn new(rng: &mut ChaCha8Rng, ctx: &Context) -> Self {
        let shape = &ctx.shape;
        let word = rng.random::<u64>() >> (64 - shape.n);
        let symbols: Vec<Complex64> = (0..shape.s)
            .map(|t| ctx.source.point(shape.source_label(word, t)) * ctx.amplitude)
            .collect();
        let direct = [0, 1].map(|r| {
            symbols
                .iter()
                .map(|&x| x + complex_noise(rng, ctx.downlink_noise[r]))
                .collect::<Vec<_>>()
        });
        let hard = [0, 1].map(|r| hard_decode(&direct[r], ctx.amplitude, &ctx.source, shape));
        BlockState {
            word,
            direct,
            hard,
            decision: hard,
            received: [Vec::new(), Vec::new()],
        }
    }

    /// Word receiver `sender` forwards at this point.
    fn forwarded(&self, sender: Receiver, ctx: &Context) -> u64 {
        if ctx.genie {
            self.word
        } else {
            self.hard[sender.index()]
        }
    }

    fn exchange(
        &mut self,
        i: usize,
        rng: &mut ChaCha8Rng,
        ctx: &Context,
        models: &[Vec<RelayErrorModel>],
    ) -> Result<(), DfError> {
        let links = &ctx.schedule[i];
        let sent: Vec<u64> = links.iter().map(|l| self.forwarded(l.sender, ctx)).collect();
        for (pos, (link, word)) in links.iter().zip(sent).enumerate() {
            let y = remap(word, &ctx.shape)
                .into_iter()
                .map(|u| ctx.relay.point(u) * link.amplitude + complex_noise(rng, link.noise))
                .collect();
            self.received[link.sender.partner().index()].push(Received {
                y,
                link: *link,
                model: (i, pos),
            });
        }
        for link in links {
            let rx = link.sender.partner();
            let r = rx.index();
            let branches: Vec<RelayBranch<'_>> = self.received[r]
                .iter()
                .map(|b| RelayBranch {
                    y: &b.y,
                    amplitude: b.link.amplitude,
                    noise: b.link.noise,
                    model: &models[b.model.0][b.model.1],
                })
                .collect();
            let det = ctx.detector(rx);
            self.decision[r] = match ctx.combiner {
                Combiner::Mld => det.llr(&self.direct[r], &branches)?.decisions(),
                Combiner::Mrc => det.mrc_decide(&self.direct[r], &branches)?,
            };
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
struct DfAccum {
    blocks: u64,
    bits: u64,
    errors: [u64; 2],
    joint: u64,
    failure: Option<DfError>,
}

impl Accumulator for DfAccum {
    fn merge(&mut self, other: Self) {
        self.blocks += other.blocks;
        self.bits += other.bits;
        self.errors[0] += other.errors[0];
        self.errors[1] += other.errors[1];
        self.joint += other.joint;
        if self.failure.is_none() {
            self.failure = other.failure;
        }
    }

    fn bers(&self) -> Vec<BerEstimate> {
        self.errors
            .iter()
            .map(|&e| BerEstimate::new(e, self.bits, self.blocks))
            .collect()
    }
}

/// Simulates DF cooperation with `exchanges` rounds of `config`'s scheme.
/// The downlink keeps the reference bandwidth; each cooperation
/// sub-channel is `subchannel_ratio` times as wide.
pub fn simulate_df(
    params: &ChannelParams,
    config: &CoopConfig,
    exchanges: usize,
    settings: &DfSettings,
    trial: &TrialConfig,
) -> Result<DfSimulation, DfError> {
    let config = config.with_rounds(exchanges);
    let downlink = params.bandwidth;
    let subchannel = settings.subchannel_ratio * downlink;
    let (relay_order, shape) = choose_compatible_modulation(settings.source_order, downlink, subchannel)?;
    let plan = with_subchannel(
        params,
        downlink,
        subchannel,
        config.scheme.exchanges() as f64 * subchannel,
    );
    if shape.n > crate::df::MAX_BLOCK_BITS && settings.combiner == Combiner::Mld {
        return Err(DfError::EnumerationBound {
            bits: shape.n,
            max: crate::df::MAX_BLOCK_BITS,
        });
    }
    let rounds = config.scheme.rounds();
    let schedule: Vec<Vec<Link>> = (1..=rounds)
        .map(|i| {
            let powers = power_per_exchange(params, &config, i).expect("index within 1..=rounds");
            config
                .scheme
                .senders(i)
                .into_iter()
                .map(|sender| Link {
                    sender,
                    amplitude: powers.from_sender(sender).sqrt(),
                    noise: plan.coop_noise_from(sender),
                })
                .collect()
        })
        .collect();
    let ctx = Context {
        source: Constellation::new(settings.source_order)?,
        relay: Constellation::new(relay_order)?,
        shape,
        amplitude: params.source_power.sqrt(),
        downlink_noise: [plan.noise1, plan.noise2],
        schedule,
        combiner: settings.combiner,
        genie: settings.relay_model == RelayModelSource::Genie,
    };

    let models = relay_models(&ctx, settings.relay_model, trial.seed)?;

    let acc = run_batches(trial, DfAccum::default(), |stream, len| {
        let mut rng = batch_rng(trial.seed, stream);
        let mut acc = DfAccum::default();
        for _ in 0..len {
            let mut block = BlockState::new(&mut rng, &ctx);
            for i in 0..rounds {
                if let Err(e) = block.exchange(i, &mut rng, &ctx, &models) {
                    acc.failure = Some(e);
                    return acc;
                }
            }
            let wrong = [0, 1].map(|r| block.decision[r] ^ block.word);
            acc.errors[0] += wrong[0].count_ones() as u64;
            acc.errors[1] += wrong[1].count_ones() as u64;
            acc.joint += (wrong[0] | wrong[1]).count_ones() as u64;
            acc.blocks += 1;
            acc.bits += shape.n as u64;
        }
        acc
    });
    if let Some(e) = acc.failure {
        return Err(e);
    }
    Ok(DfSimulation {
        ber: [
            BerEstimate::new(acc.errors[0], acc.bits, acc.blocks),
            BerEstimate::new(acc.errors[1], acc.bits, acc.blocks),
        ],
        joint: BerEstimate::new(acc.joint, acc.bits, acc.blocks),
        relay_order,
        shape,
        plan,
        models: ctx
            .schedule
            .iter()
            .zip(&models)
            .map(|(links, ms)| links.iter().map(|l| l.sender).zip(ms.iter().cloned()).collect())
            .collect(),
    })
}

/// Error model per exchange and transmission.
fn relay_models(ctx: &Context, source: RelayModelSource, seed: u64) -> Result<Vec<Vec<RelayErrorModel>>, DfError> {
    let mr = ctx.relay.order();
    let analytic = |sender: Receiver| {
        RelayErrorModel::hard_decision(
            &ctx.source,
            &ctx.relay,
            &ctx.shape,
            ctx.amplitude,
            ctx.downlink_noise[sender.index()],
        )
    };
    match source {
        RelayModelSource::Genie => Ok(ctx
            .schedule
            .iter()
            .map(|links| links.iter().map(|_| RelayErrorModel::identity(mr)).collect())
            .collect()),
        RelayModelSource::Analytic => Ok(ctx
            .schedule
            .iter()
            .map(|links| links.iter().map(|l| analytic(l.sender)).collect())
            .collect()),
        RelayModelSource::Calibrated { symbols } => {
            let blocks = symbols.div_ceil(ctx.shape.r as u64).max(1);
            let mut rng = batch_rng(seed, CALIBRATION_STREAM);
            let mut counts = [vec![0u64; mr * mr], vec![0u64; mr * mr]];
            for _ in 0..blocks {
                let s = BlockState::new(&mut rng, ctx);
                let truth = remap(s.word, &ctx.shape);
                for rx in Receiver::BOTH {
                    let sent = remap(s.forwarded(rx, ctx), &ctx.shape);
                    for (&u, v) in truth.iter().zip(sent) {
                        counts[rx.index()][u * mr + v] += 1;
                    }
                }
            }
            let per_sender = Receiver::BOTH.map(|rx| RelayErrorModel::from_counts(&counts[rx.index()], &analytic(rx)));
            Ok(ctx
                .schedule
                .iter()
                .map(|links| links.iter().map(|l| per_sender[l.sender.index()].clone()).collect())
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Regime, Scheme, Strategy};

    fn q(x: f64) -> f64 {
        0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    }

    fn df(scheme: Scheme) -> CoopConfig {
        CoopConfig {
            protocol: crate::channel::Protocol::Df,
            scheme,
            strategy: Strategy::ForwardCombined,
            regime: Regime::FixedDownlink,
        }
    }

    fn asym() -> CoopConfig {
        df(Scheme::Asymmetric {
            exchanges: 1,
            starter: Receiver::One,
        })
    }

    #[test]
    fn no_exchange_is_plain_qpsk() {
        let params = ChannelParams::from_snr_db(7.0, 3.0, 30.0, 30.0).unwrap();
        let sim = simulate_df(
            &params,
            &asym(),
            0,
            &DfSettings::default(),
            &TrialConfig::new(200_000, 4),
        )
        .unwrap();
        for (b, snr_db) in sim.ber.iter().zip([7.0f64, 3.0]) {
            let p = q(10f64.powf(snr_db / 10.0).sqrt());
            assert!(
                (b.ber - p).abs() < 3.5 * (p * (1.0 - p) / b.bits as f64).sqrt(),
                "{} vs {p}",
                b.ber
            );
        }
    }

    #[test]
    fn genie_relay_matches_two_branch_mrc() {
        // receiver 2 gets the clean relay symbols: rho = P/N2 + P12/N12
        let params = ChannelParams::from_snr_db(7.0, 3.0, 2.0, 2.0).unwrap();
        let settings = DfSettings {
            relay_model: RelayModelSource::Genie,
            ..DfSettings::default()
        };
        let sim = simulate_df(&params, &asym(), 1, &settings, &TrialConfig::new(200_000, 8)).unwrap();
        let rho = 10f64.powf(0.3) + 10f64.powf(0.2);
        let p = q(rho.sqrt());
        let b = sim.ber[1];
        assert!(
            (b.ber - p).abs() < 3.5 * (p * (1.0 - p) / b.bits as f64).sqrt(),
            "{} vs {p}",
            b.ber
        );
        let mrc = simulate_df(
            &params,
            &asym(),
            1,
            &DfSettings {
                combiner: Combiner::Mrc,
                ..settings
            },
            &TrialConfig::new(200_000, 8),
        )
        .unwrap();
        assert_eq!(mrc.ber, sim.ber);
    }

    #[test]
    fn calibrated_first_model_matches_hard_decisions() {
        let params = ChannelParams::from_snr_db(7.0, 3.0, 30.0, 30.0).unwrap();
        let sim = simulate_df(&params, &asym(), 1, &DfSettings::default(), &TrialConfig::new(1000, 4)).unwrap();
        let (sender, model) = &sim.models[0][0];
        assert_eq!(*sender, Receiver::One);
        let ser = Constellation::new(4).unwrap().symbol_error_rate(10f64.powf(0.7));
        assert!((model.symbol_error_rate() - ser).abs() < 4.0 * (ser / 1e5).sqrt());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let params = ChannelParams::from_snr_db(7.0, 3.0, 2.0, 2.0).unwrap();
        let cfg = df(Scheme::Symmetric { pairs: 2 });
        let trial = TrialConfig {
            batch: 500,
            ..TrialConfig::new(5000, 21)
        };
        let settings = DfSettings {
            relay_model: RelayModelSource::Calibrated { symbols: 5000 },
            ..DfSettings::default()
        };
        let a = simulate_df(&params, &cfg, 2, &settings, &trial).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let b = pool
            .install(|| simulate_df(&params, &cfg, 2, &settings, &trial))
            .unwrap();
        assert_eq!(a, b);
        assert!(a.joint.errors >= a.ber[0].errors.max(a.ber[1].errors));
        assert!(a.joint.errors <= a.ber[0].errors + a.ber[1].errors);
    }

    #[test]
    fn bpsk_source_with_16qam_relay() {
        let params = ChannelParams::from_snr_db(4.0, 4.0, 15.0, 15.0).unwrap();
        let settings = DfSettings {
            source_order: 2,
            subchannel_ratio: 0.25,
            ..DfSettings::default()
        };
        let sim = simulate_df(&params, &asym(), 1, &settings, &TrialConfig::new(20_000, 3)).unwrap();
        assert_eq!(sim.relay_order, 16);
        assert_eq!(sim.shape, BlockShape { s: 4, r: 1, n: 4 });
        assert!(sim.ber[1].ber < sim.ber[0].ber);
    }

    #[test]
    fn incompatible_modulation_is_reported() {
        let params = ChannelParams::from_snr_db(4.0, 4.0, 15.0, 15.0).unwrap();
        let settings = DfSettings {
            subchannel_ratio: 3.0,
            ..DfSettings::default()
        };
        assert!(matches!(
            simulate_df(&params, &asym(), 1, &settings, &TrialConfig::new(10, 3)),
            Err(DfError::Incompatible { .. })
        ));
    }
}
