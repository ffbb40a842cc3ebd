//! Physical channel parameters, cooperation configuration and the
//! orthogonal bandwidth / power accounting shared by every protocol.
//!
//! Everything in here is linear units (W, W/Hz, Hz). Decibels only show up
//! at the scenario boundary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("exchange index {index} outside 1..={exchanges}")]
    ExchangeOutOfRange { index: usize, exchanges: usize },
}

/// One of the two destinations. Receiver 1 owns the downlink `Y_1` and the
/// combiner output `Y_I`, receiver 2 owns `Y_2` / `Y_II`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Receiver {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Receiver {
    pub const BOTH: [Receiver; 2] = [Receiver::One, Receiver::Two];

    pub fn index(self) -> usize {
        match self {
            Receiver::One => 0,
            Receiver::Two => 1,
        }
    }

    pub fn partner(self) -> Receiver {
        match self {
            Receiver::One => Receiver::Two,
            Receiver::Two => Receiver::One,
        }
    }
}

impl std::fmt::Display for Receiver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Receiver::One => f.write_str("1"),
            Receiver::Two => f.write_str("2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Source transmit power `P` (W).
    pub source_power: f64,
    /// Downlink noise densities `n1`, `n2` (W/Hz).
    pub n1: f64,
    pub n2: f64,
    /// Cooperation link noise densities, 1→2 and 2→1 (W/Hz).
    pub n12: f64,
    pub n21: f64,
    /// Total cooperation power budgets at receiver 1 and 2 (W). Zero means
    /// that receiver never helps.
    pub p12: f64,
    pub p21: f64,
    /// Reference bandwidth `B` (Hz).
    pub bandwidth: f64,
}

impl ChannelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        source_power: f64,
        n1: f64,
        n2: f64,
        n12: f64,
        n21: f64,
        p12: f64,
        p21: f64,
        bandwidth: f64,
    ) -> Result<Self, ChannelError> {
        let params = ChannelParams {
            source_power,
            n1,
            n2,
            n12,
            n21,
            p12,
            p21,
            bandwidth,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds a parameter set from the four reference SNRs
    /// `(P/n1B, P/n2B, P12/n12B, P21/n21B)` in dB, with `P = P12 = P21 = 1 W`
    /// and `B = 1 Hz`. Only these ratios matter for every result in the crate.
    pub fn from_snr_db(p_n1b: f64, p_n2b: f64, p12_n12b: f64, p21_n21b: f64) -> Result<Self, ChannelError> {
        Self::from_snr_linear(
            db_to_linear(p_n1b),
            db_to_linear(p_n2b),
            db_to_linear(p12_n12b),
            db_to_linear(p21_n21b),
        )
    }

    pub fn from_snr_linear(p_n1b: f64, p_n2b: f64, p12_n12b: f64, p21_n21b: f64) -> Result<Self, ChannelError> {
        Self::new(
            1.0,
            1.0 / p_n1b,
            1.0 / p_n2b,
            1.0 / p12_n12b,
            1.0 / p21_n21b,
            1.0,
            1.0,
            1.0,
        )
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let strictly_positive = [
            ("source_power", self.source_power),
            ("n1", self.n1),
            ("n2", self.n2),
            ("n12", self.n12),
            ("n21", self.n21),
            ("bandwidth", self.bandwidth),
        ];
        for (name, value) in strictly_positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ChannelError::InvalidParameter {
                    name,
                    requirement: "finite and > 0",
                    value,
                });
            }
        }
        for (name, value) in [("p12", self.p12), ("p21", self.p21)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ChannelError::InvalidParameter {
                    name,
                    requirement: "finite and >= 0",
                    value,
                });
            }
        }
        Ok(())
    }

    /// Downlink noise density of `rx`.
    pub fn downlink_density(&self, rx: Receiver) -> f64 {
        match rx {
            Receiver::One => self.n1,
            Receiver::Two => self.n2,
        }
    }

    /// Noise density of the cooperation link leaving `sender`.
    pub fn coop_density_from(&self, sender: Receiver) -> f64 {
        match sender {
            Receiver::One => self.n12,
            Receiver::Two => self.n21,
        }
    }

    /// Total cooperation budget of `sender`.
    pub fn coop_budget(&self, sender: Receiver) -> f64 {
        match sender {
            Receiver::One => self.p12,
            Receiver::Two => self.p21,
        }
    }

    /// Relabels the two receivers (swaps every per-receiver quantity).
    pub fn swapped(&self) -> Self {
        ChannelParams {
            n1: self.n2,
            n2: self.n1,
            n12: self.n21,
            n21: self.n12,
            p12: self.p21,
            p21: self.p12,
            ..*self
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Af,
    Df,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scheme {
    /// Both receivers transmit in every round; `pairs` rounds (`K = 2 * pairs`).
    Symmetric { pairs: usize },
    /// Receivers alternate, `starter` transmits at odd exchange indices.
    Asymmetric { exchanges: usize, starter: Receiver },
}

impl Scheme {
    /// Number of cooperation transmissions `K` (`2 Ks` or `Ka`).
    pub fn exchanges(&self) -> usize {
        match *self {
            Scheme::Symmetric { pairs } => 2 * pairs,
            Scheme::Asymmetric { exchanges, .. } => exchanges,
        }
    }

    /// Number of combining iterations the recursion runs (`Ks` or `Ka`).
    pub fn rounds(&self) -> usize {
        match *self {
            Scheme::Symmetric { pairs } => pairs,
            Scheme::Asymmetric { exchanges, .. } => exchanges,
        }
    }

    /// Same scheme with a different round count.
    pub fn with_rounds(&self, rounds: usize) -> Scheme {
        match *self {
            Scheme::Symmetric { .. } => Scheme::Symmetric { pairs: rounds },
            Scheme::Asymmetric { starter, .. } => Scheme::Asymmetric {
                exchanges: rounds,
                starter,
            },
        }
    }

    /// Receivers that transmit a cooperation signal at round `i` (1-based).
    pub fn senders(&self, i: usize) -> Vec<Receiver> {
        match *self {
            Scheme::Symmetric { .. } => Receiver::BOTH.to_vec(),
            Scheme::Asymmetric { starter, .. } => {
                if i % 2 == 1 {
                    vec![starter]
                } else {
                    vec![starter.partner()]
                }
            }
        }
    }
}

/// What a receiver forwards from the second round on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// S1: the latest combiner output.
    #[serde(rename = "s1")]
    ForwardCombined,
    /// S2: always the original downlink observation.
    #[serde(rename = "s2")]
    ForwardDownlink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// H1: `B_DL + B_C = B`.
    #[serde(rename = "h1")]
    FixedTotal,
    /// H2: `B_DL = B`, cooperation bandwidth comes on top.
    #[serde(rename = "h2")]
    FixedDownlink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoopConfig {
    pub protocol: Protocol,
    pub scheme: Scheme,
    /// Ignored by DF, which always combines with the direct signal.
    pub strategy: Strategy,
    pub regime: Regime,
}

impl CoopConfig {
    pub fn af(scheme: Scheme, strategy: Strategy, regime: Regime) -> Self {
        CoopConfig {
            protocol: Protocol::Af,
            scheme,
            strategy,
            regime,
        }
    }

    pub fn with_rounds(&self, rounds: usize) -> Self {
        CoopConfig {
            scheme: self.scheme.with_rounds(rounds),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthPlan {
    /// Downlink bandwidth `B_DL` (Hz).
    pub downlink: f64,
    /// Width of one cooperation sub-channel `ΔB` (Hz).
    pub subchannel: f64,
    /// Total cooperation bandwidth `B_C` (Hz).
    pub cooperation: f64,
    /// Integrated noise powers `N1 = n1 B_DL`, `N2 = n2 B_DL` (W).
    pub noise1: f64,
    pub noise2: f64,
    /// Integrated cooperation noise powers `N12 = n12 ΔB`, `N21 = n21 ΔB` (W).
    pub noise12: f64,
    pub noise21: f64,
}

impl BandwidthPlan {
    pub fn downlink_noise(&self, rx: Receiver) -> f64 {
        match rx {
            Receiver::One => self.noise1,
            Receiver::Two => self.noise2,
        }
    }

    pub fn coop_noise_from(&self, sender: Receiver) -> f64 {
        match sender {
            Receiver::One => self.noise12,
            Receiver::Two => self.noise21,
        }
    }
}

/// Splits the spectrum between the downlink and the cooperation
/// sub-channels. Under H1 every one of the `K + 1` slots (`2Ks + 1` or
/// `Ka + 1`) gets `B / (K + 1)`; under H2 the downlink keeps `B` and every
/// sub-channel is also `B` wide, as AF requires.
pub fn plan_bandwidth(params: &ChannelParams, config: &CoopConfig) -> BandwidthPlan {
    let k = config.scheme.exchanges();
    let b = params.bandwidth;
    let (downlink, subchannel) = match config.regime {
        Regime::FixedTotal => {
            let slot = b / (k as f64 + 1.0);
            (slot, slot)
        }
        Regime::FixedDownlink => (b, b),
    };
    let cooperation = match config.regime {
        // keeps B_DL + B_C == B bit-for-bit
        Regime::FixedTotal => b - downlink,
        Regime::FixedDownlink => k as f64 * subchannel,
    };
    with_subchannel(params, downlink, subchannel, cooperation)
}

/// Plan with an explicit sub-channel width (DF, where the relay modulation
/// sets `ΔB`).
pub fn with_subchannel(params: &ChannelParams, downlink: f64, subchannel: f64, cooperation: f64) -> BandwidthPlan {
    BandwidthPlan {
        downlink,
        subchannel,
        cooperation,
        noise1: params.n1 * downlink,
        noise2: params.n2 * downlink,
        noise12: params.n12 * subchannel,
        noise21: params.n21 * subchannel,
    }
}

/// Per-exchange cooperation powers for exchange `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangePower {
    /// Power receiver 1 spends on each of its transmissions.
    pub p12: f64,
    /// Power receiver 2 spends on each of its transmissions.
    pub p21: f64,
    /// Set for `Ka = 1`: only the starter ever transmits, the partner's
    /// per-exchange power is undefined and reported as zero.
    pub starter_only: bool,
}

impl ExchangePower {
    pub fn from_sender(&self, sender: Receiver) -> f64 {
        match sender {
            Receiver::One => self.p12,
            Receiver::Two => self.p21,
        }
    }
}

/// Equal split of the budgets over the transmissions each receiver makes.
///
/// Symmetric: `P12/Ks`, `P21/Ks`. Asymmetric: the starter transmits
/// `ceil(Ka/2)` times and gets `2P/Ka` (even) or `2P/(Ka+1)` (odd); the
/// partner transmits `floor(Ka/2)` times and gets `2P/Ka` or `2P/(Ka-1)`.
pub fn power_per_exchange(
    params: &ChannelParams,
    config: &CoopConfig,
    i: usize,
) -> Result<ExchangePower, ChannelError> {
    let k = config.scheme.rounds();
    if i == 0 || i > k {
        return Err(ChannelError::ExchangeOutOfRange { index: i, exchanges: k });
    }
    match config.scheme {
        Scheme::Symmetric { pairs } => {
            let ks = pairs as f64;
            Ok(ExchangePower {
                p12: params.p12 / ks,
                p21: params.p21 / ks,
                starter_only: false,
            })
        }
        Scheme::Asymmetric { exchanges, starter } => {
            let ka = exchanges as f64;
            let starter_budget = params.coop_budget(starter);
            let partner_budget = params.coop_budget(starter.partner());
            let (p_starter, p_partner, starter_only) = if exchanges % 2 == 0 {
                (2.0 * starter_budget / ka, 2.0 * partner_budget / ka, false)
            } else if exchanges == 1 {
                (starter_budget, 0.0, true)
            } else {
                (
                    2.0 * starter_budget / (ka + 1.0),
                    2.0 * partner_budget / (ka - 1.0),
                    false,
                )
            };
            let (p12, p21) = match starter {
                Receiver::One => (p_starter, p_partner),
                Receiver::Two => (p_partner, p_starter),
            };
            Ok(ExchangePower { p12, p21, starter_only })
        }
    }
}
