//! Scenario files: TOML with one section per concern.
//!
//! ```toml
//! [channel.db]
//! p_over_n1b = 10.0
//! p_over_n2b = 0.0
//! p12_over_n12b = 30.0
//! p21_over_n21b = 30.0
//!
//! [cooperation]
//! protocol = "af"
//! scheme = "asymmetric"
//! starter = "1"
//! strategy = "s1"
//! regime = "h1"
//! rounds = 2
//!
//! [sweep]
//! k_max = 4
//! ```
//!
//! `[sweep]`, `[modulation]`, `[df]` and `[trials]` are optional.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    db_to_linear, ChannelError, ChannelParams, CoopConfig, Protocol, Receiver, Regime, Scheme, Strategy,
};
use crate::mc::{Combiner, DfSettings, RelayModelSource, TrialConfig};
use crate::metrics::{GridAxis, Spacing};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Channel(#[from] ChannelError),
    #[error("invalid scenario: `{field}` {problem}")]
    Invalid { field: &'static str, problem: String },
}

/// Channel parameters under an explicit unit tag: `[channel.db]`,
/// `[channel.linear]` or `[channel.absolute]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSpec {
    /// Reference SNRs in dB, with `P = P12 = P21 = 1 W`, `B = 1 Hz`.
    Db {
        p_over_n1b: f64,
        p_over_n2b: f64,
        p12_over_n12b: f64,
        p21_over_n21b: f64,
    },
    /// The same four ratios as plain numbers.
    Linear {
        p_over_n1b: f64,
        p_over_n2b: f64,
        p12_over_n12b: f64,
        p21_over_n21b: f64,
    },
    /// Physical quantities in W, W/Hz and Hz.
    Absolute {
        source_power: f64,
        n1: f64,
        n2: f64,
        n12: f64,
        n21: f64,
        p12: f64,
        p21: f64,
        bandwidth: f64,
    },
}

impl ChannelSpec {
    pub fn db(p_over_n1b: f64, p_over_n2b: f64, p12_over_n12b: f64, p21_over_n21b: f64) -> Self {
        ChannelSpec::Db {
            p_over_n1b,
            p_over_n2b,
            p12_over_n12b,
            p21_over_n21b,
        }
    }

    pub fn resolve(&self) -> Result<ChannelParams, ChannelError> {
        match *self {
            ChannelSpec::Db {
                p_over_n1b,
                p_over_n2b,
                p12_over_n12b,
                p21_over_n21b,
            } => ChannelParams::from_snr_linear(
                db_to_linear(p_over_n1b),
                db_to_linear(p_over_n2b),
                db_to_linear(p12_over_n12b),
                db_to_linear(p21_over_n21b),
            ),
            ChannelSpec::Linear {
                p_over_n1b,
                p_over_n2b,
                p12_over_n12b,
                p21_over_n21b,
            } => ChannelParams::from_snr_linear(p_over_n1b, p_over_n2b, p12_over_n12b, p21_over_n21b),
            ChannelSpec::Absolute {
                source_power,
                n1,
                n2,
                n12,
                n21,
                p12,
                p21,
                bandwidth,
            } => ChannelParams::new(source_power, n1, n2, n12, n21, p12, p21, bandwidth),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Symmetric,
    Asymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CooperationSpec {
    pub protocol: Protocol,
    pub scheme: SchemeKind,
    /// First sender of an asymmetric exchange.
    #[serde(default = "default_starter")]
    pub starter: Receiver,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    pub regime: Regime,
    /// Rounds (`Ks` or `Ka`) for commands that do not sweep K.
    #[serde(default = "default_rounds")]
    pub rounds: usize,
}

fn default_starter() -> Receiver {
    Receiver::One
}

fn default_strategy() -> Strategy {
    Strategy::ForwardCombined
}

fn default_rounds() -> usize {
    1
}

impl CooperationSpec {
    pub fn config(&self) -> CoopConfig {
        let scheme = match self.scheme {
            SchemeKind::Symmetric => Scheme::Symmetric { pairs: self.rounds },
            SchemeKind::Asymmetric => Scheme::Asymmetric {
                exchanges: self.rounds,
                starter: self.starter,
            },
        };
        CoopConfig {
            protocol: self.protocol,
            scheme,
            strategy: self.strategy,
            regime: self.regime,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Largest round count; sweeps cover `0..=k_max`.
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Cooperation power ratios `P12/P21` in dB for decision regions.
    #[serde(default = "default_ratios")]
    pub ratios_db: Vec<f64>,
    /// Noise density grids for decision regions.
    #[serde(default = "default_axis")]
    pub n1: GridAxis,
    #[serde(default = "default_axis")]
    pub n2: GridAxis,
}

fn default_k_max() -> usize {
    4
}

fn default_ratios() -> Vec<f64> {
    vec![-30.0, -10.0, 0.0, 10.0, 30.0]
}

fn default_axis() -> GridAxis {
    GridAxis {
        min: 1e-2,
        max: 1e2,
        points: 20,
        spacing: Spacing::Linear,
    }
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            k_max: default_k_max(),
            ratios_db: default_ratios(),
            n1: default_axis(),
            n2: default_axis(),
        }
    }
}

/// Source modulation for both protocols' BER.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSpec {
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_order() -> usize {
    4
}

impl Default for ModulationSpec {
    fn default() -> Self {
        ModulationSpec { order: default_order() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfSpec {
    /// Cooperation sub-channel width over the downlink width.
    #[serde(default = "default_ratio")]
    pub subchannel_ratio: f64,
    #[serde(default = "default_combiner")]
    pub combiner: Combiner,
    #[serde(default = "default_relay_model")]
    pub relay_model: RelayModelSource,
}

fn default_ratio() -> f64 {
    1.0
}

fn default_combiner() -> Combiner {
    Combiner::Mld
}

fn default_relay_model() -> RelayModelSource {
    DfSettings::default().relay_model
}

impl Default for DfSpec {
    fn default() -> Self {
        DfSpec {
            subchannel_ratio: default_ratio(),
            combiner: default_combiner(),
            relay_model: default_relay_model(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialSpec {
    /// Source symbols (AF) or blocks (DF) per sweep point.
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_batch")]
    pub batch: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_rel_halfwidth: Option<f64>,
}

fn default_trials() -> u64 {
    100_000
}

fn default_seed() -> u64 {
    1
}

fn default_batch() -> u64 {
    4096
}

impl Default for TrialSpec {
    fn default() -> Self {
        TrialSpec {
            trials: default_trials(),
            seed: default_seed(),
            batch: default_batch(),
            target_rel_halfwidth: None,
        }
    }
}

impl TrialSpec {
    pub fn config(&self) -> TrialConfig {
        TrialConfig {
            trials: self.trials,
            seed: self.seed,
            batch: self.batch,
            target_rel_halfwidth: self.target_rel_halfwidth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub channel: ChannelSpec,
    pub cooperation: CooperationSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub modulation: ModulationSpec,
    #[serde(default)]
    pub df: DfSpec,
    #[serde(default)]
    pub trials: TrialSpec,
}

impl Scenario {
    /// Scenario with default sweep, modulation, DF and trial sections.
    pub fn new(channel: ChannelSpec, cooperation: CooperationSpec) -> Self {
        Scenario {
            channel,
            cooperation,
            sweep: SweepSpec::default(),
            modulation: ModulationSpec::default(),
            df: DfSpec::default(),
            trials: TrialSpec::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario fields are all TOML-representable")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.channel.resolve()?;
        let invalid = |field, problem: &str| {
            Err(ScenarioError::Invalid {
                field,
                problem: problem.to_string(),
            })
        };
        for (field, axis) in [("sweep.n1", &self.sweep.n1), ("sweep.n2", &self.sweep.n2)] {
            if !(axis.min > 0.0 && axis.max >= axis.min && axis.max.is_finite()) {
                return invalid(field, "needs 0 < min <= max");
            }
            if axis.points == 0 {
                return invalid(field, "needs at least one point");
            }
        }
        if self.sweep.ratios_db.iter().any(|r| !r.is_finite()) {
            return invalid("sweep.ratios_db", "must be finite");
        }
        if !(self.df.subchannel_ratio > 0.0 && self.df.subchannel_ratio.is_finite()) {
            return invalid("df.subchannel_ratio", "must be positive");
        }
        if self.trials.trials == 0 {
            return invalid("trials.trials", "must be positive");
        }
        if self.trials.batch == 0 {
            return invalid("trials.batch", "must be positive");
        }
        if let Some(h) = self.trials.target_rel_halfwidth {
            if h.is_nan() || h <= 0.0 {
                return invalid("trials.target_rel_halfwidth", "must be positive");
            }
        }
        Ok(())
    }

    pub fn params(&self) -> ChannelParams {
        self.channel.resolve().expect("validated scenario")
    }

    pub fn config(&self) -> CoopConfig {
        self.cooperation.config()
    }

    pub fn df_settings(&self) -> DfSettings {
        DfSettings {
            source_order: self.modulation.order,
            subchannel_ratio: self.df.subchannel_ratio,
            combiner: self.df.combiner,
            relay_model: self.df.relay_model,
        }
    }
}
