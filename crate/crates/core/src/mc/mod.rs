//! Monte Carlo harness for both protocols.
//!
//! Work is split into fixed-size batches. Batch `b` draws from a ChaCha8
//! stream keyed by `(seed, b)`, batches run in parallel, and their
//! accumulators are merged in batch order, so results are bitwise identical
//! for any thread count.

mod af;
mod df;

pub use af::{
    empirical_cross_correlation, simulate_af, simulate_af_trajectory, AfSimulation, CrossEstimate, SnrEstimate,
};
pub use df::{simulate_df, Combiner, DfSettings, DfSimulation, RelayModelSource};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Batches evaluated between two early-stopping checks.
const CHUNK_BATCHES: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    /// Number of trials: source symbols for AF, blocks for DF. With early
    /// stopping this is the cap.
    pub trials: u64,
    pub seed: u64,
    /// Trials per RNG stream.
    #[serde(default = "default_batch")]
    pub batch: u64,
    /// Stop once every BER's 95% half-width is below this fraction of the
    /// estimate. Checked every 16 batches.
    #[serde(default)]
    pub target_rel_halfwidth: Option<f64>,
}

fn default_batch() -> u64 {
    4096
}

impl TrialConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        TrialConfig {
            trials,
            seed,
            batch: default_batch(),
            target_rel_halfwidth: None,
        }
    }

    pub fn with_early_stop(self, rel_halfwidth: f64) -> Self {
        TrialConfig {
            target_rel_halfwidth: Some(rel_halfwidth),
            ..self
        }
    }

    fn batches(&self) -> u64 {
        self.trials.div_ceil(self.batch.max(1))
    }

    fn batch_len(&self, b: u64) -> u64 {
        let batch = self.batch.max(1);
        batch.min(self.trials - b * batch)
    }
}

/// RNG for batch `b`.
pub fn batch_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Circular complex Gaussian sample with total variance `noise`.
pub fn complex_noise<R: Rng + ?Sized>(rng: &mut R, noise: f64) -> Complex64 {
    let sd = (noise / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * sd, im * sd)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerEstimate {
    pub ber: f64,
    pub stderr: f64,
    pub trials: u64,
    pub errors: u64,
    pub bits: u64,
}

impl BerEstimate {
    pub fn new(errors: u64, bits: u64, trials: u64) -> Self {
        let ber = if bits == 0 { 0.0 } else { errors as f64 / bits as f64 };
        let stderr = if bits == 0 {
            0.0
        } else {
            (ber * (1.0 - ber) / bits as f64).sqrt()
        };
        BerEstimate {
            ber,
            stderr,
            trials,
            errors,
            bits,
        }
    }

    fn precise_enough(&self, rel_halfwidth: f64) -> bool {
        self.errors > 0 && 1.96 * self.stderr <= rel_halfwidth * self.ber
    }
}

pub(crate) trait Accumulator: Send + Sized {
    fn merge(&mut self, other: Self);
    /// Current BER estimates, used for early stopping.
    fn bers(&self) -> Vec<BerEstimate>;
}

/// Runs `batch(stream, len)` over all batches and merges in order.
pub(crate) fn run_batches<A, F>(trial: &TrialConfig, init: A, batch: F) -> A
where
    A: Accumulator,
    F: Fn(u64, u64) -> A + Sync,
{
    let total = trial.batches();
    let mut acc = init;
    let mut next = 0;
    while next < total {
        let end = match trial.target_rel_halfwidth {
            Some(_) => (next + CHUNK_BATCHES).min(total),
            None => total,
        };
        let parts: Vec<A> = (next..end)
            .into_par_iter()
            .map(|b| batch(b, trial.batch_len(b)))
            .collect();
        for part in parts {
            acc.merge(part);
        }
        next = end;
        if let Some(target) = trial.target_rel_halfwidth {
            if acc.bers().iter().all(|b| b.precise_enough(target)) {
                break;
            }
        }
    }
    acc
}
