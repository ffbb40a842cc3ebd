//! Amplify-and-forward with maximum-ratio combining.
//!
//! Every combiner output is tracked as `Y = alpha X + Z` with `Z` zero-mean
//! Gaussian. A state holds the two outputs' signal coefficients, noise
//! powers, their noise cross-correlation `e = E[Z_I Z_II*]`, and the
//! correlation of each output with both raw downlink noises (needed when a
//! receiver keeps forwarding its downlink observation).
//!
//! At each combining step receiver `d` sees its own previous output and the
//! partner's forwarded signal `a (alpha_f X + Z_f) + Z_coop`. The MRC weights
//! are `R^-1 h` up to the determinant, which yields
//!
//! ```text
//! w_coop = a alpha_f N_d - a alpha_d c
//! w_own  = (a^2 N_f + N_coop) alpha_d - a^2 alpha_f c
//! ```
//!
//! with `c = E[Z_d Z_f*]`. For S1 (`Z_f` = partner output) `c = e`.
//!
//! Under S2 every cooperation signal is a noisy copy of the partner's raw
//! downlink. The receiver combines its own downlink with all copies
//! collected so far; the copies are first merged into one branch, so the
//! output weights `(w_own, w_coop)` apply to `Y_d` and to that aggregate.

mod closed_form;

pub use closed_form::{s1_vs_s2_numerator, s2_closed_form};

use crate::channel::{
    plan_bandwidth, power_per_exchange, BandwidthPlan, ChannelParams, CoopConfig, ExchangePower, Receiver, Scheme,
    Strategy,
};

/// How the raw MRC weights are scaled before they are applied. The output
/// SNR does not depend on a common positive scaling of a combiner's weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightScaling {
    /// Use the weights exactly as the closed-form expressions give them.
    /// Signal coefficients then shrink or grow doubly exponentially with the
    /// iteration count, so this is only safe for a handful of rounds.
    Verbatim,
    /// Rescale each combiner so its output has unit signal coefficient.
    #[default]
    UnitGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MrcWeights {
    /// Receiver 1 weight on its own previous output.
    pub w1: f64,
    /// Receiver 2 weight on its own previous output.
    pub w2: f64,
    /// Receiver 2 weight on the cooperation signal from receiver 1.
    pub w12: f64,
    /// Receiver 1 weight on the cooperation signal from receiver 2.
    pub w21: f64,
}

impl MrcWeights {
    pub fn own(&self, rx: Receiver) -> f64 {
        match rx {
            Receiver::One => self.w1,
            Receiver::Two => self.w2,
        }
    }

    /// Weight receiver `rx` puts on the signal coming from its partner.
    pub fn coop(&self, rx: Receiver) -> f64 {
        match rx {
            Receiver::One => self.w21,
            Receiver::Two => self.w12,
        }
    }

    fn set(&mut self, rx: Receiver, own: f64, coop: f64) {
        match rx {
            Receiver::One => {
                self.w1 = own;
                self.w21 = coop;
            }
            Receiver::Two => {
                self.w2 = own;
                self.w12 = coop;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Gains {
    /// Amplification applied by receiver 1 before forwarding to receiver 2.
    pub a12: f64,
    /// Amplification applied by receiver 2 before forwarding to receiver 1.
    pub a21: f64,
}

impl Gains {
    pub fn from_sender(&self, sender: Receiver) -> f64 {
        match sender {
            Receiver::One => self.a12,
            Receiver::Two => self.a21,
        }
    }
}

/// Two-branch observation a receiver combined at one step:
/// `own = own_gain X + Z_own`, `coop = coop_gain X + Z_coop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPair {
    pub own_gain: f64,
    pub coop_gain: f64,
    pub own_noise: f64,
    pub coop_noise: f64,
    /// `E[Z_own Z_coop*]`.
    pub cross: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrState {
    pub index: usize,
    /// Signal coefficients of `Y_I`, `Y_II`.
    pub alpha: [f64; 2],
    /// Equivalent noise powers `N_I`, `N_II` (W).
    pub noise: [f64; 2],
    /// `e = E[Z_I Z_II*]` (W). Real for this model.
    pub cross: f64,
    /// Equivalent SNRs at both combiner outputs.
    pub rho: [f64; 2],
    /// Weights applied at this iteration (zero at the initial state and for
    /// idle receivers' cooperation weight).
    pub weights: MrcWeights,
    pub gains: Gains,
    /// What each receiver combined at this iteration, `None` when idle.
    pub branches: [Option<BranchPair>; 2],
    /// `E[Z_r Z_k*]` for combiner output `r` and raw downlink noise `k`.
    downlink_cross: [[f64; 2]; 2],
    /// Forward-the-downlink only: `sum a_k^2 / N_coop` over the copies of
    /// the partner's downlink each receiver has collected.
    pub coop_info: [f64; 2],
}

impl SnrState {
    /// Initial conditions: `alpha = 1`, `N = (N1, N2)`, `e = 0`,
    /// `rho = (P/N1, P/N2)`.
    pub fn initial(params: &ChannelParams, plan: &BandwidthPlan) -> Self {
        let p = params.source_power;
        SnrState {
            index: 0,
            alpha: [1.0, 1.0],
            noise: [plan.noise1, plan.noise2],
            cross: 0.0,
            rho: [p / plan.noise1, p / plan.noise2],
            weights: MrcWeights {
                w1: 1.0,
                w2: 1.0,
                ..MrcWeights::default()
            },
            gains: Gains::default(),
            branches: [None, None],
            downlink_cross: [[plan.noise1, 0.0], [0.0, plan.noise2]],
            coop_info: [0.0, 0.0],
        }
    }

    pub fn rho_of(&self, rx: Receiver) -> f64 {
        self.rho[rx.index()]
    }

    /// `E[Z_rx Z_k*]` between combiner output of `rx` and downlink noise `Z_k`.
    pub fn downlink_cross(&self, rx: Receiver, k: Receiver) -> f64 {
        self.downlink_cross[rx.index()][k.index()]
    }

    /// SNR recomputed from the signal model, `alpha^2 P / N`.
    pub fn direct_rho(&self, source_power: f64, rx: Receiver) -> f64 {
        let i = rx.index();
        self.alpha[i] * self.alpha[i] * source_power / self.noise[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrTrajectory {
    /// States for iterations `0..=K`.
    pub states: Vec<SnrState>,
    pub config: CoopConfig,
    pub plan: BandwidthPlan,
}

impl SnrTrajectory {
    pub fn last(&self) -> &SnrState {
        self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn final_rho(&self) -> [f64; 2] {
        self.last().rho
    }
}

/// `a = sqrt(P_i / (alpha^2 P + N))`: scales the forwarded signal to the
/// per-exchange power.
pub fn amplification_gain(alpha: f64, noise: f64, source_power: f64, power: f64) -> f64 {
    (power / (alpha * alpha * source_power + noise)).sqrt()
}

/// Gains both receivers would use at the step following `state` if they
/// forward their latest combiner output.
pub fn amplification_gains(state: &SnrState, source_power: f64, powers: &ExchangePower) -> Gains {
    Gains {
        a12: amplification_gain(state.alpha[0], state.noise[0], source_power, powers.p12),
        a21: amplification_gain(state.alpha[1], state.noise[1], source_power, powers.p21),
    }
}

/// Unnormalised MRC weights `(w_own, w_coop)` for combining an own branch
/// `alpha_d X + Z_d` with `a (alpha_f X + Z_f) + Z_coop`, `c = E[Z_d Z_f*]`.
pub fn combine_weights(
    own_alpha: f64,
    own_noise: f64,
    fwd_alpha: f64,
    fwd_noise: f64,
    cross: f64,
    gain: f64,
    coop_noise: f64,
) -> (f64, f64) {
    let w_coop = gain * fwd_alpha * own_noise - gain * own_alpha * cross;
    let w_own = (gain * gain * fwd_noise + coop_noise) * own_alpha - gain * gain * fwd_alpha * cross;
    (w_own, w_coop)
}

/// Symmetric-round weights when both receivers forward their previous
/// combiner output: `(w12, w2, w21, w1)` packed in [`MrcWeights`].
pub fn mrc_weights_symmetric(state: &SnrState, gains: &Gains, coop_noise: (f64, f64)) -> MrcWeights {
    let (n12, n21) = coop_noise;
    let [alpha_i, alpha_ii] = state.alpha;
    let [noise_i, noise_ii] = state.noise;
    let e = state.cross;
    let (w2, w12) = combine_weights(alpha_ii, noise_ii, alpha_i, noise_i, e, gains.a12, n12);
    let (w1, w21) = combine_weights(alpha_i, noise_i, alpha_ii, noise_ii, e, gains.a21, n21);
    MrcWeights { w1, w2, w12, w21 }
}

/// Post-combining SNR from the previous-iteration SNRs (the `S/T` ratio).
///
/// `own_*` describe the combining receiver's previous output, `fwd_*` the
/// forwarded signal, `cross = E[Z_own Z_fwd*]`, `coop_snr = P_i / N_coop`.
pub fn combined_snr(
    source_power: f64,
    own_alpha: f64,
    own_noise: f64,
    fwd_alpha: f64,
    fwd_noise: f64,
    cross: f64,
    coop_snr: f64,
) -> f64 {
    let p = source_power;
    let rho_own = own_alpha * own_alpha * p / own_noise;
    let rho_fwd = fwd_alpha * fwd_alpha * p / fwd_noise;
    let aa = fwd_alpha * own_alpha;
    let s = aa * (2.0 * cross) * rho_fwd * rho_own * coop_snr
        - aa * aa * p * (rho_own * (1.0 + rho_fwd) + coop_snr * (rho_fwd + rho_own));
    let t = cross * cross / p * rho_fwd * rho_own * coop_snr
        - aa * aa * p * (1.0 + coop_snr)
        - fwd_alpha * fwd_alpha * own_noise * rho_fwd * rho_own;
    s / t
}

/// Noise variable a covariance refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
enum NoiseRef {
    Output(Receiver),
    Downlink(Receiver),
}

/// New output noise `own_w Z_own + fwd_w Z_fwd + coop_w Z_coop`, where the
/// fresh cooperation noise of variance `coop_var` is private to this output.
#[derive(Debug, Clone, Copy)]
struct Combo {
    own: (NoiseRef, f64),
    fwd: (NoiseRef, f64),
    coop_var: f64,
}

fn covariance(state: &SnrState, plan: &BandwidthPlan, a: NoiseRef, b: NoiseRef) -> f64 {
    use NoiseRef::*;
    match (a, b) {
        (Output(x), Output(y)) if x == y => state.noise[x.index()],
        (Output(_), Output(_)) => state.cross,
        (Output(x), Downlink(k)) | (Downlink(k), Output(x)) => state.downlink_cross(x, k),
        (Downlink(x), Downlink(y)) if x == y => plan.downlink_noise(x),
        (Downlink(_), Downlink(_)) => 0.0,
    }
}

fn combo_covariance(state: &SnrState, plan: &BandwidthPlan, a: &Combo, b: &Combo, same: bool) -> f64 {
    let mut total = 0.0;
    for (ra, ca) in [a.own, a.fwd] {
        if ca == 0.0 {
            continue;
        }
        for (rb, cb) in [b.own, b.fwd] {
            if cb == 0.0 {
                continue;
            }
            total += ca * cb * covariance(state, plan, ra, rb);
        }
    }
    if same {
        total += a.coop_var;
    }
    total
}

/// The two branches one receiver merges: `own_alpha X + Z_own` and
/// `gain (fwd_alpha X + Z_fwd) + Z_coop`.
struct StepInput {
    own_ref: NoiseRef,
    own_alpha: f64,
    own_noise: f64,
    fwd_ref: NoiseRef,
    fwd_alpha: f64,
    fwd_noise: f64,
    cross: f64,
    gain: f64,
    coop_noise: f64,
    coop_snr: f64,
    amplification: f64,
}

/// One combining iteration in which every receiver of `combiners` merges
/// the partner's forwarded signal, all using the previous state.
fn step(
    state: &SnrState,
    params: &ChannelParams,
    plan: &BandwidthPlan,
    powers: &ExchangePower,
    combiners: &[Receiver],
    strategy: Strategy,
    scaling: WeightScaling,
) -> SnrState {
    let p = params.source_power;
    let mut next = state.clone();
    next.index = state.index + 1;
    next.weights = MrcWeights {
        w1: 1.0,
        w2: 1.0,
        ..MrcWeights::default()
    };
    next.gains = Gains::default();
    next.branches = [None, None];

    let mut combos = [
        Combo {
            own: (NoiseRef::Output(Receiver::One), 1.0),
            fwd: (NoiseRef::Downlink(Receiver::Two), 0.0),
            coop_var: 0.0,
        },
        Combo {
            own: (NoiseRef::Output(Receiver::Two), 1.0),
            fwd: (NoiseRef::Downlink(Receiver::One), 0.0),
            coop_var: 0.0,
        },
    ];

    for &dst in combiners {
        let sender = dst.partner();
        let d = dst.index();
        let power = powers.from_sender(sender);
        let coop_noise = plan.coop_noise_from(sender);
        let input = match strategy {
            Strategy::ForwardCombined => {
                let fwd_ref = NoiseRef::Output(sender);
                let (fwd_alpha, fwd_noise) = (state.alpha[sender.index()], state.noise[sender.index()]);
                let gain = amplification_gain(fwd_alpha, fwd_noise, p, power);
                StepInput {
                    own_ref: NoiseRef::Output(dst),
                    own_alpha: state.alpha[d],
                    own_noise: state.noise[d],
                    fwd_ref,
                    fwd_alpha,
                    fwd_noise,
                    cross: covariance(state, plan, NoiseRef::Output(dst), fwd_ref),
                    gain,
                    coop_noise,
                    coop_snr: power / coop_noise,
                    amplification: gain,
                }
            }
            Strategy::ForwardDownlink => {
                // Every copy observes the same partner downlink, so the copies
                // received so far reduce to one unit-noise branch
                // `sqrt(g) Y_p + V` with `g = sum a_k^2 / N_coop_k`.
                let fwd_noise = plan.downlink_noise(sender);
                let gain = amplification_gain(1.0, fwd_noise, p, power);
                let info = state.coop_info[d] + gain * gain / coop_noise;
                next.coop_info[d] = info;
                StepInput {
                    own_ref: NoiseRef::Downlink(dst),
                    own_alpha: 1.0,
                    own_noise: plan.downlink_noise(dst),
                    fwd_ref: NoiseRef::Downlink(sender),
                    fwd_alpha: 1.0,
                    fwd_noise,
                    cross: 0.0,
                    gain: info.sqrt(),
                    coop_noise: 1.0,
                    coop_snr: info * (p + fwd_noise),
                    amplification: gain,
                }
            }
        };

        let (mut w_own, mut w_coop) = combine_weights(
            input.own_alpha,
            input.own_noise,
            input.fwd_alpha,
            input.fwd_noise,
            input.cross,
            input.gain,
            input.coop_noise,
        );
        let alpha = w_coop * input.gain * input.fwd_alpha + w_own * input.own_alpha;
        let alpha = match scaling {
            WeightScaling::Verbatim => alpha,
            WeightScaling::UnitGain => {
                w_own /= alpha;
                w_coop /= alpha;
                1.0
            }
        };

        next.alpha[d] = alpha;
        next.rho[d] = combined_snr(
            p,
            input.own_alpha,
            input.own_noise,
            input.fwd_alpha,
            input.fwd_noise,
            input.cross,
            input.coop_snr,
        );
        next.weights.set(dst, w_own, w_coop);
        match sender {
            Receiver::One => next.gains.a12 = input.amplification,
            Receiver::Two => next.gains.a21 = input.amplification,
        }
        next.branches[d] = Some(BranchPair {
            own_gain: input.own_alpha,
            coop_gain: input.gain * input.fwd_alpha,
            own_noise: input.own_noise,
            coop_noise: input.gain * input.gain * input.fwd_noise + input.coop_noise,
            cross: input.gain * input.cross,
        });
        combos[d] = Combo {
            own: (input.own_ref, w_own),
            fwd: (input.fwd_ref, w_coop * input.gain),
            coop_var: w_coop * w_coop * input.coop_noise,
        };
    }

    for rx in Receiver::BOTH {
        let r = rx.index();
        if next.branches[r].is_none() {
            continue;
        }
        next.noise[r] = combo_covariance(state, plan, &combos[r], &combos[r], true);
        for k in Receiver::BOTH {
            let down = Combo {
                own: (NoiseRef::Downlink(k), 1.0),
                fwd: (NoiseRef::Downlink(k), 0.0),
                coop_var: 0.0,
            };
            next.downlink_cross[r][k.index()] = combo_covariance(state, plan, &combos[r], &down, false);
        }
    }
    next.cross = combo_covariance(state, plan, &combos[0], &combos[1], false);
    next
}

/// Simultaneous round: both receivers combine using the partner's
/// previous-iteration signal.
pub fn step_symmetric(
    state: &SnrState,
    params: &ChannelParams,
    plan: &BandwidthPlan,
    powers: &ExchangePower,
    strategy: Strategy,
    scaling: WeightScaling,
) -> SnrState {
    step(state, params, plan, powers, &Receiver::BOTH, strategy, scaling)
}

/// Alternating exchange `i`: the starter transmits at odd `i`, so its
/// partner combines; the roles flip at even `i`. The idle receiver's
/// signal model is carried over untouched.
#[allow(clippy::too_many_arguments)]
pub fn step_asymmetric(
    state: &SnrState,
    params: &ChannelParams,
    plan: &BandwidthPlan,
    powers: &ExchangePower,
    i: usize,
    starter: Receiver,
    strategy: Strategy,
    scaling: WeightScaling,
) -> SnrState {
    let combiner = if i % 2 == 1 { starter.partner() } else { starter };
    step(state, params, plan, powers, &[combiner], strategy, scaling)
}

pub fn run_recursion(params: &ChannelParams, config: &CoopConfig) -> SnrTrajectory {
    run_recursion_with(params, config, WeightScaling::default())
}

pub fn run_recursion_with(params: &ChannelParams, config: &CoopConfig, scaling: WeightScaling) -> SnrTrajectory {
    let plan = plan_bandwidth(params, config);
    let rounds = config.scheme.rounds();
    let mut states = Vec::with_capacity(rounds + 1);
    states.push(SnrState::initial(params, &plan));
    for i in 1..=rounds {
        let powers = power_per_exchange(params, config, i).expect("index within 1..=rounds");
        let prev = states.last().unwrap();
        let next = match config.scheme {
            Scheme::Symmetric { .. } => step_symmetric(prev, params, &plan, &powers, config.strategy, scaling),
            Scheme::Asymmetric { starter, .. } => {
                step_asymmetric(prev, params, &plan, &powers, i, starter, config.strategy, scaling)
            }
        };
        states.push(next);
    }
    SnrTrajectory {
        states,
        config: *config,
        plan,
    }
}

/// Mutual information carried by one combining step, computed twice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiCheck {
    pub receiver: Receiver,
    /// `log2(1 + rho)` of the scalar combiner output.
    pub combined: f64,
    /// `I(X; own, coop)` of the two-branch Gaussian vector observation.
    pub vector: f64,
}

/// For every receiver that combined at `state`, compares the information in
/// the scalar MRC output with the information in the two branches it merged.
pub fn mi_conservation_check(state: &SnrState, source_power: f64) -> Vec<MiCheck> {
    let p = source_power;
    Receiver::BOTH
        .iter()
        .filter_map(|&rx| {
            let b = state.branches[rx.index()]?;
            let combined = (1.0 + state.rho_of(rx)).log2();
            // log det(R + P h h^T) - log det(R)
            let det_r = b.own_noise * b.coop_noise - b.cross * b.cross;
            let s11 = b.own_noise + p * b.own_gain * b.own_gain;
            let s22 = b.coop_noise + p * b.coop_gain * b.coop_gain;
            let s12 = b.cross + p * b.own_gain * b.coop_gain;
            let det_s = s11 * s22 - s12 * s12;
            Some(MiCheck {
                receiver: rx,
                combined,
                vector: (det_s / det_r).log2(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Regime, Scheme};
    use approx::assert_relative_eq;

    fn params() -> ChannelParams {
        // P=10, N1=1, N2=2, N12=N21=1 with B=1
        ChannelParams::new(10.0, 1.0, 2.0, 1.0, 1.0, 100.0, 100.0, 1.0).unwrap()
    }

    fn asym(k: usize, strategy: Strategy, regime: Regime) -> CoopConfig {
        CoopConfig::af(
            Scheme::Asymmetric {
                exchanges: k,
                starter: Receiver::One,
            },
            strategy,
            regime,
        )
    }

    fn sym(k: usize, strategy: Strategy, regime: Regime) -> CoopConfig {
        CoopConfig::af(Scheme::Symmetric { pairs: k }, strategy, regime)
    }

    #[test]
    fn gain_examples() {
        assert_eq!(amplification_gain(1.0, 1.0, 10.0, 11.0), 1.0);
        assert_eq!(amplification_gain(1.0, 1.0, 10.0, 0.0), 0.0);
        assert_relative_eq!(
            amplification_gain(2.0, 3.0, 10.0, 86.0),
            2f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn weights_reduce_to_independent_branches() {
        let p = ChannelParams::new(10.0, 1.0, 2.0, 1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let plan = plan_bandwidth(&p, &sym(1, Strategy::ForwardCombined, Regime::FixedDownlink));
        let s = SnrState::initial(&p, &plan);
        let w = mrc_weights_symmetric(&s, &Gains { a12: 1.0, a21: 1.0 }, (1.0, 1.0));
        assert_eq!(w.w12, 2.0);
        assert_eq!(w.w2, 2.0);

        let w = mrc_weights_symmetric(&s, &Gains { a12: 0.0, a21: 0.0 }, (1.0, 1.0));
        assert_eq!(w.w12, 0.0);
        assert_eq!(w.w2, 1.0);
    }

    #[test]
    fn zero_power_is_identity() {
        let p = ChannelParams::new(10.0, 1.0, 2.0, 1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        for cfg in [
            sym(3, Strategy::ForwardCombined, Regime::FixedDownlink),
            asym(3, Strategy::ForwardDownlink, Regime::FixedDownlink),
        ] {
            let traj = run_recursion(&p, &cfg);
            for s in &traj.states {
                assert_relative_eq!(s.rho[0], 10.0, max_relative = 1e-12);
                assert_relative_eq!(s.rho[1], 5.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn strategies_agree_on_first_round() {
        for cfg in [
            sym(1, Strategy::ForwardCombined, Regime::FixedTotal),
            asym(1, Strategy::ForwardCombined, Regime::FixedTotal),
        ] {
            let s1 = run_recursion(&params(), &cfg);
            let s2 = run_recursion(
                &params(),
                &CoopConfig {
                    strategy: Strategy::ForwardDownlink,
                    ..cfg
                },
            );
            for (a, b) in s1.states.iter().zip(&s2.states) {
                for r in 0..2 {
                    assert_relative_eq!(a.rho[r], b.rho[r], max_relative = 1e-13);
                    assert_relative_eq!(a.noise[r], b.noise[r], max_relative = 1e-13);
                }
                assert_relative_eq!(a.cross, b.cross, max_relative = 1e-13, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn first_symmetric_round_matches_two_branch_mrc() {
        let p = params();
        let traj = run_recursion(&p, &sym(1, Strategy::ForwardCombined, Regime::FixedDownlink));
        let s = &traj.states[1];
        // rho_2 + a^2 alpha^2 P / (a^2 N_I + N12), a^2 = 100 / (10 + 1)
        let a2: f64 = 100.0 / 11.0;
        let expected = 5.0 + a2 * 10.0 / (a2 * 1.0 + 1.0);
        assert_relative_eq!(s.rho[1], expected, max_relative = 1e-12);
        let a2: f64 = 100.0 / 12.0;
        assert_relative_eq!(s.rho[0], 10.0 + a2 * 10.0 / (a2 * 2.0 + 1.0), max_relative = 1e-12);
    }

    #[test]
    fn asymmetric_first_exchange_only_moves_partner() {
        let p = params();
        let traj = run_recursion(&p, &asym(1, Strategy::ForwardCombined, Regime::FixedDownlink));
        let (s0, s1) = (&traj.states[0], &traj.states[1]);
        assert_eq!(s0.rho[0].to_bits(), s1.rho[0].to_bits());
        assert_eq!(s0.alpha[0].to_bits(), s1.alpha[0].to_bits());
        assert_eq!(s0.noise[0].to_bits(), s1.noise[0].to_bits());
        assert!(s1.rho[1] > s0.rho[1]);
    }

    #[test]
    fn asymmetric_without_power_is_unchanged() {
        let p = ChannelParams { p12: 0.0, ..params() };
        let traj = run_recursion(&p, &asym(1, Strategy::ForwardCombined, Regime::FixedDownlink));
        assert_relative_eq!(traj.states[1].rho[1], traj.states[0].rho[1], max_relative = 1e-14);
        assert_eq!(traj.states[1].rho[0], traj.states[0].rho[0]);
    }

    #[test]
    fn snr_formula_matches_signal_model() {
        let p = params();
        for k in 0..6 {
            for strategy in [Strategy::ForwardCombined, Strategy::ForwardDownlink] {
                for cfg in [
                    sym(k, strategy, Regime::FixedTotal),
                    asym(k, strategy, Regime::FixedDownlink),
                ] {
                    for scaling in [WeightScaling::Verbatim, WeightScaling::UnitGain] {
                        let traj = run_recursion_with(&p, &cfg, scaling);
                        for s in &traj.states {
                            for rx in Receiver::BOTH {
                                assert_relative_eq!(
                                    s.rho_of(rx),
                                    s.direct_rho(p.source_power, rx),
                                    max_relative = 1e-9
                                );
                            }
                            assert!(s.cross.abs() <= (s.noise[0] * s.noise[1]).sqrt() * (1.0 + 1e-12));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn weight_scaling_does_not_change_snr() {
        let p = params();
        for cfg in [
            sym(4, Strategy::ForwardCombined, Regime::FixedDownlink),
            asym(5, Strategy::ForwardCombined, Regime::FixedTotal),
        ] {
            let a = run_recursion_with(&p, &cfg, WeightScaling::Verbatim);
            let b = run_recursion_with(&p, &cfg, WeightScaling::UnitGain);
            for (x, y) in a.states.iter().zip(&b.states) {
                assert_relative_eq!(x.rho[0], y.rho[0], max_relative = 1e-10);
                assert_relative_eq!(x.rho[1], y.rho[1], max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn symmetric_cross_correlation_follows_explicit_recursion() {
        // e' = w12 a12 w1 N_I + w21 a21 w2 N_II + (w1 w2 + w12 a12 w21 a21) e
        let p = params();
        let traj = run_recursion_with(
            &p,
            &sym(4, Strategy::ForwardCombined, Regime::FixedDownlink),
            WeightScaling::Verbatim,
        );
        for pair in traj.states.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            let w = next.weights;
            let g = next.gains;
            let e = w.w12 * g.a12 * w.w1 * prev.noise[0]
                + w.w21 * g.a21 * w.w2 * prev.noise[1]
                + (w.w1 * w.w2 + w.w12 * g.a12 * w.w21 * g.a21) * prev.cross;
            assert_relative_eq!(next.cross, e, max_relative = 1e-12);
            // weights match the closed-form symmetric expressions
            let expect = mrc_weights_symmetric(prev, &g, (p.n12, p.n21));
            assert_relative_eq!(w.w12, expect.w12, max_relative = 1e-12);
            assert_relative_eq!(w.w2, expect.w2, max_relative = 1e-12);
            assert_relative_eq!(w.w21, expect.w21, max_relative = 1e-12);
            assert_relative_eq!(w.w1, expect.w1, max_relative = 1e-12);
        }
    }

    #[test]
    fn asymmetric_cross_correlation_follows_explicit_recursion() {
        let p = params();
        let traj = run_recursion_with(
            &p,
            &asym(5, Strategy::ForwardCombined, Regime::FixedDownlink),
            WeightScaling::Verbatim,
        );
        for pair in traj.states.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            let (w, g) = (next.weights, next.gains);
            let e = if next.index % 2 == 1 {
                w.w2 * prev.cross + w.w12 * g.a12 * prev.noise[0]
            } else {
                w.w1 * prev.cross + w.w21 * g.a21 * prev.noise[1]
            };
            assert_relative_eq!(next.cross, e, max_relative = 1e-12, epsilon = 1e-300);
        }
    }

    #[test]
    fn mi_is_conserved() {
        let p = params();
        let traj = run_recursion(&p, &sym(4, Strategy::ForwardCombined, Regime::FixedDownlink));
        let first = mi_conservation_check(&traj.states[1], p.source_power);
        assert_eq!(first.len(), 2);
        for s in &traj.states[1..] {
            for check in mi_conservation_check(s, p.source_power) {
                assert_relative_eq!(check.combined, check.vector, max_relative = 1e-9);
            }
        }
        // first exchange with e = 0: log2(1 + rho_2 + rho_12_eff)
        // symmetric with four pairs: 25 per exchange
        let a2: f64 = 25.0 / 11.0;
        let expected = (1.0 + 5.0 + a2 * 10.0 / (a2 + 1.0)).log2();
        assert_relative_eq!(first[1].vector, expected, max_relative = 1e-12);
    }

    #[test]
    fn mi_without_cooperation_power() {
        let p = ChannelParams { p12: 0.0, ..params() };
        let traj = run_recursion(&p, &asym(1, Strategy::ForwardCombined, Regime::FixedDownlink));
        let check = mi_conservation_check(&traj.states[1], p.source_power);
        assert_eq!(check.len(), 1);
        assert_relative_eq!(check[0].combined, 6f64.log2(), max_relative = 1e-12);
        assert_relative_eq!(check[0].vector, 6f64.log2(), max_relative = 1e-12);
    }

    #[test]
    fn trajectory_is_deterministic_and_sized() {
        let cfg = asym(4, Strategy::ForwardCombined, Regime::FixedTotal);
        let a = run_recursion(&params(), &cfg);
        let b = run_recursion(&params(), &cfg);
        assert_eq!(a, b);
        assert_eq!(a.states.len(), 5);
        let zero = run_recursion(&params(), &asym(0, Strategy::ForwardCombined, Regime::FixedTotal));
        assert_eq!(zero.states.len(), 1);
        assert_eq!(zero.final_rho(), [10.0, 5.0]);
    }
}
