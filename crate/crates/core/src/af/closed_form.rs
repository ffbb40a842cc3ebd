//! Closed forms for the forward-the-downlink strategy and the two-exchange
//! comparison between the strategies.

use crate::channel::{BandwidthPlan, ChannelParams};

use super::amplification_gain;

/// Final SNRs `(rho_I, rho_II)` when both receivers forward their downlink
/// signal over `pairs` symmetric rounds.
///
/// Each round carries `a^(Ks) = a^(1) / sqrt(Ks)` and the `Ks` copies add
/// up, so the result is `rho_1 + rho_21_eff` (resp. `rho_2 + rho_12_eff`)
/// with the single-round gain `a^(1) = sqrt(P21 / (P + N2))`.
pub fn s2_closed_form(params: &ChannelParams, plan: &BandwidthPlan, pairs: usize) -> [f64; 2] {
    assert!(pairs >= 1, "closed form needs at least one round");
    let ks = pairs as f64;
    let p = params.source_power;
    let branch = |own_noise: f64, fwd_noise: f64, budget: f64, coop_noise: f64| {
        let a1 = amplification_gain(1.0, fwd_noise, p, budget);
        let a = a1 / ks.sqrt();
        (1.0 / own_noise + ks * a * a / (ks * a * a * fwd_noise + coop_noise)) * p
    };
    [
        branch(plan.noise1, plan.noise2, params.p21, plan.noise21),
        branch(plan.noise2, plan.noise1, params.p12, plan.noise12),
    ]
}

/// Numerator of `rho_I(S2) - rho_I(S1)` after two alternating exchanges
/// (receiver 1 starts) with a fixed downlink bandwidth. Every term is a
/// product of non-negative quantities, so the value is never negative.
pub fn s1_vs_s2_numerator(params: &ChannelParams, plan: &BandwidthPlan) -> f64 {
    let p = params.source_power;
    let (p12, p21) = (params.p12, params.p21);
    let (n1, n2) = (plan.noise1, plan.noise2);
    let (n12, n21) = (plan.noise12, plan.noise21);
    let bracket = 2.0 * n21 * n12 * p * p
        + p * n21 * n12 * n2
        + 2.0 * p * n1 * n21 * n12
        + p * p21 * n12 * n2
        + 2.0 * p * n1 * p12 * n21
        + p * p12 * n21 * n2
        + n1 * n21 * n12 * n2
        + n1 * p21 * n12 * n2
        + n1 * p12 * n21 * n2;
    p * n2 * p21 * p12 * bracket
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::af::run_recursion;
    use crate::channel::{plan_bandwidth, CoopConfig, Receiver, Regime, Scheme, Strategy};
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_example() {
        let params = ChannelParams::new(10.0, 1.0, 2.0, 1.0, 1.0, 0.0, 100.0, 1.0).unwrap();
        let cfg = CoopConfig::af(
            Scheme::Symmetric { pairs: 1 },
            Strategy::ForwardDownlink,
            Regime::FixedDownlink,
        );
        let plan = plan_bandwidth(&params, &cfg);
        let [rho_i, rho_ii] = s2_closed_form(&params, &plan, 1);
        let a2: f64 = 100.0 / 12.0;
        assert_relative_eq!(rho_i, 10.0 + a2 * 10.0 / (a2 * 2.0 + 1.0), max_relative = 1e-12);
        assert_relative_eq!(rho_i, 14.717, max_relative = 1e-4);
        assert_relative_eq!(rho_ii, 5.0, max_relative = 1e-12);
    }

    #[test]
    fn closed_form_without_cooperation() {
        let params = ChannelParams::new(10.0, 1.0, 2.0, 1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let cfg = CoopConfig::af(
            Scheme::Symmetric { pairs: 3 },
            Strategy::ForwardDownlink,
            Regime::FixedDownlink,
        );
        let plan = plan_bandwidth(&params, &cfg);
        let rho = s2_closed_form(&params, &plan, 3);
        assert_relative_eq!(rho[0], 10.0, max_relative = 1e-15);
        assert_relative_eq!(rho[1], 5.0, max_relative = 1e-15);
    }

    #[test]
    fn closed_form_matches_recursion() {
        let params = ChannelParams::new(3.0, 0.7, 1.9, 0.2, 0.5, 5.0, 2.5, 1.0).unwrap();
        for regime in [Regime::FixedDownlink, Regime::FixedTotal] {
            for ks in 1..6 {
                let cfg = CoopConfig::af(Scheme::Symmetric { pairs: ks }, Strategy::ForwardDownlink, regime);
                let plan = plan_bandwidth(&params, &cfg);
                let rec = run_recursion(&params, &cfg).final_rho();
                let cf = s2_closed_form(&params, &plan, ks);
                assert_relative_eq!(rec[0], cf[0], max_relative = 1e-9);
                assert_relative_eq!(rec[1], cf[1], max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn numerator_vanishes_without_power() {
        let params = ChannelParams::new(3.0, 0.7, 1.9, 0.2, 0.5, 0.0, 2.5, 1.0).unwrap();
        let cfg = CoopConfig::af(
            Scheme::Asymmetric {
                exchanges: 2,
                starter: Receiver::One,
            },
            Strategy::ForwardCombined,
            Regime::FixedDownlink,
        );
        let plan = plan_bandwidth(&params, &cfg);
        assert_eq!(s1_vs_s2_numerator(&params, &plan), 0.0);
        let params = ChannelParams {
            p12: 1.0,
            p21: 0.0,
            ..params
        };
        assert_eq!(s1_vs_s2_numerator(&params, &plan), 0.0);
    }
}
