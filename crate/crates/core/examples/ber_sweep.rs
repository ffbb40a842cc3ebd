//! Monte Carlo raw BER of AF cooperation against the number of exchanges,
//! with the three quality criteria per point.

use coopbc::channel::{ChannelParams, CoopConfig, Receiver, Regime, Scheme, Strategy};
use coopbc::df::Constellation;
use coopbc::mc::{simulate_af, TrialConfig};
use coopbc::metrics::CriteriaReport;

fn main() {
    let params = ChannelParams::from_snr_db(7.0, 3.0, 30.0, 30.0).expect("valid SNRs");
    let scheme = Scheme::Asymmetric {
        exchanges: 0,
        starter: Receiver::One,
    };
    let config = CoopConfig::af(scheme, Strategy::ForwardCombined, Regime::FixedDownlink);
    let qpsk = Constellation::new(4).expect("4-QAM");
    let trial = TrialConfig::new(200_000, 1).with_early_stop(0.05);

    println!("K  BER_1     BER_2     pe_max    pe_sum    pe_sys");
    for k in 0..=4 {
        let sim = simulate_af(&params, &config, k, &qpsk, &trial);
        let c = CriteriaReport::from_ber([sim.ber[0].ber, sim.ber[1].ber], Some(sim.joint.ber));
        println!(
            "{k}  {:.2e}  {:.2e}  {:.2e}  {:.2e}  {:.2e}",
            sim.ber[0].ber, sim.ber[1].ber, c.pe_max, c.pe_sum, sim.joint.ber
        );
    }
}
