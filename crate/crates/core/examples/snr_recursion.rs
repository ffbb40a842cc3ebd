//! Equivalent SNRs of AF cooperation, exchange by exchange.

use coopbc::af::run_recursion;
use coopbc::channel::{ChannelParams, CoopConfig, Receiver, Regime, Scheme, Strategy};

fn main() {
    let params = ChannelParams::from_snr_db(10.0, 0.0, 30.0, 30.0).expect("valid SNRs");
    let scheme = Scheme::Asymmetric {
        exchanges: 4,
        starter: Receiver::One,
    };
    let config = CoopConfig::af(scheme, Strategy::ForwardCombined, Regime::FixedTotal);
    let trajectory = run_recursion(&params, &config);

    println!("i  rho_I       rho_II      cross");
    for s in &trajectory.states {
        println!("{}  {:<10.4} {:<10.4} {:.3e}", s.index, s.rho[0], s.rho[1], s.cross);
    }
}
