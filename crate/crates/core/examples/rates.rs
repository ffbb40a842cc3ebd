//! AF rate against the number of cooperation rounds for both strategies and
//! both schemes, with the optimal round count and the SIMO ceiling.

use coopbc::channel::{ChannelParams, CoopConfig, Receiver, Regime, Scheme, Strategy};
use coopbc::metrics::{optimal_k, simo_bound};

fn main() {
    let params = ChannelParams::from_snr_db(10.0, 10.0, 16.0, 16.0).expect("valid SNRs");
    let asym = Scheme::Asymmetric {
        exchanges: 0,
        starter: Receiver::One,
    };
    let sym = Scheme::Symmetric { pairs: 0 };
    println!("SIMO bound: {:.4} bit/s", simo_bound(&params));
    for regime in [Regime::FixedTotal, Regime::FixedDownlink] {
        for (name, scheme) in [("asymmetric", asym), ("symmetric", sym)] {
            for strategy in [Strategy::ForwardCombined, Strategy::ForwardDownlink] {
                let template = CoopConfig::af(scheme, strategy, regime);
                let (k, rates) = optimal_k(&params, &template, 5);
                let rates: Vec<String> = rates.iter().map(|r| format!("{r:.4}")).collect();
                println!("{regime:?} {name} {strategy:?}: K* = {k}, rates {}", rates.join(" "));
            }
        }
    }
}
