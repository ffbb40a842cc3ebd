//! Which receiver should start an asymmetric cooperation, over a grid of
//! downlink noise densities and several cooperation power ratios.

use coopbc::channel::{ChannelParams, CoopConfig, Receiver, Regime, Scheme, Strategy};
use coopbc::metrics::{decision_regions, GridAxis, Spacing};

fn main() {
    let params = ChannelParams::from_snr_db(0.0, 0.0, 0.0, 0.0).expect("valid SNRs");
    let scheme = Scheme::Asymmetric {
        exchanges: 2,
        starter: Receiver::One,
    };
    let template = CoopConfig::af(scheme, Strategy::ForwardCombined, Regime::FixedTotal);
    let axis = GridAxis {
        min: 1e-2,
        max: 1e2,
        points: 10,
        spacing: Spacing::Linear,
    };
    let map = decision_regions(&params, &template, 2, &axis, &axis, &[-30.0, -10.0, 0.0, 10.0, 30.0]);
    for curve in &map.curves {
        println!("P12/P21 = {:+} dB (rows n1, columns n2)", curve.ratio_db);
        for row in &curve.winners {
            let labels: Vec<&str> = row.iter().map(|w| w.label()).collect();
            println!("  {}", labels.join(" "));
        }
    }
}
