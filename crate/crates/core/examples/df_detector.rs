//! One DF block end to end: a BPSK source relayed as 16-QAM over a quarter
//! of the downlink bandwidth, detected with the maximum-likelihood detector.

use coopbc::df::{
    choose_compatible_modulation, relay_decode_and_remap, Constellation, Detector, RelayBranch, RelayErrorModel,
};
use coopbc::mc::{batch_rng, complex_noise};
use num_complex::Complex64;
use rand::Rng;

fn main() {
    let source = Constellation::new(2).expect("BPSK");
    let (relay_order, shape) = choose_compatible_modulation(2, 1.0, 0.25).expect("compatible widths");
    let relay = Constellation::new(relay_order).expect("square QAM");
    println!(
        "relay uses {relay_order}-QAM, {} source symbols per relay symbol",
        shape.s / shape.r
    );

    let mut rng = batch_rng(7, 0);
    let word: u64 = rng.random_range(0..1 << shape.n);
    let send = |noise: f64, rng: &mut _| -> Vec<Complex64> {
        (0..shape.s)
            .map(|t| source.point(shape.source_label(word, t)) + complex_noise(rng, noise))
            .collect()
    };
    let (direct_noise, relay_noise, coop_noise) = (0.5, 0.2, 0.05);
    let at_receiver = send(direct_noise, &mut rng);
    let at_relay = send(relay_noise, &mut rng);

    let labels = relay_decode_and_remap(&at_relay, 1.0, &source, &relay, &shape);
    let forwarded: Vec<Complex64> = labels
        .iter()
        .map(|&u| relay.point(u) + complex_noise(&mut rng, coop_noise))
        .collect();
    let model = RelayErrorModel::hard_decision(&source, &relay, &shape, 1.0, relay_noise);
    println!(
        "relay symbol error rate under the model: {:.4}",
        model.symbol_error_rate()
    );

    let detector = Detector {
        shape: &shape,
        source: &source,
        relay: &relay,
        source_amplitude: 1.0,
        direct_noise,
    };
    let branch = RelayBranch {
        y: &forwarded,
        amplitude: 1.0,
        noise: coop_noise,
        model: &model,
    };
    let llr = detector
        .llr(&at_receiver, &[branch])
        .expect("block within the enumeration bound");
    println!("sent    {word:0width$b}", width = shape.n);
    println!("decided {:0width$b}", llr.decisions(), width = shape.n);
    for k in 0..llr.len() {
        println!("bit {k}: ln ratio {:+.3}", llr.log_ratio(k));
    }
}
