//! Maximum receiver BER of AF (strategy S1, MRC) against DF (MLD), loaded
//! from a scenario description.

use coopbc::cli::cmd_compare;
use coopbc::scenario::Scenario;

const SCENARIO: &str = r#"
[channel.db]
p_over_n1b = 7.0
p_over_n2b = 3.0
p12_over_n12b = 30.0
p21_over_n21b = 30.0

[cooperation]
protocol = "df"
scheme = "asymmetric"
regime = "h2"

[sweep]
k_max = 3

[trials]
trials = 50000
"#;

fn main() {
    let scenario = Scenario::from_toml(SCENARIO).expect("valid scenario");
    let table = cmd_compare(&scenario).expect("compatible modulation");
    println!("K  AF-S1 max BER  DF max BER");
    for k in 0..table.rows.len() {
        let af = table.real(k, "af_s1_pe_max").unwrap();
        let df = table.real(k, "df_pe_max").unwrap();
        println!("{k}  {af:.3e}      {df:.3e}");
    }
}
