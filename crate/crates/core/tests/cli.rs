use std::path::Path;
use std::process::{Command, Output};

const AF: &str = r#"
[channel.db]
p_over_n1b = 10.0
p_over_n2b = 0.0
p12_over_n12b = 30.0
p21_over_n21b = 30.0

[cooperation]
protocol = "af"
scheme = "asymmetric"
regime = "h1"

[sweep]
k_max = 2
"#;

fn run(dir: &Path, scenario: &str, args: &[&str]) -> Output {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, scenario).unwrap();
    Command::new(env!("CARGO_BIN_EXE_coopbc"))
        .args(args)
        .arg("--scenario")
        .arg(&path)
        .output()
        .unwrap()
}

#[test]
fn snr_writes_csv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), AF, &["snr"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# coopbc "));
    assert!(lines[0].contains("\"p_over_n1b\":10.0"));
    assert_eq!(lines[1], "k,rho_1,rho_2,alpha_1,alpha_2,noise_1,noise_2,cross,rate");
    assert_eq!(lines.len(), 2 + 3);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("rate.csv");
    let out = run(dir.path(), AF, &["rate", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(target).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("k,asym_s1,"));
}

#[test]
fn seed_flag_is_recorded_and_changes_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let small = format!("{AF}\n[trials]\ntrials = 5000\n");
    let a = run(dir.path(), &small, &["ber", "--seed", "3"]);
    let b = run(dir.path(), &small, &["ber", "--seed", "4"]);
    assert_eq!(a.status.code(), Some(0));
    let a = String::from_utf8(a.stdout).unwrap();
    let b = String::from_utf8(b.stdout).unwrap();
    assert!(a.lines().next().unwrap().contains("\"seed\":3"));
    assert_ne!(a.lines().nth(2), b.lines().nth(2));
}

#[test]
fn malformed_scenario_exits_with_2_and_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = AF.replace("p_over_n2b = 0.0", "p_over_n2b = oops");
    let out = run(dir.path(), &bad, &["snr"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn missing_scenario_exits_with_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_coopbc"))
        .args(["snr", "--scenario", "/nonexistent/scenario.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn incompatible_modulation_exits_with_2_and_remediation() {
    let dir = tempfile::tempdir().unwrap();
    let df = AF.replace("protocol = \"af\"", "protocol = \"df\"") + "\n[df]\nsubchannel_ratio = 0.3\n";
    let out = run(dir.path(), &df, &["ber"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("sub-channel width"), "{err}");
}

#[test]
fn oversized_block_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    // 6-bit source symbols onto 8-bit relay symbols: 24-bit blocks
    let df = AF.replace("protocol = \"af\"", "protocol = \"df\"")
        + "\n[modulation]\norder = 64\n\n[df]\nsubchannel_ratio = 0.75\n";
    let out = run(dir.path(), &df, &["ber"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("enumeration bound"), "{err}");
}

#[test]
fn help_documents_columns() {
    let out = Command::new(env!("CARGO_BIN_EXE_coopbc"))
        .args(["ber", "--help"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("pe_sys_stderr"), "{text}");
}
