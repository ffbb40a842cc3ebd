use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use coopbc::cli::{cmd_ber, cmd_compare, cmd_rate, cmd_regions, cmd_snr, render_csv, CliError, Table};
use coopbc::scenario::Scenario;

/// Two-receiver broadcast channel with bidirectional cooperation.
///
/// Exit codes: 0 success, 2 configuration error, 3 numeric or
/// enumeration-bound error.
#[derive(Parser)]
#[command(name = "coopbc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic AF combiner state per round count.
    ///
    /// Columns: k, rho_1, rho_2, alpha_1, alpha_2, noise_1, noise_2, cross, rate.
    Snr(Common),
    /// AF rate of both schemes and strategies per round count.
    ///
    /// Columns: k, asym_s1, asym_s2, sym_s1, sym_s2, simo.
    Rate(Common),
    /// Monte Carlo raw BER per round count for the scenario's protocol.
    ///
    /// Columns: k, ber_1, ber_1_stderr, ber_2, ber_2_stderr, pe_max, pe_sum, pe_sys, pe_sys_stderr, bits.
    Ber(Common),
    /// Which receiver should start an asymmetric cooperation.
    ///
    /// Columns: kind (cell or boundary), ratio_db, n1, n2, winner (R1, R2 or tie), rate_diff.
    Regions(Common),
    /// AF with strategies S1 and S2 against DF per round count.
    ///
    /// Columns: k, af_s1_ber_1, af_s1_ber_2, af_s1_pe_max, af_s1_rate, af_s2_ber_1, af_s2_ber_2, af_s2_pe_max,
    /// af_s2_rate, df_ber_1, df_ber_2, df_pe_max.
    Compare(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario's Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores if omitted.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

type CommandFn = fn(&Scenario) -> Result<Table, CliError>;

fn run(command: Command) -> Result<(), CliError> {
    let (common, cmd): (Common, CommandFn) = match command {
        Command::Snr(c) => (c, cmd_snr),
        Command::Rate(c) => (c, cmd_rate),
        Command::Ber(c) => (c, cmd_ber),
        Command::Regions(c) => (c, cmd_regions),
        Command::Compare(c) => (c, cmd_compare),
    };
    let mut scenario = Scenario::load(&common.scenario)?;
    if let Some(seed) = common.seed {
        scenario.trials.seed = seed;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().expect("thread pool");
    let table = pool.install(|| cmd(&scenario))?;
    let text = match common.format {
        Format::Csv => render_csv(&scenario, &table),
    };
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
