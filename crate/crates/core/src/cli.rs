//! Command implementations behind the `coopbc` binary. Each command turns a
//! scenario into a [`Table`]; [`render_csv`] writes it out.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::af::run_recursion;
use crate::channel::{plan_bandwidth, ChannelParams, Protocol, Scheme, Strategy};
use crate::df::{Constellation, DfError};
use crate::mc::{simulate_af, simulate_df, BerEstimate};
use crate::metrics::{decision_regions, rate_af, rate_for_rounds, simo_bound, CriteriaReport};
use crate::scenario::{Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Df(#[from] DfError),
    #[error("non-finite {quantity} at K = {k}; check that the channel parameters are within floating-point range")]
    NonFinite { quantity: &'static str, k: usize },
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    /// 2 for configuration problems, 3 for numeric or enumeration-bound
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) | CliError::Output { .. } => 2,
            CliError::Df(DfError::EnumerationBound { .. } | DfError::ShapeMismatch | DfError::InvalidModel { .. }) => 3,
            CliError::Df(_) => 2,
            CliError::NonFinite { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
    Empty,
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(v) => write!(f, "{v:.11e}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Numeric value of `row`, `column`.
    pub fn real(&self, row: usize, column: &str) -> Option<f64> {
        match self.rows.get(row)?.get(self.column(column)?)? {
            Cell::Real(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

#[derive(Serialize)]
struct Preamble<'a> {
    scenario: &'a Scenario,
    params: ChannelParams,
}

/// CSV with a leading `#` line holding the tool version and the resolved
/// scenario as JSON, then one header row. Reals use 12 significant digits.
pub fn render_csv(scenario: &Scenario, table: &Table) -> String {
    let preamble = Preamble {
        scenario,
        params: scenario.params(),
    };
    let mut out = String::new();
    let json = serde_json::to_string(&preamble).expect("scenario serializes");
    writeln!(out, "# coopbc {} {json}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "{}", table.columns.join(",")).unwrap();
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out
}

fn finite(value: f64, quantity: &'static str, k: usize) -> Result<Cell, CliError> {
    if value.is_finite() {
        Ok(Cell::Real(value))
    } else {
        Err(CliError::NonFinite { quantity, k })
    }
}

/// Final combiner state for every round count `K = 0..=k_max`.
///
/// Columns: `k, rho_1, rho_2, alpha_1, alpha_2, noise_1, noise_2, cross, rate`.
pub fn cmd_snr(scenario: &Scenario) -> Result<Table, CliError> {
    let params = scenario.params();
    let template = scenario.config();
    let mut table = Table::new(vec![
        "k", "rho_1", "rho_2", "alpha_1", "alpha_2", "noise_1", "noise_2", "cross", "rate",
    ]);
    for k in 0..=scenario.sweep.k_max {
        let config = template.with_rounds(k);
        let trajectory = run_recursion(&params, &config);
        let s = trajectory.last();
        let rate = rate_af(&plan_bandwidth(&params, &config), s.rho);
        table.push(vec![
            Cell::Int(k as u64),
            finite(s.rho[0], "rho_1", k)?,
            finite(s.rho[1], "rho_2", k)?,
            finite(s.alpha[0], "alpha_1", k)?,
            finite(s.alpha[1], "alpha_2", k)?,
            finite(s.noise[0], "noise_1", k)?,
            finite(s.noise[1], "noise_2", k)?,
            finite(s.cross, "cross", k)?,
            finite(rate, "rate", k)?,
        ]);
    }
    Ok(table)
}

/// AF rate of both schemes and both strategies per round count, with the
/// scenario's regime and starter.
///
/// Columns: `k, asym_s1, asym_s2, sym_s1, sym_s2, simo`.
pub fn cmd_rate(scenario: &Scenario) -> Result<Table, CliError> {
    let params = scenario.params();
    let base = scenario.config();
    let simo = simo_bound(&params);
    let mut table = Table::new(vec!["k", "asym_s1", "asym_s2", "sym_s1", "sym_s2", "simo"]);
    let variants = [
        (
            "asym_s1",
            Scheme::Asymmetric {
                exchanges: 0,
                starter: scenario.cooperation.starter,
            },
            Strategy::ForwardCombined,
        ),
        (
            "asym_s2",
            Scheme::Asymmetric {
                exchanges: 0,
                starter: scenario.cooperation.starter,
            },
            Strategy::ForwardDownlink,
        ),
        ("sym_s1", Scheme::Symmetric { pairs: 0 }, Strategy::ForwardCombined),
        ("sym_s2", Scheme::Symmetric { pairs: 0 }, Strategy::ForwardDownlink),
    ];
    for k in 0..=scenario.sweep.k_max {
        let mut row = vec![Cell::Int(k as u64)];
        for (name, scheme, strategy) in variants {
            let mut config = base;
            config.protocol = Protocol::Af;
            config.scheme = scheme;
            config.strategy = strategy;
            row.push(finite(rate_for_rounds(&params, &config, k), name, k)?);
        }
        row.push(finite(simo, "simo", k)?);
        table.push(row);
    }
    Ok(table)
}

fn ber_cells(ber: &[BerEstimate; 2], joint: &BerEstimate) -> Vec<Cell> {
    let report = CriteriaReport::from_ber([ber[0].ber, ber[1].ber], Some(joint.ber));
    vec![
        Cell::Real(ber[0].ber),
        Cell::Real(ber[0].stderr),
        Cell::Real(ber[1].ber),
        Cell::Real(ber[1].stderr),
        Cell::Real(report.pe_max),
        Cell::Real(report.pe_sum),
        Cell::Real(joint.ber),
        Cell::Real(joint.stderr),
        Cell::Int(joint.bits),
    ]
}

/// Monte Carlo raw BER per round count for the scenario's protocol.
///
/// Columns: `k, ber_1, ber_1_stderr, ber_2, ber_2_stderr, pe_max, pe_sum,
/// pe_sys, pe_sys_stderr, bits`.
pub fn cmd_ber(scenario: &Scenario) -> Result<Table, CliError> {
    let params = scenario.params();
    let config = scenario.config();
    let trial = scenario.trials.config();
    let mut table = Table::new(vec![
        "k",
        "ber_1",
        "ber_1_stderr",
        "ber_2",
        "ber_2_stderr",
        "pe_max",
        "pe_sum",
        "pe_sys",
        "pe_sys_stderr",
        "bits",
    ]);
    let constellation = Constellation::new(scenario.modulation.order)?;
    for k in 0..=scenario.sweep.k_max {
        let (ber, joint) = match config.protocol {
            Protocol::Af => {
                let sim = simulate_af(&params, &config, k, &constellation, &trial);
                (sim.ber, sim.joint)
            }
            Protocol::Df => {
                let sim = simulate_df(&params, &config, k, &scenario.df_settings(), &trial)?;
                (sim.ber, sim.joint)
            }
        };
        let mut row = vec![Cell::Int(k as u64)];
        row.extend(ber_cells(&ber, &joint));
        table.push(row);
    }
    Ok(table)
}

/// Starter decision regions at the scenario's round count. One `cell` row
/// per grid point and ratio, then one `boundary` row per boundary point.
///
/// Columns: `kind, ratio_db, n1, n2, winner, rate_diff`, where `rate_diff`
/// is the rate with receiver 1 starting minus the rate with receiver 2
/// starting.
pub fn cmd_regions(scenario: &Scenario) -> Result<Table, CliError> {
    let params = scenario.params();
    let template = scenario.config();
    let map = decision_regions(
        &params,
        &template,
        scenario.cooperation.rounds,
        &scenario.sweep.n1,
        &scenario.sweep.n2,
        &scenario.sweep.ratios_db,
    );
    let mut table = Table::new(vec!["kind", "ratio_db", "n1", "n2", "winner", "rate_diff"]);
    let k = scenario.cooperation.rounds;
    for curve in &map.curves {
        for (i, &n1) in map.n1_axis.iter().enumerate() {
            for (j, &n2) in map.n2_axis.iter().enumerate() {
                table.push(vec![
                    Cell::Text("cell".into()),
                    Cell::Real(curve.ratio_db),
                    Cell::Real(n1),
                    Cell::Real(n2),
                    Cell::Text(curve.winners[i][j].label().into()),
                    finite(curve.rate_diff[i][j], "rate difference", k)?,
                ]);
            }
        }
    }
    for curve in &map.curves {
        for &(n1, n2) in &curve.boundary {
            table.push(vec![
                Cell::Text("boundary".into()),
                Cell::Real(curve.ratio_db),
                Cell::Real(n1),
                Cell::Real(n2),
                Cell::Empty,
                Cell::Empty,
            ]);
        }
    }
    Ok(table)
}

/// AF with both strategies against DF, per round count, on the scenario's
/// scheme. AF uses the scenario's regime; DF keeps the downlink width.
///
/// Columns: `k, af_s1_ber_1, af_s1_ber_2, af_s1_pe_max, af_s1_rate,
/// af_s2_ber_1, af_s2_ber_2, af_s2_pe_max, af_s2_rate, df_ber_1, df_ber_2,
/// df_pe_max`.
pub fn cmd_compare(scenario: &Scenario) -> Result<Table, CliError> {
    let params = scenario.params();
    let base = scenario.config();
    let trial = scenario.trials.config();
    let constellation = Constellation::new(scenario.modulation.order)?;
    let mut table = Table::new(vec![
        "k",
        "af_s1_ber_1",
        "af_s1_ber_2",
        "af_s1_pe_max",
        "af_s1_rate",
        "af_s2_ber_1",
        "af_s2_ber_2",
        "af_s2_pe_max",
        "af_s2_rate",
        "df_ber_1",
        "df_ber_2",
        "df_pe_max",
    ]);
    for k in 0..=scenario.sweep.k_max {
        let mut row = vec![Cell::Int(k as u64)];
        for strategy in [Strategy::ForwardCombined, Strategy::ForwardDownlink] {
            let mut config = base;
            config.protocol = Protocol::Af;
            config.strategy = strategy;
            let sim = simulate_af(&params, &config, k, &constellation, &trial);
            let rate = rate_af(&sim.trajectory.plan, sim.trajectory.final_rho());
            row.push(Cell::Real(sim.ber[0].ber));
            row.push(Cell::Real(sim.ber[1].ber));
            row.push(Cell::Real(sim.ber[0].ber.max(sim.ber[1].ber)));
            row.push(finite(rate, "rate", k)?);
        }
        let mut config = base;
        config.protocol = Protocol::Df;
        let sim = simulate_df(&params, &config, k, &scenario.df_settings(), &trial)?;
        row.push(Cell::Real(sim.ber[0].ber));
        row.push(Cell::Real(sim.ber[1].ber));
        row.push(Cell::Real(sim.ber[0].ber.max(sim.ber[1].ber)));
        table.push(row);
    }
    Ok(table)
}
