use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use hashlotto::economics::{network_energy, read_efficiency_table, weighted_efficiency, SECONDS_PER_YEAR};
use hashlotto::scenario::{find_data_file, ConfigError};

use super::print_report;
use crate::error::CliError;

pub const DEFAULT_TABLE: &str = "network-efficiency.csv";

#[derive(clap::Args, Debug)]
pub struct Args {
    /// CSV with columns model,dominance_pct,eff_j_per_gh.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Power usage effectiveness of the facility (>= 1).
    #[arg(long, default_value_t = 1.0)]
    pue: f64,
    /// Network hash rate in TH/s; enables the total-energy line.
    #[arg(long)]
    net_hashrate: Option<f64>,
    #[arg(long, default_value_t = SECONDS_PER_YEAR)]
    horizon_s: f64,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let path = match &args.table {
        Some(p) => p.clone(),
        None => find_data_file(DEFAULT_TABLE)?,
    };
    let file = File::open(&path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let table = read_efficiency_table(file)?;
    let energy = network_energy(&table, args.pue, args.net_hashrate.unwrap_or(0.0), args.horizon_s)?;
    let mut rows = vec![
        ("table".to_string(), format!("{} ({} rows)", path.display(), table.len())),
        ("eta_net".into(), format!("{:.4} J/TH", weighted_efficiency(&table)?)),
        ("pue".into(), args.pue.to_string()),
        ("eta_facility".into(), format!("{:.4} J/TH", energy.eta_facility)),
    ];
    if args.net_hashrate.is_some() {
        rows.push(("energy".into(), format!("{:.3} TWh", energy.energy_twh)));
    }
    let mut out = std::io::stdout().lock();
    print_report(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}
