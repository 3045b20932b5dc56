use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hashlotto::scenario::{find_scenario, RawScenario, Scenario};
use hashlotto::Exec;

mod commands;
mod error;

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "hashlotto", version, about = "Risk-constrained sizing for proof-of-work mining")]
struct Cli {
    /// Scenario name (looked up in $HASHLOTTO_SCENARIO_DIR, ./scenarios) or file path.
    #[arg(short, long, global = true, default_value = "calibration-2023")]
    scenario: String,

    /// Override a scenario entry, e.g. `--set market.p_btc=30000`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Run searches, sweeps and simulations on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Target, hash probability, expected revenue and energy cost per machine.
    Calibrate(commands::calibrate::Args),
    /// Minimum fleet or pooled allocation under a risk constraint (CSV).
    Size(commands::size::Args),
    /// Probability that revenue (and net profit) beats alpha times its mean.
    Upside(commands::upside::Args),
    /// Monte Carlo check of the analytic tail probabilities.
    Verify(commands::verify::Args),
    /// Network-average efficiency and energy use from a machine table.
    Energy(commands::energy::Args),
}

pub struct Context {
    pub scenario_name: String,
    pub raw: RawScenario,
    pub exec: Exec,
}

impl Context {
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        Ok(self.raw.build()?)
    }
}

fn load_context(cli: &Cli) -> Result<Context, CliError> {
    let path = find_scenario(&cli.scenario)?;
    log::debug!("scenario {}", path.display());
    let mut raw = RawScenario::load(&path)?;
    for item in &cli.overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {item:?}")))?;
        raw.set(key.trim(), value)?;
    }
    Ok(Context {
        scenario_name: cli.scenario.clone(),
        raw,
        exec: if cli.sequential { Exec::Sequential } else { Exec::default() },
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Energy(args) = &cli.command {
        return commands::energy::run(args);
    }
    let ctx = load_context(&cli)?;
    match &cli.command {
        Command::Calibrate(args) => commands::calibrate::run(&ctx, args),
        Command::Size(args) => commands::size::run(&ctx, args),
        Command::Upside(args) => commands::upside::run(&ctx, args),
        Command::Verify(args) => commands::verify::run(&ctx, args),
        Command::Energy(_) => unreachable!(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
