use std::io::Write;

use clap::ValueEnum;
use hashlotto::chainparams::ChainParams;
use hashlotto::economics::{
    characteristic_hash_count, energy_cost, ev_per_hash, ev_per_th, expected_btc, expected_revenue,
    opportunity_cost, pooled_revenue, FleetPlan,
};
use hashlotto::scenario::ChainInput;

use super::{num, print_report, usd};
use crate::error::CliError;
use crate::Context;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

struct Line {
    quantity: &'static str,
    value: f64,
    unit: &'static str,
}

fn line(quantity: &'static str, value: f64, unit: &'static str) -> Line {
    Line { quantity, value, unit }
}

pub fn run(ctx: &Context, args: &Args) -> Result<(), CliError> {
    let s = ctx.scenario()?;
    let target = s.target();
    let r = s.market.r_block;
    let one = FleetPlan::direct(1, s.horizon_s);
    let revenue = expected_revenue(&one, &s.hardware, &s.market, &target);
    let cost = energy_cost(&one, &s.hardware, &s.market);

    let mut lines = vec![
        line("difficulty", ChainParams::mainnet().difficulty_from_target(&target).value(), ""),
        line("hash_probability", s.probability().value(), ""),
        line("ev_per_hash", ev_per_hash(&target, r), "BTC"),
        line("ev_per_th", ev_per_th(&target, r), "BTC"),
        line("hashes_per_btc", characteristic_hash_count(&target, r), "hashes"),
        line("machine_hashes", s.machine_hashes(), "hashes"),
        line("machine_revenue", revenue, "USD"),
        line("machine_energy_cost", cost, "USD"),
        line("machine_margin", revenue - cost, "USD"),
    ];
    if s.machines.is_some() {
        let plan = s.plan();
        let fleet_rev = expected_revenue(&plan, &s.hardware, &s.market, &target) + pooled_revenue(&plan, &s.hardware, &s.market);
        lines.push(line("fleet_machines", plan.machines as f64, "machines"));
        lines.push(line("fleet_revenue", fleet_rev, "USD"));
        lines.push(line("fleet_energy_cost", energy_cost(&plan, &s.hardware, &s.market), "USD"));
    }
    if let Some(realized) = s.realized_btc {
        let plan = FleetPlan::direct(s.plan().machines, s.horizon_s);
        lines.push(line("expected_btc", expected_btc(&plan, &s.hardware, &target, r), "BTC"));
        lines.push(line("realized_btc", realized, "BTC"));
        lines.push(line("opportunity_cost", opportunity_cost(realized, &plan, &s.hardware, &target, r), "BTC"));
    }
    if s.has_pool_rate() {
        lines.push(line("r_pool", s.market.r_pool, "BTC/hash"));
    }

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["quantity", "value", "unit"])?;
            w.write_record(["target", &target.to_string(), ""])?;
            for l in &lines {
                w.write_record([l.quantity, &num(l.value), l.unit])?;
            }
            w.flush()?;
        }
        Format::Text => {
            let mut rows = vec![("scenario".to_string(), ctx.scenario_name.clone())];
            if let ChainInput::Bits(b) = s.chain {
                rows.push(("bits".into(), b.to_string()));
            }
            rows.push(("target".into(), target.to_string()));
            for l in &lines {
                let v = match l.unit {
                    "USD" => usd(l.value),
                    "machines" => format!("{}", l.value),
                    "" => format!("{:.6e}", l.value),
                    unit => format!("{:.6e} {unit}", l.value),
                };
                rows.push((l.quantity.replace('_', " "), v));
            }
            print_report(&mut out, &rows)?;
            out.flush()?;
        }
    }
    Ok(())
}
