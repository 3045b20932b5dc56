use std::io::Write;

use hashlotto::economics::{energy_cost, expected_revenue, pooled_revenue, FleetPlan};
use hashlotto::risk_direct::{upside_probability, upside_probability_exact};
use hashlotto::risk_pool::{pool_shortfall_probability, upside_probability_pool, PoolFacility};

use super::{print_report, usd};
use crate::error::CliError;
use crate::Context;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Fleet size (default: fleet.machines).
    #[arg(long)]
    machines: Option<u64>,
    /// Machines in the pool (default: fleet.pooled_machines, else 0).
    #[arg(long)]
    pooled: Option<u64>,
    /// Revenue multiple of the mean to beat (default: risk.alpha).
    #[arg(long)]
    alpha: Option<f64>,
}

pub struct Upside {
    pub revenue_direct: f64,
    pub revenue_pooled: f64,
    pub cost: f64,
    pub revenue_threshold: f64,
    pub profit_threshold: f64,
    pub probability_normal: f64,
    pub probability_exact: f64,
}

pub fn evaluate(ctx: &Context, args: &Args) -> Result<(u64, u64, f64, Upside), CliError> {
    let s = ctx.scenario()?;
    let machines = args
        .machines
        .or(s.machines)
        .ok_or_else(|| CliError::Usage("upside needs --machines (or fleet.machines)".into()))?;
    let pooled = args.pooled.or(s.pooled_machines).unwrap_or(0);
    let alpha = args
        .alpha
        .or(s.risk.alpha)
        .ok_or_else(|| CliError::Usage("upside needs --alpha (or risk.alpha)".into()))?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(CliError::Usage(format!("--alpha must be positive, got {alpha}")));
    }
    let plan = FleetPlan::new(machines, s.horizon_s, pooled)?;
    if pooled > 0 && !s.has_pool_rate() {
        return Err(CliError::Usage("pooled machines need a pool rate (pool.* in the scenario)".into()));
    }
    let target = s.target();
    let p = s.probability();
    let revenue_direct = expected_revenue(&plan, &s.hardware, &s.market, &target);
    let revenue_pooled = pooled_revenue(&plan, &s.hardware, &s.market);
    let cost = energy_cost(&plan, &s.hardware, &s.market);
    let revenue_threshold = alpha * (revenue_direct + revenue_pooled);

    let (normal, exact) = if pooled == 0 {
        let h = machines as f64 * s.machine_hashes();
        (upside_probability(h, p, alpha), upside_probability_exact(h, p, alpha)?)
    } else {
        let fac = PoolFacility::new(machines, s.machine_hashes(), s.market.r_block, s.market.r_pool)?;
        let split = fac.split_machines(pooled);
        (
            upside_probability_pool(&split, p, alpha),
            1.0 - pool_shortfall_probability(&split, p, alpha)?,
        )
    };
    Ok((
        machines,
        pooled,
        alpha,
        Upside {
            revenue_direct,
            revenue_pooled,
            cost,
            revenue_threshold,
            profit_threshold: revenue_threshold - cost,
            probability_normal: normal,
            probability_exact: exact,
        },
    ))
}

pub fn run(ctx: &Context, args: &Args) -> Result<(), CliError> {
    let (machines, pooled, alpha, u) = evaluate(ctx, args)?;
    let rows = vec![
        ("machines".to_string(), format!("{machines} ({} direct, {pooled} pooled)", machines - pooled)),
        ("alpha".into(), alpha.to_string()),
        ("expected revenue".into(), usd(u.revenue_direct + u.revenue_pooled)),
        ("  direct".into(), usd(u.revenue_direct)),
        ("  pooled".into(), usd(u.revenue_pooled)),
        ("energy cost".into(), usd(u.cost)),
        ("revenue threshold".into(), usd(u.revenue_threshold)),
        ("profit threshold".into(), usd(u.profit_threshold)),
        ("probability (normal)".into(), format!("{:.4}%", 100.0 * u.probability_normal)),
        ("probability (exact)".into(), format!("{:.4}%", 100.0 * u.probability_exact)),
    ];
    let mut out = std::io::stdout().lock();
    print_report(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}
