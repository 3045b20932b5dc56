use std::io::Write;

use clap::ValueEnum;
use hashlotto::numerics::{binomial_tail_lt, mc_tail_estimate_with, McConfig, TailQuery};
use hashlotto::risk_direct::{quantile_min_fleet_exact_with, RiskSpec};
use hashlotto::risk_pool::{
    pool_shortfall_probability, quantile_min_pool_allocation_exact_with, upside_probability_pool, PoolFacility,
};
use hashlotto::{Exec, HashProbability};

use crate::error::CliError;
use crate::Context;

const N_SIGMA: f64 = 4.0;
const CORRUPTION: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Direct,
    Pool,
    All,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    /// Harness self-test: add 0.5 to alpha on the analytic side only, which
    /// must make the run fail.
    #[arg(long)]
    expect_fail: bool,
}

/// One analytic claim `P(X < k) = value` for `X ~ Binomial(n, p)`.
struct Claim {
    name: String,
    n: f64,
    p: f64,
    k_mc: f64,
    k_analytic: f64,
}

fn direct_claims(corrupt: f64, exec: Exec) -> Result<Vec<Claim>, CliError> {
    let p = HashProbability::new(1e-3).expect("valid");
    let mh = 1e4;
    let mut claims = Vec::new();
    for (alpha, beta) in [(0.9, 0.1), (0.8, 0.05), (0.95, 0.2)] {
        let r = quantile_min_fleet_exact_with(&RiskSpec::quantile(alpha, beta)?, p, mh, exec)?;
        for m in [r.m_min.saturating_sub(1), r.m_min] {
            if m == 0 {
                continue;
            }
            let n = m as f64 * mh;
            claims.push(Claim {
                name: format!("direct alpha={alpha} beta={beta} machines={m}"),
                n,
                p: p.value(),
                k_mc: alpha * (n * p.value()),
                k_analytic: (alpha + corrupt) * (n * p.value()),
            });
        }
    }
    let n = 20.0 * mh;
    claims.push(Claim {
        name: "direct upside alpha=1.1 machines=20".into(),
        n,
        p: p.value(),
        k_mc: 1.1 * (n * p.value()),
        k_analytic: (1.1 + corrupt) * (n * p.value()),
    });
    Ok(claims)
}

fn pool_facility() -> PoolFacility {
    PoolFacility::new(100, 1e3, 1.0, 1.2e-3).expect("valid")
}

fn pool_claims(corrupt: f64, exec: Exec) -> Result<Vec<Claim>, CliError> {
    let p = HashProbability::new(1e-3).expect("valid");
    let fac = pool_facility();
    let mut claims = Vec::new();
    for (alpha, beta) in [(0.9, 0.05), (0.85, 0.01)] {
        let r = quantile_min_pool_allocation_exact_with(&fac, alpha, beta, p, exec)?.require_feasible()?;
        for m in [r.m_min.checked_sub(1), Some(r.m_min)].into_iter().flatten() {
            let split = fac.split_machines(m);
            let direct = split.direct_hashes();
            if direct <= 0.0 {
                continue;
            }
            let shift = |a: f64| a * (direct * p.value()) + (a - 1.0) * split.n_pooled * split.r_pool / split.r_block;
            claims.push(Claim {
                name: format!("pool alpha={alpha} beta={beta} pooled={m}/{}", fac.machines),
                n: direct,
                p: p.value(),
                k_mc: shift(alpha),
                k_analytic: shift(alpha + corrupt),
            });
        }
    }
    Ok(claims)
}

struct Outcome {
    name: String,
    pass: bool,
    detail: String,
}

fn check(claim: &Claim, cfg: &McConfig, exec: Exec) -> Result<Outcome, CliError> {
    let analytic = if claim.k_analytic <= 0.0 {
        0.0
    } else {
        binomial_tail_lt(&TailQuery::new(claim.n, claim.p, claim.k_analytic)?)?
    };
    let est = mc_tail_estimate_with(&TailQuery::new(claim.n, claim.p, claim.k_mc)?, cfg, exec)?;
    Ok(Outcome {
        name: claim.name.clone(),
        pass: est.agrees_with(analytic, N_SIGMA),
        detail: format!(
            "analytic={analytic:.6} mc={:.6} stderr={:.2e} z={:+.2}",
            est.estimate,
            est.stderr,
            est.z_score(analytic)
        ),
    })
}

/// Full pooling leaves nothing random: the shortfall probability is zero
/// and the upside is a step at alpha = 1.
fn deterministic_pool_checks(corrupt: f64) -> Vec<Outcome> {
    let p = HashProbability::new(1e-3).expect("valid");
    let fac = pool_facility();
    let split = fac.split_machines(fac.machines);
    let mut out = Vec::new();
    for alpha in [0.5, 0.9, 1.0] {
        let a = alpha + corrupt;
        let short = pool_shortfall_probability(&split, p, a).unwrap_or(f64::NAN);
        let up = upside_probability_pool(&split, p, a);
        out.push(Outcome {
            name: format!("pool fully pooled alpha={alpha}"),
            pass: short == 0.0 && up == 1.0,
            detail: format!("shortfall={short} upside={up}"),
        });
    }
    out
}

pub fn run(ctx: &Context, args: &Args) -> Result<(), CliError> {
    let corrupt = if args.expect_fail { CORRUPTION } else { 0.0 };
    let cfg = McConfig {
        trials: args.trials,
        seed: args.seed,
    };
    let mut outcomes = Vec::new();
    if matches!(args.suite, Suite::Direct | Suite::All) {
        for c in direct_claims(corrupt, ctx.exec)? {
            outcomes.push(check(&c, &cfg, ctx.exec)?);
        }
    }
    if matches!(args.suite, Suite::Pool | Suite::All) {
        for c in pool_claims(corrupt, ctx.exec)? {
            outcomes.push(check(&c, &cfg, ctx.exec)?);
        }
        outcomes.extend(deterministic_pool_checks(corrupt));
    }

    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    for o in &outcomes {
        if !o.pass {
            failed += 1;
        }
        writeln!(out, "{} {}  {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail)?;
    }
    writeln!(
        out,
        "{} of {} checks passed (seed {}, {} trials, {N_SIGMA} sigma)",
        outcomes.len() - failed,
        outcomes.len(),
        args.seed,
        args.trials
    )?;
    out.flush()?;
    if failed > 0 {
        return Err(CliError::VerifyFailed {
            failed,
            total: outcomes.len(),
        });
    }
    Ok(())
}
