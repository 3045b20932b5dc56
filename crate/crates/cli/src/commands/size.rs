use clap::ValueEnum;
use hashlotto::par;
use hashlotto::risk_direct::{
    cv_min_fleet, quantile_min_fleet_exact_with, quantile_min_fleet_normal, RiskSpec,
};
use hashlotto::risk_pool::{
    cv_min_pool_allocation, quantile_min_pool_allocation_exact_with, quantile_min_pool_allocation_normal,
    PoolFacility,
};
use hashlotto::scenario::{PoolPreset, Scenario};
use hashlotto::{Exec, HashProbability};

use super::num;
use crate::error::CliError;
use crate::Context;

pub const CSV_HEADER: [&str; 8] = [
    "mode",
    "theta",
    "alpha",
    "beta",
    "facility_machines",
    "m_min",
    "n_min_hashes",
    "feasible",
];

const MAX_SWEEP_POINTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Cv,
    QuantileNormal,
    QuantileExact,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Cv => "cv",
            Mode::QuantileNormal => "quantile-normal",
            Mode::QuantileExact => "quantile-exact",
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Size the pooled share of a fixed facility instead of a direct fleet.
    #[arg(long)]
    pool: bool,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Facility size for --pool (default: fleet.machines).
    #[arg(long)]
    facility_machines: Option<u64>,
    /// Grid over one parameter: `theta|alpha|beta|facility_machines=lo:hi:step`.
    #[arg(long, value_name = "PARAM=LO:HI:STEP")]
    sweep: Option<String>,
    /// Pool payout 1.78e-22 BTC/hash.
    #[arg(long, conflicts_with = "r_pool_corrected")]
    r_pool_paper: bool,
    /// Pool payout recomputed from Riot 2022 output (about 1.81e-23 BTC/hash).
    #[arg(long)]
    r_pool_corrected: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub facility_machines: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub point: Point,
    pub m_min: u64,
    pub n_min_hashes: f64,
    pub feasible: bool,
}

impl Row {
    pub fn record(&self, mode: Mode) -> [String; 8] {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        [
            mode.name().to_string(),
            opt(self.point.theta),
            opt(self.point.alpha),
            opt(self.point.beta),
            self.point.facility_machines.map(|m| m.to_string()).unwrap_or_default(),
            self.m_min.to_string(),
            num(self.n_min_hashes),
            self.feasible.to_string(),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SweepParam {
    Theta,
    Alpha,
    Beta,
    FacilityMachines,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Sweep {
    param: SweepParam,
    lo: f64,
    hi: f64,
    step: f64,
    decimals: usize,
}

impl Sweep {
    fn parse(spec: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("--sweep expects PARAM=LO:HI:STEP, got {spec:?}"));
        let (name, range) = spec.split_once('=').ok_or_else(bad)?;
        let param = match name.trim() {
            "theta" => SweepParam::Theta,
            "alpha" => SweepParam::Alpha,
            "beta" => SweepParam::Beta,
            "facility_machines" | "facility-machines" => SweepParam::FacilityMachines,
            other => {
                return Err(CliError::Usage(format!(
                    "cannot sweep {other:?}; expected theta, alpha, beta or facility_machines"
                )))
            }
        };
        let fields: Vec<&str> = range.split(':').map(str::trim).collect();
        let parts: Vec<f64> = fields
            .iter()
            .map(|x| x.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let decimals = fields
            .iter()
            .map(|x| match x.split_once('.') {
                Some((_, frac)) if !x.contains(['e', 'E']) => frac.len(),
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        let [lo, hi, step] = parts[..] else {
            return Err(bad());
        };
        if !(step > 0.0 && lo.is_finite() && hi.is_finite() && hi >= lo) {
            return Err(CliError::Usage(format!("--sweep needs lo <= hi and step > 0, got {spec:?}")));
        }
        Ok(Sweep {
            param,
            lo,
            hi,
            step,
            decimals,
        })
    }

    /// `lo + i * step` for every `i` that stays at or below `hi`, rounded to
    /// the number of decimals written in the spec.
    fn values(&self) -> Result<Vec<f64>, CliError> {
        let span = (self.hi - self.lo) / self.step;
        let count = (span + 1e-9).floor() as usize + 1;
        if count > MAX_SWEEP_POINTS {
            return Err(CliError::Usage(format!("--sweep grid has {count} points (limit {MAX_SWEEP_POINTS})")));
        }
        let round = |v: f64| -> f64 {
            if self.decimals == 0 {
                v
            } else {
                format!("{v:.*}", self.decimals).parse().expect("formatted float")
            }
        };
        Ok((0..count).map(|i| round(self.lo + i as f64 * self.step)).collect())
    }

    fn apply(&self, base: Point, v: f64) -> Result<Point, CliError> {
        let mut p = base;
        match self.param {
            SweepParam::Theta => p.theta = Some(v),
            SweepParam::Alpha => p.alpha = Some(v),
            SweepParam::Beta => p.beta = Some(v),
            SweepParam::FacilityMachines => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(CliError::Usage(format!("facility_machines must be a whole number >= 1, got {v}")));
                }
                p.facility_machines = Some(v as u64);
            }
        }
        Ok(p)
    }
}

/// Everything a row needs besides its grid point.
pub struct Setup {
    pub mode: Mode,
    pub pool: bool,
    pub p: HashProbability,
    pub machine_hashes: f64,
    pub r_block: f64,
    pub r_pool: f64,
    pub exec: Exec,
}

impl Setup {
    pub fn from_scenario(s: &Scenario, mode: Mode, pool: bool, exec: Exec) -> Self {
        Setup {
            mode,
            pool,
            p: s.probability(),
            machine_hashes: s.machine_hashes(),
            r_block: s.market.r_block,
            r_pool: s.market.r_pool,
            exec,
        }
    }

    pub fn row(&self, point: Point) -> Result<Row, CliError> {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| CliError::Usage(format!("--mode {} needs --{flag} (or risk.{flag})", self.mode.name())))
        };
        let mh = self.machine_hashes;
        if !self.pool {
            let r = match self.mode {
                Mode::Cv => cv_min_fleet(&RiskSpec::cv(need(point.theta, "theta")?)?, self.p, mh),
                Mode::QuantileNormal => {
                    let spec = RiskSpec::quantile(need(point.alpha, "alpha")?, need(point.beta, "beta")?)?;
                    quantile_min_fleet_normal(&spec, self.p, mh)?
                }
                Mode::QuantileExact => {
                    let spec = RiskSpec::quantile(need(point.alpha, "alpha")?, need(point.beta, "beta")?)?;
                    quantile_min_fleet_exact_with(&spec, self.p, mh, self.exec)?
                }
            };
            return Ok(Row {
                point,
                m_min: r.m_min,
                n_min_hashes: r.h_min,
                feasible: true,
            });
        }
        let machines = point
            .facility_machines
            .ok_or_else(|| CliError::Usage("--pool needs --facility-machines (or fleet.machines)".into()))?;
        let fac = PoolFacility::new(machines, mh, self.r_block, self.r_pool)?;
        let r = match self.mode {
            Mode::Cv => cv_min_pool_allocation(&fac, need(point.theta, "theta")?, self.p)?,
            Mode::QuantileNormal => {
                quantile_min_pool_allocation_normal(&fac, need(point.alpha, "alpha")?, need(point.beta, "beta")?, self.p)?
            }
            Mode::QuantileExact => quantile_min_pool_allocation_exact_with(
                &fac,
                need(point.alpha, "alpha")?,
                need(point.beta, "beta")?,
                self.p,
                self.exec,
            )?,
        };
        Ok(Row {
            point,
            m_min: r.m_min,
            n_min_hashes: r.n_min,
            feasible: r.feasible,
        })
    }
}

fn check_flags(args: &Args) -> Result<(), CliError> {
    let conflict = |flag: &str| {
        Err(CliError::FlagConflict(format!(
            "--{flag} does not apply to --mode {}",
            args.mode.name()
        )))
    };
    match args.mode {
        Mode::Cv if args.alpha.is_some() => return conflict("alpha"),
        Mode::Cv if args.beta.is_some() => return conflict("beta"),
        Mode::QuantileNormal | Mode::QuantileExact if args.theta.is_some() => return conflict("theta"),
        _ => {}
    }
    if !args.pool && (args.facility_machines.is_some() || args.r_pool_paper || args.r_pool_corrected) {
        return Err(CliError::FlagConflict(
            "--facility-machines and --r-pool-* only apply with --pool".into(),
        ));
    }
    Ok(())
}

pub fn run(ctx: &Context, args: &Args) -> Result<(), CliError> {
    check_flags(args)?;
    let mut raw = ctx.raw.clone();
    if args.r_pool_paper {
        raw.set("pool.preset", PoolPreset::Paper.name())?;
    } else if args.r_pool_corrected {
        raw.set("pool.preset", PoolPreset::Corrected.name())?;
    }
    let s = raw.build()?;
    if args.pool && !s.has_pool_rate() {
        return Err(CliError::Usage(
            "--pool needs a pool rate: --r-pool-paper, --r-pool-corrected, or pool.* in the scenario".into(),
        ));
    }
    let setup = Setup::from_scenario(&s, args.mode, args.pool, ctx.exec);

    let base = match args.mode {
        Mode::Cv => Point {
            theta: args.theta.or(s.risk.theta),
            alpha: None,
            beta: None,
            facility_machines: None,
        },
        _ => Point {
            theta: None,
            alpha: args.alpha.or(s.risk.alpha),
            beta: args.beta.or(s.risk.beta),
            facility_machines: None,
        },
    };
    let base = Point {
        facility_machines: if args.pool { args.facility_machines.or(s.machines) } else { None },
        ..base
    };

    let points = match &args.sweep {
        None => vec![base],
        Some(spec) => {
            let sweep = Sweep::parse(spec)?;
            let relevant = match sweep.param {
                SweepParam::Theta => args.mode == Mode::Cv,
                SweepParam::Alpha | SweepParam::Beta => args.mode != Mode::Cv,
                SweepParam::FacilityMachines => args.pool,
            };
            if !relevant {
                return Err(CliError::FlagConflict(format!("--sweep {spec} does not apply to this mode")));
            }
            sweep
                .values()?
                .into_iter()
                .map(|v| sweep.apply(base, v))
                .collect::<Result<Vec<_>, _>>()?
        }
    };

    let rows = par::map(ctx.exec, &points, |pt| setup.row(*pt));
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    w.write_record(CSV_HEADER)?;
    let mut infeasible = false;
    for row in rows {
        let row = row?;
        infeasible |= !row.feasible;
        w.write_record(row.record(args.mode))?;
    }
    w.flush()?;
    if infeasible {
        return Err(CliError::Infeasible);
    }
    Ok(())
}
