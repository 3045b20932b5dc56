//! Expected value, revenue and cost of a mining fleet, opportunity cost of
//! pooled mining, and network-average energy estimation.

use std::io::Read;

use serde::Deserialize;
use thiserror::Error;

use crate::chainparams::{success_probability, Target256};

pub const SECONDS_PER_YEAR: f64 = 365.0 * 86_400.0;
pub const HASHES_PER_TH: f64 = 1e12;
pub const JOULES_PER_KWH: f64 = 3.6e6;
pub const JOULES_PER_TWH: f64 = 3.6e15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EconError {
    #[error("{name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("efficiency table is empty")]
    EmptyTable,
    #[error("efficiency table dominance sums to {0}%, expected 100 +/- 0.5")]
    DominanceSumOutOfRange(f64),
    #[error("efficiency table row {row}: {message}")]
    Table { row: usize, message: String },
}

fn positive(name: &'static str, value: f64) -> Result<f64, EconError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(EconError::InvalidParameter {
            name,
            requirement: "positive and finite",
            value,
        })
    }
}

fn nonnegative(name: &'static str, value: f64) -> Result<f64, EconError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(EconError::InvalidParameter {
            name,
            requirement: "non-negative and finite",
            value,
        })
    }
}

/// Per-machine hash rate (TH/s) and energy intensity (J/TH).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardwareSpec {
    pub eta_h: f64,
    pub eta_e: f64,
}

impl HardwareSpec {
    pub fn new(eta_h: f64, eta_e: f64) -> Result<Self, EconError> {
        Ok(HardwareSpec {
            eta_h: positive("hardware.eta_h", eta_h)?,
            eta_e: positive("hardware.eta_e", eta_e)?,
        })
    }

    /// Antminer S19 class: 110 TH/s at 29.5 J/TH.
    pub fn s19() -> Self {
        HardwareSpec {
            eta_h: 110.0,
            eta_e: 29.5,
        }
    }

    pub fn kwh_per_th(&self) -> f64 {
        self.eta_e / JOULES_PER_KWH
    }

    /// Hashes one machine computes over `horizon_s` seconds.
    pub fn machine_hashes(&self, horizon_s: f64) -> f64 {
        self.eta_h * HASHES_PER_TH * horizon_s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarketParams {
    /// $/BTC
    pub p_btc: f64,
    /// $/kWh
    pub p_e: f64,
    /// BTC per block, fees excluded
    pub r_block: f64,
    /// BTC per pooled hash
    pub r_pool: f64,
}

impl MarketParams {
    pub fn new(p_btc: f64, p_e: f64, r_block: f64, r_pool: f64) -> Result<Self, EconError> {
        Ok(MarketParams {
            p_btc: nonnegative("market.p_btc", p_btc)?,
            p_e: nonnegative("market.p_e", p_e)?,
            r_block: positive("chain.r_block", r_block)?,
            r_pool: nonnegative("pool.r_pool", r_pool)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FleetPlan {
    pub machines: u64,
    pub horizon_s: f64,
    pub pooled_machines: u64,
}

impl FleetPlan {
    pub fn new(machines: u64, horizon_s: f64, pooled_machines: u64) -> Result<Self, EconError> {
        nonnegative("horizon_s", horizon_s)?;
        if pooled_machines > machines {
            return Err(EconError::InvalidParameter {
                name: "pooled_machines",
                requirement: "at most the machine count",
                value: pooled_machines as f64,
            });
        }
        Ok(FleetPlan {
            machines,
            horizon_s,
            pooled_machines,
        })
    }

    pub fn direct(machines: u64, horizon_s: f64) -> Self {
        FleetPlan {
            machines,
            horizon_s,
            pooled_machines: 0,
        }
    }

    pub fn direct_machines(&self) -> u64 {
        self.machines - self.pooled_machines
    }
}

/// Expected BTC of one hash, `p * R`.
pub fn ev_per_hash(target: &Target256, r_block: f64) -> f64 {
    success_probability(target).value() * r_block
}

pub fn ev_per_th(target: &Target256, r_block: f64) -> f64 {
    ev_per_hash(target, r_block) * HASHES_PER_TH
}

/// Hashes needed for one BTC in expectation, `2^256 / (target * R)`.
pub fn characteristic_hash_count(target: &Target256, r_block: f64) -> f64 {
    1.0 / ev_per_hash(target, r_block)
}

/// Total hashes `H = M * eta_h * T` (eta_h converted to H/s).
pub fn fleet_hashes(plan: &FleetPlan, hw: &HardwareSpec) -> f64 {
    plan.machines as f64 * hw.machine_hashes(plan.horizon_s)
}

/// Expected dollar revenue of the directly mining machines over the plan
/// horizon.
pub fn expected_revenue(
    plan: &FleetPlan,
    hw: &HardwareSpec,
    mkt: &MarketParams,
    target: &Target256,
) -> f64 {
    mkt.p_btc * ev_per_th(target, mkt.r_block) * hw.eta_h * plan.horizon_s * plan.direct_machines() as f64
}

/// Dollar payout of the pooled machines, `P_BTC * R' * N'`.
pub fn pooled_revenue(plan: &FleetPlan, hw: &HardwareSpec, mkt: &MarketParams) -> f64 {
    mkt.p_btc * mkt.r_pool * plan.pooled_machines as f64 * hw.machine_hashes(plan.horizon_s)
}

/// Electricity cost over the horizon; does not depend on mining luck.
pub fn energy_cost(plan: &FleetPlan, hw: &HardwareSpec, mkt: &MarketParams) -> f64 {
    hw.kwh_per_th() * hw.eta_h * plan.horizon_s * mkt.p_e * plan.machines as f64
}

pub fn expected_btc(plan: &FleetPlan, hw: &HardwareSpec, target: &Target256, r_block: f64) -> f64 {
    fleet_hashes(plan, hw) * success_probability(target).value() * r_block
}

/// Expected direct-mining BTC minus what was actually realized over the same
/// hashes. Negative when the realized payout beat expectation.
pub fn opportunity_cost(
    realized_btc: f64,
    plan: &FleetPlan,
    hw: &HardwareSpec,
    target: &Target256,
    r_block: f64,
) -> f64 {
    expected_btc(plan, hw, target, r_block) - realized_btc
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct EfficiencyTableRow {
    pub model: String,
    pub dominance_pct: f64,
    pub eff_j_per_gh: f64,
}

pub const EFFICIENCY_TABLE_HEADER: [&str; 3] = ["model", "dominance_pct", "eff_j_per_gh"];

/// Parse an efficiency table CSV. Row numbers in errors count the header as
/// row 1, matching what an editor shows.
pub fn read_efficiency_table<R: Read>(reader: R) -> Result<Vec<EfficiencyTableRow>, EconError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| EconError::Table {
        row: 1,
        message: e.to_string(),
    })?;
    if headers.iter().ne(EFFICIENCY_TABLE_HEADER.iter().copied()) {
        return Err(EconError::Table {
            row: 1,
            message: format!(
                "expected header `{}`, got `{}`",
                EFFICIENCY_TABLE_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<EfficiencyTableRow>().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| EconError::Table {
            row,
            message: e.to_string(),
        })?;
        if !(rec.dominance_pct.is_finite() && rec.dominance_pct >= 0.0) {
            return Err(EconError::Table {
                row,
                message: format!("dominance_pct must be >= 0, got {}", rec.dominance_pct),
            });
        }
        if !(rec.eff_j_per_gh.is_finite() && rec.eff_j_per_gh > 0.0) {
            return Err(EconError::Table {
                row,
                message: format!("eff_j_per_gh must be > 0, got {}", rec.eff_j_per_gh),
            });
        }
        rows.push(rec);
    }
    Ok(rows)
}

/// Dominance-weighted mean efficiency in J/TH. Normalizes by the weight sum,
/// so any uniform rescaling of the weights leaves it unchanged.
pub fn weighted_efficiency(table: &[EfficiencyTableRow]) -> Result<f64, EconError> {
    if table.is_empty() {
        return Err(EconError::EmptyTable);
    }
    let (num, den) = table.iter().fold((0.0, 0.0), |(n, d), r| {
        (n + r.dominance_pct * r.eff_j_per_gh, d + r.dominance_pct)
    });
    positive("dominance sum", den)?;
    Ok(num / den * 1000.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkEnergy {
    /// Hardware-only network average, J/TH.
    pub eta_net: f64,
    /// `pue * eta_net`, J/TH.
    pub eta_facility: f64,
    pub energy_twh: f64,
}

pub fn network_energy(
    table: &[EfficiencyTableRow],
    pue: f64,
    net_hashrate_ths: f64,
    horizon_s: f64,
) -> Result<NetworkEnergy, EconError> {
    if table.is_empty() {
        return Err(EconError::EmptyTable);
    }
    let total: f64 = table.iter().map(|r| r.dominance_pct).sum();
    if (total - 100.0).abs() > 0.5 {
        return Err(EconError::DominanceSumOutOfRange(total));
    }
    if !(pue.is_finite() && pue >= 1.0) {
        return Err(EconError::InvalidParameter {
            name: "pue",
            requirement: ">= 1",
            value: pue,
        });
    }
    nonnegative("net_hashrate", net_hashrate_ths)?;
    nonnegative("horizon_s", horizon_s)?;
    let eta_net = weighted_efficiency(table)?;
    let hardware_twh = eta_net * net_hashrate_ths * horizon_s / JOULES_PER_TWH;
    Ok(NetworkEnergy {
        eta_net,
        eta_facility: pue * eta_net,
        energy_twh: pue * hardware_twh,
    })
}
