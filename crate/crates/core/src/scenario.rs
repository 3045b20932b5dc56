//! Scenario files: flat `key = value` text with dotted section names.
//!
//! ```text
//! # block 808,468
//! chain.bits = 0x1704ed7f
//! chain.r_block = 6.25
//! hardware.eta_h = 110
//! hardware.eta_e = 29.5
//! market.p_btc = 42265
//! market.p_e = 0.0885
//! ```
//!
//! Exactly one of `chain.bits` / `chain.difficulty` must be given.
//! `horizon_s` defaults to one year. The pool payout `R'` comes from
//! `pool.r_pool`, a `pool.preset` (`paper` or `corrected`), or the realized
//! pair `pool.realized_btc` + `pool.realized_machines`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::chainparams::{success_probability, ChainParams, CompactBits, Difficulty, HashProbability, Target256};
use crate::economics::{FleetPlan, HardwareSpec, MarketParams, SECONDS_PER_YEAR};
use crate::risk_pool::{r_pool_corrected, r_pool_from_realized, R_POOL_PAPER};

pub const SCENARIO_DIR_ENV: &str = "HASHLOTTO_SCENARIO_DIR";
pub const SCENARIO_EXT: &str = "conf";

const KNOWN_KEYS: &[&str] = &[
    "chain.bits",
    "chain.difficulty",
    "chain.r_block",
    "hardware.eta_h",
    "hardware.eta_e",
    "market.p_btc",
    "market.p_e",
    "horizon_s",
    "pool.r_pool",
    "pool.preset",
    "pool.realized_btc",
    "pool.realized_machines",
    "fleet.machines",
    "fleet.pooled_machines",
    "fleet.realized_btc",
    "risk.theta",
    "risk.alpha",
    "risk.beta",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{origin}:{line}: expected `key = value`, got {text:?}")]
    Syntax { origin: String, line: usize, text: String },
    #[error("{origin}:{line}: unknown key `{key}`")]
    UnknownKey { origin: String, line: usize, key: String },
    #[error("{origin}:{line}: `{key}` given twice")]
    DuplicateKey { origin: String, line: usize, key: String },
    #[error("missing `{key}`")]
    Missing { key: String },
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("`{first}` and `{second}` are mutually exclusive")]
    Conflict { first: String, second: String },
    #[error("no scenario named {name:?} (searched {searched})")]
    NotFound { name: String, searched: String },
}

impl ConfigError {
    fn invalid(key: &str, message: impl fmt::Display) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            message: message.to_string(),
        }
    }
}

/// Raw key/value pairs, in the order they can still be overridden.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawScenario {
    entries: BTreeMap<String, String>,
}

impl RawScenario {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut raw = RawScenario::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    origin: origin.to_string(),
                    line: line_no,
                    text: line.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax {
                    origin: origin.to_string(),
                    line: line_no,
                    text: line.to_string(),
                });
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    origin: origin.to_string(),
                    line: line_no,
                    key: key.to_string(),
                });
            }
            if raw.entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::DuplicateKey {
                    origin: origin.to_string(),
                    line: line_no,
                    key: key.to_string(),
                });
            }
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Replace (or add) a value. Setting one of a mutually exclusive pair
    /// drops the other, so an override of `chain.difficulty` replaces a
    /// file's `chain.bits`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                origin: "override".to_string(),
                line: 0,
                key: key.to_string(),
            });
        }
        let exclusive: &[&str] = match key {
            "chain.bits" => &["chain.difficulty"],
            "chain.difficulty" => &["chain.bits"],
            "pool.r_pool" => &["pool.preset", "pool.realized_btc", "pool.realized_machines"],
            "pool.preset" => &["pool.r_pool", "pool.realized_btc", "pool.realized_machines"],
            "pool.realized_btc" | "pool.realized_machines" => &["pool.r_pool", "pool.preset"],
            _ => &[],
        };
        for other in exclusive {
            self.entries.remove(*other);
        }
        self.entries.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::Missing { key: key.to_string() })
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key)
            .map(|v| parse_number(key, v))
            .transpose()
    }

    fn count(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.get(key)
            .map(|v| {
                let cleaned: String = v.chars().filter(|c| *c != ',' && *c != '_').collect();
                cleaned
                    .parse::<u64>()
                    .map_err(|_| ConfigError::invalid(key, format!("expected a whole number, got {v:?}")))
            })
            .transpose()
    }

    pub fn build(&self) -> Result<Scenario, ConfigError> {
        let chain = match (self.get("chain.bits"), self.get("chain.difficulty")) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Conflict {
                    first: "chain.bits".into(),
                    second: "chain.difficulty".into(),
                })
            }
            (Some(b), None) => ChainInput::Bits(b.parse().map_err(|e| ConfigError::invalid("chain.bits", e))?),
            (None, Some(d)) => {
                ChainInput::Difficulty(d.parse().map_err(|e| ConfigError::invalid("chain.difficulty", e))?)
            }
            (None, None) => {
                return Err(ConfigError::Missing {
                    key: "chain.bits or chain.difficulty".into(),
                })
            }
        };
        // Fail early on a target that cannot be formed.
        chain.target().map_err(|e| ConfigError::invalid(chain.key(), e))?;

        let need = |key: &str| -> Result<f64, ConfigError> {
            parse_number(key, self.require(key)?)
        };
        let hardware = HardwareSpec::new(need("hardware.eta_h")?, need("hardware.eta_e")?)
            .map_err(|e| ConfigError::invalid("hardware", e))?;
        let horizon_s = self.number("horizon_s")?.unwrap_or(SECONDS_PER_YEAR);
        positive("horizon_s", horizon_s)?;

        let r_pool = self.pool_rate(&hardware, horizon_s)?;
        let market = MarketParams::new(
            need("market.p_btc")?,
            need("market.p_e")?,
            need("chain.r_block")?,
            r_pool.map_or(0.0, |(r, _)| r),
        )
        .map_err(|e| ConfigError::invalid("market", e))?;

        let machines = self.count("fleet.machines")?;
        let pooled_machines = self.count("fleet.pooled_machines")?;
        if let (Some(m), Some(pm)) = (machines, pooled_machines) {
            if pm > m {
                return Err(ConfigError::invalid(
                    "fleet.pooled_machines",
                    format!("{pm} exceeds fleet.machines = {m}"),
                ));
            }
        }
        let realized_btc = self.number("fleet.realized_btc")?;
        if let Some(r) = realized_btc {
            nonnegative("fleet.realized_btc", r)?;
        }

        let risk = RiskInput {
            theta: self.number("risk.theta")?.map(|v| positive("risk.theta", v)).transpose()?,
            alpha: self.number("risk.alpha")?.map(|v| positive("risk.alpha", v)).transpose()?,
            beta: self
                .number("risk.beta")?
                .map(|v| {
                    if v > 0.0 && v < 1.0 {
                        Ok(v)
                    } else {
                        Err(ConfigError::invalid("risk.beta", format!("must lie in (0, 1), got {v}")))
                    }
                })
                .transpose()?,
        };

        Ok(Scenario {
            chain,
            hardware,
            market,
            horizon_s,
            r_pool_source: r_pool.map(|(_, s)| s),
            machines,
            pooled_machines,
            realized_btc,
            risk,
        })
    }

    fn pool_rate(&self, hw: &HardwareSpec, horizon_s: f64) -> Result<Option<(f64, PoolRateSource)>, ConfigError> {
        let direct = self.number("pool.r_pool")?;
        let preset = self.get("pool.preset");
        let realized = (self.number("pool.realized_btc")?, self.number("pool.realized_machines")?);
        let given = [direct.is_some(), preset.is_some(), realized.0.is_some() || realized.1.is_some()];
        if given.iter().filter(|g| **g).count() > 1 {
            return Err(ConfigError::Conflict {
                first: "pool.r_pool / pool.preset".into(),
                second: "pool.realized_*".into(),
            });
        }
        if let Some(r) = direct {
            return Ok(Some((nonnegative("pool.r_pool", r)?, PoolRateSource::Explicit)));
        }
        if let Some(name) = preset {
            let preset = name.parse::<PoolPreset>().map_err(|e| ConfigError::invalid("pool.preset", e))?;
            return Ok(Some((preset.r_pool(), PoolRateSource::Preset(preset))));
        }
        match realized {
            (None, None) => Ok(None),
            (Some(btc), Some(m)) => {
                let r = r_pool_from_realized(btc, m, hw, horizon_s)
                    .map_err(|e| ConfigError::invalid("pool.realized_btc", e))?;
                Ok(Some((r, PoolRateSource::Realized)))
            }
            (None, Some(_)) => Err(ConfigError::Missing {
                key: "pool.realized_btc".into(),
            }),
            (Some(_), None) => Err(ConfigError::Missing {
                key: "pool.realized_machines".into(),
            }),
        }
    }
}

impl fmt::Display for RawScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

fn parse_number(key: &str, value: &str) -> Result<f64, ConfigError> {
    let cleaned: String = value.chars().filter(|c| *c != ',' && *c != '_').collect();
    let v: f64 = cleaned
        .parse()
        .map_err(|_| ConfigError::invalid(key, format!("expected a number, got {value:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::invalid(key, format!("must be finite, got {value:?}")))
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::invalid(key, format!("must be positive, got {v}")))
    }
}

fn nonnegative(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::invalid(key, format!("must be non-negative, got {v}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChainInput {
    Bits(CompactBits),
    Difficulty(Difficulty),
}

impl ChainInput {
    fn key(&self) -> &'static str {
        match self {
            ChainInput::Bits(_) => "chain.bits",
            ChainInput::Difficulty(_) => "chain.difficulty",
        }
    }

    pub fn target(&self) -> Result<Target256, crate::chainparams::ChainError> {
        match self {
            ChainInput::Bits(b) => b.decode(),
            ChainInput::Difficulty(d) => ChainParams::mainnet().target_from_difficulty(*d),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoolPreset {
    Paper,
    Corrected,
}

impl PoolPreset {
    pub fn r_pool(self) -> f64 {
        match self {
            PoolPreset::Paper => R_POOL_PAPER,
            PoolPreset::Corrected => r_pool_corrected(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PoolPreset::Paper => "paper",
            PoolPreset::Corrected => "corrected",
        }
    }
}

impl std::str::FromStr for PoolPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" | "r-pool-paper" => Ok(PoolPreset::Paper),
            "corrected" | "r-pool-corrected" => Ok(PoolPreset::Corrected),
            other => Err(format!("unknown preset {other:?} (expected `paper` or `corrected`)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PoolRateSource {
    Explicit,
    Preset(PoolPreset),
    Realized,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RiskInput {
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub chain: ChainInput,
    pub hardware: HardwareSpec,
    /// `r_pool` is zero when the scenario names no pool rate.
    pub market: MarketParams,
    pub horizon_s: f64,
    pub r_pool_source: Option<PoolRateSource>,
    pub machines: Option<u64>,
    pub pooled_machines: Option<u64>,
    pub realized_btc: Option<f64>,
    pub risk: RiskInput,
}

impl Scenario {
    pub fn target(&self) -> Target256 {
        self.chain.target().expect("validated when built")
    }

    pub fn probability(&self) -> HashProbability {
        success_probability(&self.target())
    }

    pub fn machine_hashes(&self) -> f64 {
        self.hardware.machine_hashes(self.horizon_s)
    }

    pub fn has_pool_rate(&self) -> bool {
        self.r_pool_source.is_some()
    }

    /// Fleet plan from `fleet.machines` (default 1) and `fleet.pooled_machines`.
    pub fn plan(&self) -> FleetPlan {
        let machines = self.machines.unwrap_or(1);
        FleetPlan::new(machines, self.horizon_s, self.pooled_machines.unwrap_or(0))
            .expect("validated when built")
    }
}

/// Directories searched for named scenarios, in order.
pub fn scenario_search_path() -> Vec<PathBuf> {
    let mut dirs = Vec::new();
    if let Some(dir) = std::env::var_os(SCENARIO_DIR_ENV) {
        dirs.push(PathBuf::from(dir));
    }
    dirs.push(PathBuf::from("scenarios"));
    dirs.push(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios"));
    dirs
}

/// Resolve `name` as a file path, or as `<dir>/<name>.conf` along the search path.
pub fn find_scenario(name: &str) -> Result<PathBuf, ConfigError> {
    let direct = Path::new(name);
    if direct.is_file() {
        return Ok(direct.to_path_buf());
    }
    find_data_file(&format!("{name}.{SCENARIO_EXT}")).map_err(|e| match e {
        ConfigError::NotFound { searched, .. } => ConfigError::NotFound {
            name: name.to_string(),
            searched,
        },
        other => other,
    })
}

/// First `<dir>/<file>` along the search path.
pub fn find_data_file(file: &str) -> Result<PathBuf, ConfigError> {
    let dirs = scenario_search_path();
    for dir in &dirs {
        let candidate = dir.join(file);
        if candidate.is_file() {
            return Ok(candidate);
        }
    }
    Err(ConfigError::NotFound {
        name: file.to_string(),
        searched: dirs.iter().map(|d| d.display().to_string()).collect::<Vec<_>>().join(", "),
    })
}

pub fn load_scenario(name: &str) -> Result<Scenario, ConfigError> {
    RawScenario::load(&find_scenario(name)?)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "\
# comment line
chain.bits = 0x1704ed7f
chain.r_block = 6.25
hardware.eta_h = 110   # TH/s
hardware.eta_e = 29.5
market.p_btc = 42,265
market.p_e = 0.0885
";

    #[test]
    fn parses_a_minimal_scenario() {
        let s = RawScenario::parse(BASE, "base").unwrap().build().unwrap();
        assert_eq!(s.chain, ChainInput::Bits(CompactBits(0x1704ed7f)));
        assert_eq!(s.market.p_btc, 42_265.0);
        assert_eq!(s.horizon_s, SECONDS_PER_YEAR);
        assert_eq!(s.market.r_pool, 0.0);
        assert!(!s.has_pool_rate());
    }

    #[test]
    fn reports_field_paths() {
        let err = RawScenario::parse("chain.bits 0x1", "f.conf").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
        let err = RawScenario::parse("hardware.speed = 3", "f.conf").unwrap_err();
        assert_eq!(err.to_string(), "f.conf:1: unknown key `hardware.speed`");

        let mut raw = RawScenario::parse(BASE, "base").unwrap();
        raw.set("market.p_e", "-1").unwrap();
        let err = raw.build().unwrap_err();
        assert!(err.to_string().contains("market.p_e"), "{err}");

        let mut raw = RawScenario::parse(BASE, "base").unwrap();
        raw.set("hardware.eta_h", "fast").unwrap();
        assert_eq!(
            raw.build().unwrap_err(),
            ConfigError::invalid("hardware.eta_h", "expected a number, got \"fast\"")
        );
    }

    #[test]
    fn bits_and_difficulty_conflict() {
        let text = format!("{BASE}chain.difficulty = 1\n");
        let err = RawScenario::parse(&text, "x").unwrap().build().unwrap_err();
        assert!(matches!(err, ConfigError::Conflict { .. }));

        let mut raw = RawScenario::parse(BASE, "x").unwrap();
        raw.set("chain.difficulty", "1").unwrap();
        let s = raw.build().unwrap();
        assert_eq!(s.target(), ChainParams::mainnet().t1);
    }

    #[test]
    fn pool_rate_sources() {
        let mut raw = RawScenario::parse(BASE, "x").unwrap();
        raw.set("pool.preset", "paper").unwrap();
        assert_eq!(raw.build().unwrap().market.r_pool, R_POOL_PAPER);
        raw.set("pool.realized_btc", "5554").unwrap();
        assert_eq!(raw.build().unwrap_err(), ConfigError::Missing { key: "pool.realized_machines".into() });
        raw.set("pool.realized_machines", "88556").unwrap();
        let r = raw.build().unwrap().market.r_pool;
        assert!((r / r_pool_corrected() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let text = format!("{BASE}market.p_e = 0.1\n");
        assert!(matches!(
            RawScenario::parse(&text, "x"),
            Err(ConfigError::DuplicateKey { line: 8, .. })
        ));
    }

    #[test]
    fn display_round_trips() {
        let raw = RawScenario::parse(BASE, "x").unwrap();
        let again = RawScenario::parse(&raw.to_string(), "y").unwrap();
        assert_eq!(raw, again);
    }
}
