//! Fleet sizing for direct (solo) mining.
//!
//! A fleet computing `h` hashes over the horizon finds `X ~ Binomial(h, p)`
//! blocks. Sizing functions take the per-machine hash count over the horizon
//! (`HardwareSpec::machine_hashes`) and return both the continuous hash
//! requirement and the machine count obtained by rounding it up.

use crate::chainparams::HashProbability;
use crate::error::RiskError;
use crate::numerics::{binomial_tail_lt, std_normal_quantile, std_normal_sf, TailQuery};
use crate::par::{self, Exec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskSpec {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl RiskSpec {
    pub fn new(theta: f64, alpha: f64, beta: f64) -> Result<Self, RiskError> {
        positive("theta", theta)?;
        positive("alpha", alpha)?;
        if !(beta > 0.0 && beta < 1.0) {
            return Err(RiskError::InvalidParameter {
                name: "beta",
                requirement: "in (0, 1)",
                value: beta,
            });
        }
        Ok(RiskSpec { theta, alpha, beta })
    }

    pub fn cv(theta: f64) -> Result<Self, RiskError> {
        Self::new(theta, 0.5, 0.5)
    }

    pub fn quantile(alpha: f64, beta: f64) -> Result<Self, RiskError> {
        Self::new(1.0, alpha, beta)
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64, RiskError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(RiskError::InvalidParameter {
            name,
            requirement: "positive and finite",
            value,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SizingMethod {
    CvClosedForm,
    QuantileNormal,
    QuantileExact,
}

impl SizingMethod {
    pub fn name(self) -> &'static str {
        match self {
            SizingMethod::CvClosedForm => "cv",
            SizingMethod::QuantileNormal => "quantile-normal",
            SizingMethod::QuantileExact => "quantile-exact",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SizingResult {
    pub h_min: f64,
    pub m_min: u64,
    pub method: SizingMethod,
}

impl SizingResult {
    fn from_hashes(h_min: f64, machine_hashes: f64, method: SizingMethod) -> Self {
        SizingResult {
            h_min,
            m_min: machines_for(h_min, machine_hashes),
            method,
        }
    }
}

pub(crate) fn machines_for(hashes: f64, machine_hashes: f64) -> u64 {
    if hashes <= 0.0 {
        0
    } else {
        (hashes / machine_hashes).ceil() as u64
    }
}

/// Coefficient of variation of the block count, `sqrt((1-p) / (h p))`.
pub fn cv_value(h: f64, p: HashProbability) -> Result<f64, RiskError> {
    if h.is_nan() || h <= 0.0 {
        return Err(RiskError::NonPositiveHashes(h));
    }
    let p = p.value();
    Ok(((1.0 - p) / (h * p)).sqrt())
}

pub fn cv_min_fleet(spec: &RiskSpec, p: HashProbability, machine_hashes: f64) -> SizingResult {
    let p = p.value();
    let h_min = (1.0 - p) / (spec.theta * spec.theta * p);
    SizingResult::from_hashes(h_min, machine_hashes, SizingMethod::CvClosedForm)
}

fn check_alpha(alpha: f64) -> Result<(), RiskError> {
    if alpha < 1.0 {
        Ok(())
    } else {
        Err(RiskError::AlphaNotBelowOne(alpha))
    }
}

/// `h > z^2 (1-p) / ((1-alpha)^2 p)`.
pub fn quantile_min_fleet_normal(
    spec: &RiskSpec,
    p: HashProbability,
    machine_hashes: f64,
) -> Result<SizingResult, RiskError> {
    check_alpha(spec.alpha)?;
    let method = SizingMethod::QuantileNormal;
    if spec.beta >= 0.5 {
        log::warn!("beta = {} >= 0.5 imposes no constraint; returning zero", spec.beta);
        return Ok(SizingResult::from_hashes(0.0, machine_hashes, method));
    }
    let z = std_normal_quantile(spec.beta)?;
    let p = p.value();
    let gap = 1.0 - spec.alpha;
    let h_min = z * z * (1.0 - p) / (gap * gap * p);
    Ok(SizingResult::from_hashes(h_min, machine_hashes, method))
}

/// `P(X < alpha * h * p)` for `X ~ Binomial(h, p)`.
pub fn shortfall_probability(h: f64, p: HashProbability, alpha: f64) -> Result<f64, RiskError> {
    let q = TailQuery::new(h, p.value(), alpha * (h * p.value()))?;
    Ok(binomial_tail_lt(&q)?)
}

pub fn quantile_min_fleet_exact(
    spec: &RiskSpec,
    p: HashProbability,
    machine_hashes: f64,
) -> Result<SizingResult, RiskError> {
    quantile_min_fleet_exact_with(spec, p, machine_hashes, Exec::default())
}

/// Smallest machine count `M` with `P(X < alpha n p) < beta`, `n = M * machine_hashes`.
///
/// The tail is not monotone in `M` (it jumps each time `ceil(alpha n p)`
/// steps), so this is an ordered scan for the first crossing over
/// `[1, max(4 * normal estimate, 64)]`.
pub fn quantile_min_fleet_exact_with(
    spec: &RiskSpec,
    p: HashProbability,
    machine_hashes: f64,
    exec: Exec,
) -> Result<SizingResult, RiskError> {
    let normal = quantile_min_fleet_normal(spec, p, machine_hashes)?;
    let method = SizingMethod::QuantileExact;
    if spec.beta >= 0.5 {
        return Ok(SizingResult::from_hashes(0.0, machine_hashes, method));
    }
    let upper = normal.m_min.saturating_mul(4).max(64);
    let tail = |m: u64| shortfall_probability(m as f64 * machine_hashes, p, spec.alpha);
    let found = par::find_first(exec, 1..upper + 1, |m| match tail(m) {
        Ok(t) => t < spec.beta,
        Err(_) => true,
    })
    .ok_or(RiskError::SearchBoundsExceeded { upper })?;
    // An evaluation error above stops the scan; surface it here.
    tail(found)?;
    Ok(SizingResult {
        h_min: found as f64 * machine_hashes,
        m_min: found,
        method,
    })
}

/// Normal approximation to `P(X >= alpha h p)`.
pub fn upside_probability(h: f64, p: HashProbability, alpha: f64) -> f64 {
    let p = p.value();
    std_normal_sf((alpha - 1.0) * (h * p / (1.0 - p)).sqrt())
}

/// `P(X >= alpha h p)` from the binomial tail.
pub fn upside_probability_exact(h: f64, p: HashProbability, alpha: f64) -> Result<f64, RiskError> {
    Ok(1.0 - shortfall_probability(h, p, alpha)?)
}

/// Normal approximation to `P(usd_per_block * X >= x)`.
pub fn revenue_exceedance(h: f64, p: HashProbability, usd_per_block: f64, x: f64) -> f64 {
    let p = p.value();
    let mean = h * p;
    let sd = (h * p * (1.0 - p)).sqrt();
    std_normal_sf((x / usd_per_block - mean) / sd)
}

/// `P(revenue - cost >= y)`. The cost is deterministic, so this is the
/// revenue exceedance at `y + cost`.
pub fn profit_exceedance(h: f64, p: HashProbability, usd_per_block: f64, cost: f64, y: f64) -> f64 {
    revenue_exceedance(h, p, usd_per_block, y + cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prob(p: f64) -> HashProbability {
        HashProbability::new(p).unwrap()
    }

    #[test]
    fn cv_unit_point_and_scaling() {
        let p = prob(1e-3);
        let h = (1.0 - 1e-3) / 1e-3;
        assert!((cv_value(h, p).unwrap() - 1.0).abs() < 1e-12);
        let ratio = cv_value(4.0 * h, p).unwrap() / cv_value(h, p).unwrap();
        assert!((ratio - 0.5).abs() < 1e-12);
        assert_eq!(cv_value(0.0, p), Err(RiskError::NonPositiveHashes(0.0)));
    }

    #[test]
    fn cv_min_fleet_trivial_case() {
        let r = cv_min_fleet(&RiskSpec::cv(1.0).unwrap(), prob(0.5), 1.0);
        assert_eq!(r.h_min, 1.0);
        assert_eq!(r.m_min, 1);
    }

    #[test]
    fn cv_min_fleet_inverts_cv_value() {
        let p = prob(4e-24);
        for theta in [0.01, 0.05, 0.3] {
            let r = cv_min_fleet(&RiskSpec::cv(theta).unwrap(), p, 3.5e21);
            assert!((cv_value(r.h_min, p).unwrap() / theta - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn normal_sizing_rejects_alpha_one_and_handles_median() {
        let p = prob(1e-3);
        let spec = RiskSpec::quantile(1.0, 0.1).unwrap();
        assert_eq!(
            quantile_min_fleet_normal(&spec, p, 1e4),
            Err(RiskError::AlphaNotBelowOne(1.0))
        );
        let spec = RiskSpec::quantile(0.9, 0.5).unwrap();
        let r = quantile_min_fleet_normal(&spec, p, 1e4).unwrap();
        assert_eq!((r.h_min, r.m_min), (0.0, 0));
    }

    #[test]
    fn exact_sizing_is_a_first_crossing() {
        let p = prob(1e-3);
        let spec = RiskSpec::quantile(0.9, 0.1).unwrap();
        let r = quantile_min_fleet_exact(&spec, p, 1e4).unwrap();
        let tail = |m: u64| shortfall_probability(m as f64 * 1e4, p, 0.9).unwrap();
        assert!(tail(r.m_min) < 0.1);
        for m in 1..r.m_min {
            assert!(tail(m) >= 0.1, "m = {m}");
        }
    }

    #[test]
    fn upside_limits() {
        let p = prob(1e-3);
        assert_eq!(upside_probability(1e5, p, 1.0), 0.5);
        assert!(upside_probability(1e5, p, 50.0) < 1e-12);
        assert!(upside_probability(1e5, p, 1e-9) > 0.999);
    }

    #[test]
    fn profit_is_shifted_revenue() {
        let p = prob(1e-3);
        let (h, usd, cost) = (2e5, 1000.0, 150.0);
        for y in [-100.0, 0.0, 30.0, 55.5] {
            assert_eq!(
                profit_exceedance(h, p, usd, cost, y),
                revenue_exceedance(h, p, usd, y + cost)
            );
        }
        let mean = h * 1e-3 * usd;
        let up = upside_probability(h, p, 1.2);
        assert!((revenue_exceedance(h, p, usd, 1.2 * mean) - up).abs() < 1e-12);
    }
}
