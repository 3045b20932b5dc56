//! Partial pooling.
//!
//! Of a facility's `H'` hashes, `N'` go to a pool that pays a fixed `R'` BTC
//! per hash and the remaining `H' - N'` mine directly, so the BTC return is
//! `N' R' + R X'` with `X' ~ Binomial(H' - N', p)`.

use crate::chainparams::HashProbability;
use crate::economics::{HardwareSpec, SECONDS_PER_YEAR};
use crate::error::RiskError;
use crate::numerics::{binomial_tail_lt, std_normal_quantile, std_normal_sf, TailQuery};
use crate::par::{self, Exec};
use crate::risk_direct::{machines_for, positive};

/// Pool payout per hash as printed alongside the 10,000-machine example.
pub const R_POOL_PAPER: f64 = 1.78e-22;

/// Riot Platforms 2022: BTC mined and average deployed S19-class machines.
pub const RIOT_2022_BTC: f64 = 5554.0;
pub const RIOT_2022_MACHINES: f64 = 88_556.0;

/// `R' = realized_btc / (machines * machine_hashes)`.
pub fn r_pool_from_realized(
    realized_btc: f64,
    machines: f64,
    hw: &HardwareSpec,
    horizon_s: f64,
) -> Result<f64, RiskError> {
    positive("realized_btc", realized_btc)?;
    positive("machines", machines)?;
    positive("horizon_s", horizon_s)?;
    Ok(realized_btc / (machines * hw.machine_hashes(horizon_s)))
}

/// `R'` recomputed from the Riot 2022 figures (about 1.81e-23 BTC/hash).
pub fn r_pool_corrected() -> f64 {
    r_pool_from_realized(RIOT_2022_BTC, RIOT_2022_MACHINES, &HardwareSpec::s19(), SECONDS_PER_YEAR)
        .expect("positive constants")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoolSplit {
    pub h_total: f64,
    pub n_pooled: f64,
    pub r_pool: f64,
    pub r_block: f64,
}

impl PoolSplit {
    pub fn new(h_total: f64, n_pooled: f64, r_pool: f64, r_block: f64) -> Result<Self, RiskError> {
        positive("h_total", h_total)?;
        positive("r_block", r_block)?;
        if !(n_pooled >= 0.0 && n_pooled <= h_total) {
            return Err(RiskError::InvalidParameter {
                name: "n_pooled",
                requirement: "in [0, h_total]",
                value: n_pooled,
            });
        }
        if !(r_pool >= 0.0 && r_pool.is_finite()) {
            return Err(RiskError::InvalidParameter {
                name: "r_pool",
                requirement: "non-negative and finite",
                value: r_pool,
            });
        }
        Ok(PoolSplit {
            h_total,
            n_pooled,
            r_pool,
            r_block,
        })
    }

    pub fn direct_hashes(&self) -> f64 {
        self.h_total - self.n_pooled
    }
}

/// Mean and standard deviation of the BTC return.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoolMoments {
    pub mean: f64,
    pub std: f64,
}

pub fn pool_moments(split: &PoolSplit, p: HashProbability) -> PoolMoments {
    let p = p.value();
    let direct = split.direct_hashes();
    PoolMoments {
        mean: split.r_pool * split.n_pooled + split.r_block * direct * p,
        std: split.r_block * (direct * p * (1.0 - p)).sqrt(),
    }
}

/// Normal approximation to `P(return >= alpha * mean)`.
pub fn upside_probability_pool(split: &PoolSplit, p: HashProbability, alpha: f64) -> f64 {
    let direct = split.direct_hashes();
    if direct <= 0.0 {
        return if alpha <= 1.0 { 1.0 } else { 0.0 };
    }
    let p = p.value();
    let scaled_mean = direct * p + split.n_pooled * split.r_pool / split.r_block;
    std_normal_sf((alpha - 1.0) * scaled_mean / (direct * p * (1.0 - p)).sqrt())
}

/// `P(return < alpha * mean)` from the binomial tail of the direct part.
pub fn pool_shortfall_probability(split: &PoolSplit, p: HashProbability, alpha: f64) -> Result<f64, RiskError> {
    let direct = split.direct_hashes();
    let k = alpha * (direct * p.value()) + (alpha - 1.0) * split.n_pooled * split.r_pool / split.r_block;
    if k <= 0.0 {
        return Ok(0.0);
    }
    if direct <= 0.0 {
        return Ok(1.0);
    }
    let q = TailQuery::new(direct, p.value(), k)?;
    Ok(binomial_tail_lt(&q)?)
}

/// A facility of `machines` identical machines, each contributing
/// `machine_hashes` hashes over the horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoolFacility {
    pub machines: u64,
    pub machine_hashes: f64,
    pub r_block: f64,
    pub r_pool: f64,
}

impl PoolFacility {
    pub fn new(machines: u64, machine_hashes: f64, r_block: f64, r_pool: f64) -> Result<Self, RiskError> {
        if machines == 0 {
            return Err(RiskError::InvalidParameter {
                name: "machines",
                requirement: "at least 1",
                value: 0.0,
            });
        }
        positive("machine_hashes", machine_hashes)?;
        PoolSplit::new(machine_hashes, 0.0, r_pool, r_block)?;
        Ok(PoolFacility {
            machines,
            machine_hashes,
            r_block,
            r_pool,
        })
    }

    pub fn h_total(&self) -> f64 {
        self.machines as f64 * self.machine_hashes
    }

    /// Split with `n_pooled` hashes in the pool, clamped to `[0, H']`.
    pub fn split(&self, n_pooled: f64) -> PoolSplit {
        let h = self.h_total();
        PoolSplit {
            h_total: h,
            n_pooled: n_pooled.clamp(0.0, h),
            r_pool: self.r_pool,
            r_block: self.r_block,
        }
    }

    /// Split with `pooled_machines` whole machines in the pool. The direct
    /// part is an exact machine multiple, so it is zero at full pooling.
    pub fn split_machines(&self, pooled_machines: u64) -> PoolSplit {
        let pooled = pooled_machines.min(self.machines);
        let n_pooled = pooled as f64 * self.machine_hashes;
        let direct = (self.machines - pooled) as f64 * self.machine_hashes;
        PoolSplit {
            h_total: n_pooled + direct,
            n_pooled,
            r_pool: self.r_pool,
            r_block: self.r_block,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AllocationResult {
    pub n_min: f64,
    pub m_min: u64,
    /// `(a, b, c)` of `a N^2 + b N + c > 0`; `None` for the exact search.
    pub coefficients: Option<(f64, f64, f64)>,
    pub feasible: bool,
}

impl AllocationResult {
    fn zero(coefficients: Option<(f64, f64, f64)>) -> Self {
        AllocationResult {
            n_min: 0.0,
            m_min: 0,
            coefficients,
            feasible: true,
        }
    }

    fn infeasible(fac: &PoolFacility, coefficients: Option<(f64, f64, f64)>) -> Self {
        AllocationResult {
            n_min: fac.h_total(),
            m_min: fac.machines,
            coefficients,
            feasible: false,
        }
    }

    pub fn require_feasible(self) -> Result<Self, RiskError> {
        if self.feasible {
            Ok(self)
        } else {
            Err(RiskError::InfeasibleAllocation)
        }
    }
}

/// Boundary of `a N^2 + b N + c > 0` above which the inequality holds,
/// given `c < 0`.
fn upper_root(a: f64, b: f64, c: f64) -> f64 {
    if a == 0.0 {
        return -c / b;
    }
    let disc = b * b - 4.0 * a * c;
    assert!(disc >= 0.0, "negative discriminant with a = {a}, c = {c}");
    let s = disc.sqrt();
    if b >= 0.0 {
        (-2.0 * c) / (b + s)
    } else {
        (s - b) / (2.0 * a)
    }
}

fn finish(fac: &PoolFacility, n: f64, coeffs: (f64, f64, f64), p: HashProbability) -> AllocationResult {
    if n.is_nan() {
        return AllocationResult::infeasible(fac, Some(coeffs));
    }
    let n = n.max(0.0);
    let h = fac.h_total();
    if n > h || pool_moments(&fac.split(n), p).mean <= 0.0 {
        return AllocationResult::infeasible(fac, Some(coeffs));
    }
    AllocationResult {
        n_min: n,
        m_min: machines_for(n, fac.machine_hashes),
        coefficients: Some(coeffs),
        feasible: true,
    }
}

/// CV of the return for a given pooled amount.
pub fn pool_cv(split: &PoolSplit, p: HashProbability) -> f64 {
    let m = pool_moments(split, p);
    m.std / m.mean
}

/// Smallest `N'` with `CV(N') <= theta`.
pub fn cv_min_pool_allocation(fac: &PoolFacility, theta: f64, p: HashProbability) -> Result<AllocationResult, RiskError> {
    positive("theta", theta)?;
    let (h, r, rp) = (fac.h_total(), fac.r_block, fac.r_pool);
    let pv = p.value();
    let t2 = theta * theta;
    let d = rp - r * pv;
    let a = t2 * d * d;
    let b = 2.0 * t2 * r * pv * h * d + r * r * pv * (1.0 - pv);
    let c = t2 * r * r * pv * pv * h * h - r * r * pv * (1.0 - pv) * h;
    if c >= 0.0 {
        return Ok(AllocationResult::zero(Some((a, b, c))));
    }
    Ok(finish(fac, upper_root(a, b, c), (a, b, c), p))
}

/// Smallest `N'` meeting the normal-approximation quantile constraint.
pub fn quantile_min_pool_allocation_normal(
    fac: &PoolFacility,
    alpha: f64,
    beta: f64,
    p: HashProbability,
) -> Result<AllocationResult, RiskError> {
    check_quantile_spec(alpha, beta)?;
    if beta >= 0.5 {
        log::warn!("beta = {beta} >= 0.5 imposes no constraint; returning zero");
        return Ok(AllocationResult::zero(None));
    }
    let z = std_normal_quantile(beta)?;
    let (h, r, rp) = (fac.h_total(), fac.r_block, fac.r_pool);
    let pv = p.value();
    let g2 = (1.0 - alpha) * (1.0 - alpha);
    let d = rp - r * pv;
    let a = g2 * d * d / (r * r);
    let b = 2.0 * g2 * h * pv * d / r + z * z * pv * (1.0 - pv);
    let c = g2 * pv * pv * h * h - z * z * pv * (1.0 - pv) * h;
    if c >= 0.0 {
        return Ok(AllocationResult::zero(Some((a, b, c))));
    }
    Ok(finish(fac, upper_root(a, b, c), (a, b, c), p))
}

fn check_quantile_spec(alpha: f64, beta: f64) -> Result<(), RiskError> {
    positive("alpha", alpha)?;
    if alpha >= 1.0 {
        return Err(RiskError::AlphaNotBelowOne(alpha));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(RiskError::InvalidParameter {
            name: "beta",
            requirement: "in (0, 1)",
            value: beta,
        });
    }
    Ok(())
}

pub fn quantile_min_pool_allocation_exact(
    fac: &PoolFacility,
    alpha: f64,
    beta: f64,
    p: HashProbability,
) -> Result<AllocationResult, RiskError> {
    quantile_min_pool_allocation_exact_with(fac, alpha, beta, p, Exec::default())
}

/// Smallest whole number of pooled machines `M'` in `[0, M]` with
/// `P(return < alpha * mean) < beta`, by an ordered first-crossing scan.
pub fn quantile_min_pool_allocation_exact_with(
    fac: &PoolFacility,
    alpha: f64,
    beta: f64,
    p: HashProbability,
    exec: Exec,
) -> Result<AllocationResult, RiskError> {
    check_quantile_spec(alpha, beta)?;
    if beta >= 0.5 {
        log::warn!("beta = {beta} >= 0.5 imposes no constraint; returning zero");
        return Ok(AllocationResult::zero(None));
    }
    let tail = |m: u64| pool_shortfall_probability(&fac.split_machines(m), p, alpha);
    // A zero-mean return (nothing mined, nothing paid) meets the tail
    // bound only vacuously.
    let has_mean = |m: u64| pool_moments(&fac.split_machines(m), p).mean > 0.0;
    let Some(found) = par::find_first(exec, 0..fac.machines + 1, |m| {
        has_mean(m)
            && match tail(m) {
                Ok(t) => t < beta,
                Err(_) => true,
            }
    }) else {
        return Ok(AllocationResult::infeasible(fac, None));
    };
    tail(found)?;
    Ok(AllocationResult {
        n_min: found as f64 * fac.machine_hashes,
        m_min: found,
        coefficients: None,
        feasible: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prob(p: f64) -> HashProbability {
        HashProbability::new(p).unwrap()
    }

    #[test]
    fn moments_at_the_extremes() {
        let p = prob(1e-3);
        let full = PoolSplit::new(1e5, 1e5, 2e-3, 1.0).unwrap();
        assert_eq!(pool_moments(&full, p), PoolMoments { mean: 200.0, std: 0.0 });
        let none = PoolSplit::new(1e5, 0.0, 2e-3, 1.0).unwrap();
        let m = pool_moments(&none, p);
        assert!((m.mean - 100.0).abs() < 1e-9);
        assert!((m.std - (100.0f64 * 0.999).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn split_validation() {
        assert!(PoolSplit::new(10.0, 11.0, 0.0, 1.0).is_err());
        assert!(PoolSplit::new(10.0, 5.0, -1.0, 1.0).is_err());
        assert!(PoolSplit::new(10.0, 5.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn pool_upside_reduces_to_direct() {
        let p = prob(1e-3);
        let split = PoolSplit::new(2e5, 0.0, 5e-4, 1.0).unwrap();
        for alpha in [0.8, 1.0, 1.1, 1.5] {
            let direct = crate::risk_direct::upside_probability(2e5, p, alpha);
            assert!((upside_probability_pool(&split, p, alpha) - direct).abs() < 1e-15);
        }
        let full = PoolSplit::new(2e5, 2e5, 5e-4, 1.0).unwrap();
        assert_eq!(upside_probability_pool(&full, p, 1.0), 1.0);
        assert_eq!(upside_probability_pool(&full, p, 1.01), 0.0);
    }

    #[test]
    fn large_facility_needs_no_pool() {
        let p = prob(1e-3);
        let fac = PoolFacility::new(1000, 1e3, 1.0, 2e-3).unwrap();
        let r = cv_min_pool_allocation(&fac, 0.1, p).unwrap();
        assert!(r.feasible && r.n_min == 0.0);
        let r = quantile_min_pool_allocation_normal(&fac, 0.9, 0.1, p).unwrap();
        assert!(r.feasible && r.n_min == 0.0);
    }

    #[test]
    fn cv_root_sits_on_the_boundary() {
        let p = prob(1e-3);
        let fac = PoolFacility::new(10, 1e3, 1.0, 1.5e-3).unwrap();
        let r = cv_min_pool_allocation(&fac, 0.1, p).unwrap();
        assert!(r.feasible && r.n_min > 0.0);
        let cv = pool_cv(&fac.split(r.n_min), p);
        assert!((cv / 0.1 - 1.0).abs() < 1e-9, "{cv}");
        assert!(pool_cv(&fac.split(r.n_min * (1.0 - 1e-6)), p) > 0.1);
    }

    #[test]
    fn zero_payout_pool_is_infeasible() {
        let p = prob(1e-3);
        let fac = PoolFacility::new(10, 1e3, 1.0, 0.0).unwrap();
        let r = cv_min_pool_allocation(&fac, 0.1, p).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.require_feasible(), Err(RiskError::InfeasibleAllocation));
    }

    #[test]
    fn fair_pool_uses_the_linear_branch() {
        let p = prob(1e-3);
        let fac = PoolFacility::new(10, 1e3, 1.0, 1e-3).unwrap();
        let r = cv_min_pool_allocation(&fac, 0.1, p).unwrap();
        assert_eq!(r.coefficients.unwrap().0, 0.0);
        let cv = pool_cv(&fac.split(r.n_min), p);
        assert!((cv / 0.1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_pool_search_is_first_crossing() {
        let p = prob(1e-3);
        let fac = PoolFacility::new(100, 1e3, 1.0, 1.2e-3).unwrap();
        let r = quantile_min_pool_allocation_exact(&fac, 0.9, 0.05, p).unwrap();
        assert!(r.feasible);
        let tail = |m| pool_shortfall_probability(&fac.split_machines(m), p, 0.9).unwrap();
        assert!(tail(r.m_min) < 0.05);
        for m in 0..r.m_min {
            assert!(tail(m) >= 0.05);
        }
    }

    #[test]
    fn zero_payout_full_pooling_does_not_count() {
        let p = prob(4e-6);
        let fac = PoolFacility::new(10, 1e3, 1.0, 0.0).unwrap();
        let r = quantile_min_pool_allocation_exact(&fac, 0.95, 0.05, p).unwrap();
        assert!(!r.feasible);
    }

    #[test]
    fn corrected_pool_rate() {
        let r = r_pool_corrected();
        assert!((r / 1.8079590590630737e-23 - 1.0).abs() < 1e-12, "{r}");
    }
}
