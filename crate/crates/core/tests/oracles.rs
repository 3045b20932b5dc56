//! Library results against small brute-force computations written out here.

use hashlotto::chainparams::{decode_compact, success_probability, CompactBits, HashProbability};
use hashlotto::numerics::{binomial_tail_lt, Regime, TailQuery};
use hashlotto::par::Exec;
use hashlotto::risk_direct::{cv_min_fleet, quantile_min_fleet_exact_with, shortfall_probability, RiskSpec};
use hashlotto::risk_pool::{pool_shortfall_probability, quantile_min_pool_allocation_exact_with, PoolFacility};
use num_bigint::BigUint;

/// `P(X <= m)` for `X ~ Binomial(n, p)` by the pmf recurrence.
fn binom_cdf(n: u64, p: f64, m: i64) -> f64 {
    if m < 0 {
        return 0.0;
    }
    let mut pmf = (n as f64 * (-p).ln_1p()).exp();
    let mut sum = pmf;
    for i in 0..(m as u64).min(n) {
        pmf *= (n - i) as f64 / (i + 1) as f64 * p / (1.0 - p);
        sum += pmf;
    }
    sum.min(1.0)
}

/// `P(X <= m)` for `X ~ Poisson(lambda)`.
fn poisson_cdf(lambda: f64, m: i64) -> f64 {
    if m < 0 {
        return 0.0;
    }
    let mut ln_pmf = -lambda;
    let mut terms = vec![ln_pmf];
    for i in 0..m {
        ln_pmf += (lambda / (i + 1) as f64).ln();
        terms.push(ln_pmf);
    }
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()).exp().min(1.0)
}

fn tail_lt(n: u64, p: f64, k: f64) -> f64 {
    binom_cdf(n, p, k.ceil() as i64 - 1)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-300
}

#[test]
fn compact_decoding_by_hand() {
    let t = decode_compact(CompactBits(0x1704ed7f)).unwrap();
    assert_eq!(t.value(), &(BigUint::from(0x04ed7fu32) << (8 * (0x17 - 3))));
    let genesis = decode_compact(CompactBits(0x1d00ffff)).unwrap();
    assert_eq!(genesis.value(), &(BigUint::from(0xffffu32) << 208));
}

#[test]
fn probability_is_target_over_two_to_256() {
    let t = decode_compact(CompactBits(0x1704ed7f)).unwrap();
    // 0x04ed7f * 2^160 / 2^256
    let want = 0x04ed7f as f64 * 2f64.powi(160 - 256);
    assert_eq!(success_probability(&t).value(), want);
}

#[test]
fn tail_matches_pmf_sums() {
    for &(n, p) in &[(1u64, 0.5), (10, 0.3), (1_000, 1e-3), (40_000, 2.5e-4), (250_000, 4e-5), (1_000_000, 1e-5)] {
        let mean = n as f64 * p;
        for f in [0.0, 0.3, 0.5, 0.9, 1.0, 1.1, 1.7, 3.0] {
            let k = f * mean + 0.25;
            let got = binomial_tail_lt(&TailQuery::new(n as f64, p, k).unwrap()).unwrap();
            let want = tail_lt(n, p, k);
            assert!(close(got, want, 1e-10), "n={n} p={p} k={k}: {got} vs {want}");
        }
    }
}

#[test]
fn poisson_regime_matches_poisson_sums() {
    for &(lambda, k) in &[(0.5, 1.0), (4.0, 3.2), (25.0, 20.0), (250.0, 240.5), (1e3, 1e3)] {
        let n = 1e12;
        let q = TailQuery::new(n, lambda / n, k).unwrap().with_regime(Regime::PoissonGamma);
        let got = binomial_tail_lt(&q).unwrap();
        let want = poisson_cdf(lambda, k.ceil() as i64 - 1);
        assert!(close(got, want, 1e-10), "lambda={lambda} k={k}: {got} vs {want}");
    }
}

#[test]
fn desk_direct_fleet() {
    let p = HashProbability::new(1e-3).unwrap();
    let mh = 1e4;
    let r = quantile_min_fleet_exact_with(&RiskSpec::quantile(0.9, 0.1).unwrap(), p, mh, Exec::Sequential).unwrap();
    let brute = (1..100u64).find(|&m| tail_lt(m * 10_000, 1e-3, 0.9 * (m as f64 * mh * 1e-3)) < 0.1).unwrap();
    assert_eq!(brute, 16);
    assert_eq!(r.m_min, brute);
    for m in [15u64, 16] {
        let lib = shortfall_probability(m as f64 * mh, p, 0.9).unwrap();
        let oracle = tail_lt(m * 10_000, 1e-3, 0.9 * (m as f64 * mh * 1e-3));
        assert!(close(lib, oracle, 1e-10), "m={m}: {lib} vs {oracle}");
    }
}

#[test]
fn desk_pool_allocation() {
    let (machines, mh, p, r_pool, alpha, beta) = (100u64, 1e3, 1e-3, 1.2e-3, 0.9, 0.1);
    let fac = PoolFacility::new(machines, mh, 1.0, r_pool).unwrap();
    let hp = HashProbability::new(p).unwrap();
    let brute = (0..=machines)
        .find(|&m| {
            let direct = (machines - m) * 1_000;
            let pooled = m as f64 * mh;
            let k = alpha * direct as f64 * p + (alpha - 1.0) * pooled * r_pool;
            direct as f64 * p + pooled * r_pool > 0.0 && (k <= 0.0 || tail_lt(direct, p, k) < beta)
        })
        .unwrap();
    assert_eq!(brute, 32);
    let r = quantile_min_pool_allocation_exact_with(&fac, alpha, beta, hp, Exec::Sequential).unwrap();
    assert!(r.feasible);
    assert_eq!(r.m_min, brute);

    let split = fac.split_machines(32);
    let lib = pool_shortfall_probability(&split, hp, alpha).unwrap();
    let k = alpha * 68_000.0 * p + (alpha - 1.0) * 32_000.0 * r_pool;
    assert!(close(lib, tail_lt(68_000, p, k), 1e-10));
}

#[test]
fn cv_closed_form() {
    let p = HashProbability::new(2e-3).unwrap();
    for theta in [0.02, 0.1, 0.5] {
        let r = cv_min_fleet(&RiskSpec::cv(theta).unwrap(), p, 500.0);
        let h = (1.0 - 2e-3) / (2e-3 * theta * theta);
        assert!(close(r.h_min, h, 1e-14));
        assert_eq!(r.m_min, (h / 500.0).ceil() as u64);
    }
}
