use hashlotto::chainparams::{decode_compact, encode_compact, ChainParams, Difficulty, HashProbability, Target256};
use hashlotto::numerics::{binomial_tail_lt, std_normal_cdf, std_normal_quantile, Regime, TailQuery};
use hashlotto::par::Exec;
use hashlotto::risk_direct::{
    cv_min_fleet, cv_value, quantile_min_fleet_exact_with, quantile_min_fleet_normal, shortfall_probability, RiskSpec,
};
use hashlotto::risk_pool::{
    pool_moments, pool_shortfall_probability, quantile_min_pool_allocation_exact_with, PoolFacility,
};
use num_bigint::BigUint;
use proptest::prelude::*;

fn probability() -> impl Strategy<Value = HashProbability> {
    (-4.0f64..-2.0).prop_map(|e| HashProbability::new(10f64.powf(e)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn compact_round_trip_truncates_at_most_the_mantissa(bytes in prop::collection::vec(any::<u8>(), 1..29)) {
        let value = BigUint::from_bytes_be(&bytes);
        prop_assume!(value > BigUint::from(0u32));
        let target = Target256::new(value.clone()).unwrap();
        let back = decode_compact(encode_compact(&target)).unwrap();
        prop_assert!(back.value() <= &value);
        // three significant bytes survive, so the loss is below 2^-15 relative
        let lost = &value - back.value();
        prop_assert!(lost * BigUint::from(1u32 << 15) < value);
        prop_assert_eq!(encode_compact(&back), encode_compact(&target));
    }

    #[test]
    fn difficulty_round_trip(d in 1.0f64..1e15) {
        let chain = ChainParams::mainnet();
        let t = chain.target_from_difficulty(Difficulty::new(d).unwrap()).unwrap();
        let back = chain.difficulty_from_target(&t).value();
        prop_assert!((back / d - 1.0).abs() < 1e-12, "{d} -> {back}");
    }

    #[test]
    fn tail_is_a_monotone_probability(n in 1u64..50_000, p in 1e-5f64..0.2, k1 in 0.0f64..200.0, dk in 0.0f64..50.0) {
        let a = binomial_tail_lt(&TailQuery::new(n as f64, p, k1).unwrap()).unwrap();
        let b = binomial_tail_lt(&TailQuery::new(n as f64, p, k1 + dk).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(a <= b + 1e-12, "P(X<{k1})={a} > P(X<{})={b}", k1 + dk);
    }

    #[test]
    fn tail_falls_as_trials_grow(n in 1u64..20_000, extra in 1u64..5_000, p in 1e-4f64..0.05, k in 0.0f64..100.0) {
        let q = |n: u64| binomial_tail_lt(&TailQuery::new(n as f64, p, k).unwrap().with_regime(Regime::ExactSum)).unwrap();
        prop_assert!(q(n + extra) <= q(n) + 1e-12);
    }

    #[test]
    fn poisson_limit_bound(n in 1u64..10_000, p in 1e-7f64..1e-2, k in 0.0f64..60.0) {
        let q = TailQuery::new(n as f64, p, k).unwrap();
        let exact = binomial_tail_lt(&q.with_regime(Regime::ExactSum)).unwrap();
        let poisson = binomial_tail_lt(&q.with_regime(Regime::PoissonGamma)).unwrap();
        prop_assert!((exact - poisson).abs() <= n as f64 * p * p + 1e-12);
    }

    #[test]
    fn normal_quantile_inverts_cdf(beta in 1e-12f64..(1.0 - 1e-12)) {
        let z = std_normal_quantile(beta).unwrap();
        let back = std_normal_cdf(z);
        prop_assert!((back - beta).abs() <= 1e-9 * beta.min(1.0 - beta).max(1e-3), "{beta} -> {z} -> {back}");
    }

    #[test]
    fn normal_quantile_is_monotone(a in 1e-9f64..0.5, b in 1e-9f64..0.5) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(std_normal_quantile(lo).unwrap() <= std_normal_quantile(hi).unwrap());
    }

    #[test]
    fn cv_fleet_meets_its_target(theta in 0.01f64..1.0, p in probability(), mh in 10.0f64..1e5) {
        let r = cv_min_fleet(&RiskSpec::cv(theta).unwrap(), p, mh);
        let cv = cv_value(r.m_min as f64 * mh, p).unwrap();
        prop_assert!(cv <= theta * (1.0 + 1e-12));
        if r.m_min > 1 {
            prop_assert!(cv_value((r.m_min - 1) as f64 * mh, p).unwrap() > theta);
        }
    }

    #[test]
    fn exact_fleet_is_the_first_feasible_count(alpha in 0.5f64..0.95, beta in 0.01f64..0.4, p in probability(), mh in 100.0f64..3000.0) {
        let spec = RiskSpec::quantile(alpha, beta).unwrap();
        let r = quantile_min_fleet_exact_with(&spec, p, mh, Exec::Sequential).unwrap();
        let tail = |m: u64| shortfall_probability(m as f64 * mh, p, alpha).unwrap();
        prop_assert!(tail(r.m_min) < beta);
        prop_assert!((1..r.m_min).all(|m| tail(m) >= beta));
    }

    #[test]
    fn looser_beta_never_needs_more_machines(alpha in 0.5f64..0.95, b1 in 0.01f64..0.4, db in 0.0f64..0.09, p in probability(), mh in 100.0f64..3000.0) {
        let m = |beta: f64| quantile_min_fleet_normal(&RiskSpec::quantile(alpha, beta).unwrap(), p, mh).unwrap().m_min;
        prop_assert!(m(b1 + db) <= m(b1));
    }

    #[test]
    fn pool_mean_is_total_hashes_times_rate(machines in 1u64..500, pooled in 0u64..500, mh in 10.0f64..1e4, rp in 1e-5f64..1e-2, p in probability()) {
        let pooled = pooled.min(machines);
        let fac = PoolFacility::new(machines, mh, 1.0, rp).unwrap();
        let split = fac.split_machines(pooled);
        let m = pool_moments(&split, p);
        let want = split.direct_hashes() * p.value() + pooled as f64 * mh * rp;
        prop_assert!((m.mean - want).abs() <= 1e-12 * want.max(1e-300));
        prop_assert!(m.std >= 0.0);
        prop_assert!(split.direct_hashes() >= 0.0);
    }

    #[test]
    fn pool_exact_scan_matches_brute_force(machines in 1u64..60, mh in 100.0f64..2000.0, alpha in 0.5f64..0.9, beta in 0.01f64..0.3, ratio in 0.5f64..5.0, p in probability()) {
        let fac = PoolFacility::new(machines, mh, 1.0, ratio * p.value()).unwrap();
        let r = quantile_min_pool_allocation_exact_with(&fac, alpha, beta, p, Exec::Sequential).unwrap();
        let ok = |m: u64| {
            let s = fac.split_machines(m);
            pool_moments(&s, p).mean > 0.0 && pool_shortfall_probability(&s, p, alpha).unwrap() < beta
        };
        match (0..=machines).find(|&m| ok(m)) {
            Some(m) => prop_assert!(r.feasible && r.m_min == m),
            None => prop_assert!(!r.feasible),
        }
    }
}

#[cfg(feature = "parallel")]
proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn strategies_agree(alpha in 0.5f64..0.95, beta in 0.01f64..0.4, p in probability(), mh in 100.0f64..3000.0, seed in any::<u64>()) {
        let spec = RiskSpec::quantile(alpha, beta).unwrap();
        let seq = quantile_min_fleet_exact_with(&spec, p, mh, Exec::Sequential).unwrap();
        let par = quantile_min_fleet_exact_with(&spec, p, mh, Exec::Parallel).unwrap();
        prop_assert_eq!(seq, par);

        let q = TailQuery::new(seq.m_min as f64 * mh, p.value(), alpha * seq.m_min as f64 * mh * p.value()).unwrap();
        use hashlotto::numerics::{mc_tail_estimate_with, McConfig};
        let cfg = McConfig { trials: 40_000, seed };
        let a = mc_tail_estimate_with(&q, &cfg, Exec::Sequential).unwrap();
        let b = mc_tail_estimate_with(&q, &cfg, Exec::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }
}
