use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hashlotto::numerics::{mc_tail_estimate_with, McConfig, TailQuery};
use hashlotto::par::Exec;
use hashlotto::risk_direct::{quantile_min_fleet_exact_with, RiskSpec};
use hashlotto::risk_pool::{quantile_min_pool_allocation_exact_with, PoolFacility};
use hashlotto::HashProbability;
use std::hint::black_box;

fn strategies() -> Vec<Exec> {
    #[cfg(feature = "parallel")]
    {
        vec![Exec::Sequential, Exec::Parallel]
    }
    #[cfg(not(feature = "parallel"))]
    {
        vec![Exec::Sequential]
    }
}

fn exact_scan(c: &mut Criterion) {
    let p = HashProbability::new(1e-3).unwrap();
    let spec = RiskSpec::quantile(0.95, 0.05).unwrap();
    let fac = PoolFacility::new(10_000, 100.0, 1.0, 1.2e-3).unwrap();
    let mut g = c.benchmark_group("exact_scan");
    for exec in strategies() {
        g.bench_with_input(BenchmarkId::new("direct", exec.name()), &exec, |b, &exec| {
            b.iter(|| quantile_min_fleet_exact_with(black_box(&spec), p, 200.0, exec).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("pool", exec.name()), &exec, |b, &exec| {
            b.iter(|| quantile_min_pool_allocation_exact_with(black_box(&fac), 0.95, 0.001, p, exec).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let q = TailQuery::new(1e6, 1e-4, 90.0).unwrap();
    let cfg = McConfig {
        trials: 200_000,
        seed: 7,
    };
    let mut g = c.benchmark_group("monte_carlo");
    for exec in strategies() {
        g.bench_with_input(BenchmarkId::from_parameter(exec.name()), &exec, |b, &exec| {
            b.iter(|| mc_tail_estimate_with(black_box(&q), &cfg, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = exact_scan, monte_carlo
);
criterion_main!(benches);
