use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use chgraph::domains;
use chgraph::experiments::Observable;
use chgraph::par::ExecPolicy;
use chgraph::reflected::{mc_expectations, SimConfig};
use chgraph::types::Point;

fn policies(c: &mut Criterion) {
    let sc = domains::single_strip();
    let z0 = Point::new(std::f64::consts::PI, 1.0);
    let phi = Observable::CosXOnePlusY;
    let mut group = c.benchmark_group("mc_expectations");
    group.sample_size(10);
    for eps in [0.4, 0.2] {
        let cfg = SimConfig::with_default_dt(eps, 0.5, 1, 2000);
        for (name, policy) in [("sequential", ExecPolicy::Sequential), ("parallel", ExecPolicy::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, eps), &cfg, |b, cfg| {
                b.iter(|| mc_expectations(&sc, z0, cfg, &[0.5], &|p| phi.eval(p), policy).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, policies);
criterion_main!(benches);
