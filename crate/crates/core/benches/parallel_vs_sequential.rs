use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use iab_core::simulator::{MonteCarlo, RateQuery};
use iab_core::{Analysis, Execution, PartitionStrategy, SystemParams};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn monte_carlo(c: &mut Criterion) {
    let params = SystemParams::default();
    let queries: Vec<RateQuery> = (1..10)
        .map(|i| RateQuery {
            eta: f64::from(i) / 10.0,
            rho: 50e6,
            strategy: PartitionStrategy::LoadBased,
        })
        .collect();
    let mut g = c.benchmark_group("monte_carlo_5000_trials");
    g.sample_size(10);
    for (name, mode) in MODES {
        let mc = MonteCarlo::new(3, 5000).with_execution(mode);
        g.bench_function(name, |b| {
            b.iter(|| black_box(mc.rate_coverage_many(&queries, &params).unwrap()))
        });
    }
    g.finish();
}

fn analytics(c: &mut Criterion) {
    let params = SystemParams::default();
    let mut g = c.benchmark_group("rate_coverage");
    g.sample_size(10);
    for (name, mode) in MODES {
        let a = Analysis::with_execution(&params, mode).unwrap();
        g.bench_function(format!("{name}/evaluate"), |b| {
            b.iter(|| black_box(a.rate_coverage_at(50e6, 0.4, PartitionStrategy::EqualPartition)))
        });
        g.bench_function(format!("{name}/build"), |b| {
            b.iter(|| black_box(Analysis::with_execution(&params, mode).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, monte_carlo, analytics);
criterion_main!(benches);
