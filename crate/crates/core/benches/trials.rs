//! Sequential against data-parallel trial execution.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use treeaut::experiments::{run_experiment, slice_tuple, ExperimentConfig, Slice};
use treeaut::nielsen::{trichotomy, TrichotomyConfig};
use treeaut::par::{run_trials, Exec};
use treeaut::TreeParams;

fn modes() -> Vec<(&'static str, Exec)> {
    vec![("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn trichotomy_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("trichotomy_trials");
    group.sample_size(10);
    let cfg = TrichotomyConfig::default();
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::new(name, 16), |b| {
            b.iter(|| {
                run_trials(exec, 42, 16, |_, seed| {
                    let t = slice_tuple(Slice::Mixed, TreeParams::default(), seed);
                    trichotomy(&t, &cfg).map(|v| v.kind())
                })
            })
        });
    }
    group.finish();
}

fn experiments(c: &mut Criterion) {
    let mut group = c.benchmark_group("experiments");
    group.sample_size(10);
    for name in ["uniformity", "nielsen_measure"] {
        for (mode, exec) in modes() {
            let cfg = ExperimentConfig {
                samples: 20_000,
                exec,
                ..ExperimentConfig::default()
            };
            group.bench_function(BenchmarkId::new(name, mode), |b| {
                b.iter(|| run_experiment(black_box(name), &cfg).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, trichotomy_trials, experiments);
criterion_main!(benches);
