use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use regge_core::engine::expand_many;
use regge_core::oracle::{solve_states, OracleConfig};
use regge_core::renorm::{solve_scheme, Scheme, SolverConfig};
use regge_core::{Execution, PotentialSpec};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn energy_sweep(c: &mut Criterion) {
    let pot = PotentialSpec::martin();
    let energies: Vec<f64> = (0..2000).map(|i| 0.9 + 1e-3 * i as f64).collect();
    let mut group = c.benchmark_group("energy_sweep_order8");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| expand_many(&pot, black_box(&energies), 1.0, 2, 8, exec))
        });
    }
    group.finish();
}

fn multi_start(c: &mut Criterion) {
    let pot = PotentialSpec::martin();
    let mut group = c.benchmark_group("scheme_multi_start");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SolverConfig {
            execution: exec,
            ..SolverConfig::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| solve_scheme(Scheme::MinimalSensitivity, &pot, black_box(1.3470535), 1.0, 2, &cfg))
        });
    }
    group.finish();
}

fn oracle_states(c: &mut Criterion) {
    let pot = PotentialSpec::martin();
    let states = [(1, 0.0), (1, 1.0), (2, 0.0), (2, 1.0), (3, 0.0), (4, 0.0)];
    let cfg = OracleConfig::default();
    let mut group = c.benchmark_group("oracle_table_states");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| solve_states(&pot, 1.0, 1.0, black_box(&states), &cfg, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, energy_sweep, multi_start, oracle_states);
criterion_main!(benches);
