use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use reinforced_walks::moments::{a_n_l, exact_mean_mu};
use reinforced_walks::oracle::{enum_percolation, enum_walk_pmf};
use reinforced_walks::{Mode, MomentTable, StepDistribution};

fn moment_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("moment_table");
    for nmax in [10_000usize, 100_000] {
        group.bench_with_input(BenchmarkId::from_parameter(nmax), &nmax, |b, &nmax| {
            b.iter(|| MomentTable::new(black_box(0.75), 4, nmax))
        });
    }
    group.finish();
    c.bench_function("a_n_l/1e7", |b| b.iter(|| a_n_l(black_box(10_000_000), 2.0, 0.3)));
    c.bench_function("exact_mean_mu/1e5", |b| b.iter(|| exact_mean_mu(black_box(100_000), 0.5)));
}

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumeration");
    group.sample_size(10);
    for n in [6usize, 8] {
        group.bench_with_input(BenchmarkId::new("percolation", n), &n, |b, &n| {
            b.iter(|| enum_percolation(n, 0.5))
        });
    }
    let dist = StepDistribution::rademacher();
    group.bench_function("walk_pmf/6", |b| b.iter(|| enum_walk_pmf(6, 0.5, &dist, Mode::Negative)));
    group.finish();
}

criterion_group!(benches, moment_tables, enumeration);
criterion_main!(benches);
