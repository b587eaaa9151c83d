//! Wall-time scaling of the fit. The algorithm reads each matrix entry a
//! bounded number of times, so time should grow close to linearly in
//! `n * d`; compare the reported medians across sizes.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use blockgaps::experiments::{design_parameters, Design};
use blockgaps::lg::{largest_gaps_fit, row_means};
use blockgaps::model::sample;

fn bench_fit(c: &mut Criterion) {
    let params = design_parameters(Design::Balanced, 0.1).unwrap();
    let mut group = c.benchmark_group("largest_gaps_fit");
    group.sample_size(10);
    for &size in &[500usize, 1000, 2000] {
        let (_, _, x) = sample(&params, size, size, 42).unwrap();
        group.throughput(Throughput::Elements((size * size) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(size), &x, |b, x| {
            b.iter(|| largest_gaps_fit(x, 0.1, 0.08).unwrap());
        });
    }
    group.finish();

    let mut group = c.benchmark_group("row_means");
    group.sample_size(10);
    for &size in &[1000usize, 2000] {
        let (_, _, x) = sample(&params, size, size, 42).unwrap();
        group.throughput(Throughput::Elements((size * size) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(size), &x, |b, x| {
            b.iter(|| row_means(x));
        });
    }
    group.finish();
}

criterion_group!(benches, bench_fit);
criterion_main!(benches);
