//! Global rayon pool vs a single-thread pool on the data-parallel kernels.
//! Build with `--no-default-features` to time the sequential fallback itself.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pathwise_core::grid_paths::{besov_seminorm, generate_fbm, BesovIndex, InnerProduct, SampledPath, TimeGrid};
use pathwise_core::sewing::SewOptions;
use pathwise_core::young::pair_sew;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let global = rayon::ThreadPoolBuilder::new().build().expect("global-size pool");
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("1-thread pool");
    vec![("pool", global), ("single", single)]
}

fn bench_sewing(c: &mut Criterion) {
    let grid = TimeGrid::unit(1024).unwrap();
    let x = generate_fbm(1, 0.75, grid).unwrap();
    let u = x.map(1, |t, r, o| o[0] = r[0].sin() + t).unwrap();
    let ip = InnerProduct::euclidean(1);
    let mut group = c.benchmark_group("sew_young_pairing");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| pair_sew(&u, &x, &ip, 1.5, SewOptions::default()).unwrap()))
        });
    }
    group.finish();
}

fn bench_seminorm(c: &mut Criterion) {
    let grid = TimeGrid::unit(4096).unwrap();
    let x: SampledPath = generate_fbm(2, 0.6, grid).unwrap();
    let ip = InnerProduct::euclidean(1);
    let idx = BesovIndex::new(0.5, 4.0).unwrap();
    let mut group = c.benchmark_group("besov_seminorm");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| besov_seminorm(&x, idx, &ip).unwrap()))
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_sewing, bench_seminorm
}
criterion_main!(benches);
