use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rankkernel::clustering::average_linkage;
use rankkernel::estimators::induced_sq_distance_matrix;
use rankkernel::rng::stream;
use rankkernel::sampling::censor_topk;
use rankkernel::{compute_gram, kendall_distance, EstimatorConfig, KernelSpec, PartialRanking, Permutation};

fn rankings(count: usize, n: usize, k: usize, seed: u64) -> Vec<PartialRanking> {
    let mut rng = stream(seed, 0);
    (0..count)
        .map(|_| censor_topk(&Permutation::random(n, &mut rng), k).unwrap())
        .collect()
}

fn kendall(c: &mut Criterion) {
    let mut group = c.benchmark_group("kendall_distance");
    for n in [10, 100, 1000, 10_000] {
        let mut rng = stream(1, n as u64);
        let (s, t) = (Permutation::random(n, &mut rng), Permutation::random(n, &mut rng));
        group.bench_with_input(BenchmarkId::from_parameter(n), &(s, t), |b, (s, t)| {
            b.iter(|| kendall_distance(black_box(s), black_box(t)).unwrap())
        });
    }
    group.finish();
}

fn gram(c: &mut Criterion) {
    let spec = KernelSpec::mallows(0.2);
    let data = rankings(100, 10, 4, 2);
    let mut group = c.benchmark_group("gram_100x100_top4");
    for (name, config) in [
        ("mc", EstimatorConfig::MonteCarlo { samples: 20 }),
        ("antithetic", EstimatorConfig::Antithetic { samples: 20 }),
    ] {
        group.bench_function(name, |b| b.iter(|| compute_gram(&spec, black_box(&data), &config, 3).unwrap()));
    }
    let small = rankings(20, 6, 3, 4);
    group.bench_function("exact_20x20_n6", |b| {
        b.iter(|| compute_gram(&spec, black_box(&small), &EstimatorConfig::Exact { limit: 1 << 20 }, 0).unwrap())
    });
    group.finish();
}

fn clustering(c: &mut Criterion) {
    let spec = KernelSpec::mallows(0.2);
    let g = compute_gram(&spec, &rankings(200, 10, 4, 5), &EstimatorConfig::Antithetic { samples: 10 }, 6).unwrap();
    let d = induced_sq_distance_matrix(&g).matrix;
    c.bench_function("average_linkage_200", |b| b.iter(|| average_linkage(black_box(&d)).unwrap()));
}

fn quicker() -> Criterion {
    Criterion::default()
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(2))
        .sample_size(20)
}

criterion_group! {
    name = benches;
    config = quicker();
    targets = kendall, gram, clustering
}
criterion_main!(benches);
