use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use metagibbs::mean_est::{gen_monte_carlo, McMode, MeanEstConfig, SampleLaw};

fn mean_estimation(c: &mut Criterion) {
    let base = MeanEstConfig {
        m: 2,
        n: 4,
        d: 1,
        alpha: 0.5,
        gamma: 1.0,
        sigma_z: 1.0,
        sigma_tau: 1.0,
        sample_law: SampleLaw::Gaussian,
    };
    let trials = 10_000;
    let mut g = c.benchmark_group("mean_estimation");
    g.sample_size(10);
    g.throughput(Throughput::Elements(trials));
    for (label, mode) in [("rao_blackwell", McMode::RaoBlackwell), ("fully_sampled", McMode::FullySampled)] {
        for d in [1, 8] {
            let cfg = MeanEstConfig { d, ..base };
            g.bench_with_input(BenchmarkId::new(label, d), &cfg, |b, cfg| {
                b.iter(|| gen_monte_carlo(black_box(cfg), trials, 7, mode).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, mean_estimation);
criterion_main!(benches);
