use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use metagibbs::env::DEFAULT_STATE_CAP;
use metagibbs::meta::MetaJoint;
use metagibbs::presets::{bern2_with, tiny_super};
use metagibbs::super_task::{theorem2_terms, SuperJoint};

fn meta_joint(c: &mut Criterion) {
    let mut g = c.benchmark_group("meta_joint");
    for (m, n) in [(1, 2), (2, 2), (2, 4), (3, 3)] {
        let inst = bern2_with(m, n, 1.0);
        g.bench_with_input(BenchmarkId::from_parameter(format!("m{m}n{n}")), &inst, |b, inst| {
            b.iter(|| MetaJoint::build(black_box(inst), DEFAULT_STATE_CAP).unwrap())
        });
    }
    g.finish();
}

fn super_task(c: &mut Criterion) {
    let mut g = c.benchmark_group("super_task");
    g.sample_size(20);
    for n in [1, 2] {
        let inst = tiny_super(n, 1.0);
        g.bench_with_input(BenchmarkId::new("losses", n), &inst, |b, inst| {
            b.iter(|| SuperJoint::build(black_box(inst), DEFAULT_STATE_CAP, false).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("terms", n), &inst, |b, inst| {
            b.iter(|| theorem2_terms(black_box(inst), DEFAULT_STATE_CAP).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, meta_joint, super_task);
criterion_main!(benches);
