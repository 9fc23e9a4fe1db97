//! Parallel vs sequential timings for the verification sweeps, plus the
//! latency of a single term-free valuation prediction.
//!
//! Run with `cargo bench -p gfib-core`. Building with
//! `--no-default-features` removes rayon; the *_parallel benchmarks then
//! measure the sequential fallback.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use gfib_core::valuation::predict_b;
use gfib_core::verify::{closedform_suite, valuation_suite, verify_range_opts, VerifyOptions};

fn opts(parallel: bool) -> VerifyOptions {
    VerifyOptions {
        k_max: 5,
        n_max: 150,
        parallel,
        ..VerifyOptions::default()
    }
}

fn bench_closedform(c: &mut Criterion) {
    let mut group = c.benchmark_group("closedform_suite");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| closedform_suite(black_box(&opts(false))).unwrap())
    });
    group.bench_function("parallel", |b| {
        b.iter(|| closedform_suite(black_box(&opts(true))).unwrap())
    });
    group.finish();
}

fn bench_valuation(c: &mut Criterion) {
    let mut group = c.benchmark_group("valuation_suite");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| valuation_suite(black_box(&opts(false))).unwrap())
    });
    group.bench_function("parallel", |b| {
        b.iter(|| valuation_suite(black_box(&opts(true))).unwrap())
    });
    group.finish();
}

fn bench_verify_range(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_range_k3_j0_n4000");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| verify_range_opts(3, 0, 4000, false).unwrap())
    });
    group.bench_function("parallel", |b| {
        b.iter(|| verify_range_opts(3, 0, 4000, true).unwrap())
    });
    group.finish();
}

fn bench_predict(c: &mut Criterion) {
    c.bench_function("predict_b_at_1e9", |b| {
        b.iter(|| predict_b(black_box(5), black_box(2), black_box(1_000_000_000)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_closedform,
    bench_valuation,
    bench_verify_range,
    bench_predict
);
criterion_main!(benches);
