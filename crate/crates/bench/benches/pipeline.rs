use std::hint::black_box;

use affectfuse_core::{
    build_feature_table, extract_features, generate, preprocess, run_loocv, zero_phase_filter,
    Cutoffs, EvalConfig, Session, SynthConfig,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn synth(days: usize, seed: u64) -> Vec<Session> {
    generate(&SynthConfig {
        days,
        seed,
        separation: 1.5,
        ..SynthConfig::default()
    })
    .expect("synthetic sessions")
}

fn bench_zero_phase(c: &mut Criterion) {
    let design = affectfuse_core::design_lowpass_butterworth(1, 10.0, 40.0).unwrap();
    let x: Vec<f64> = (0..30_000)
        .map(|n| ((n % 97) as f64 * 0.11).sin())
        .collect();
    c.bench_function("zero_phase_filter_30k", |b| {
        b.iter(|| zero_phase_filter(black_box(&design.coefficients), black_box(&x)).unwrap())
    });
}

fn bench_preprocess(c: &mut Criterion) {
    let sessions = synth(2, 1);
    let cutoffs = Cutoffs::default();
    c.bench_function("preprocess_session", |b| {
        b.iter(|| preprocess(black_box(&sessions[0]), black_box(&cutoffs)).unwrap())
    });
}

fn bench_extract(c: &mut Criterion) {
    let x: Vec<f64> = (0..3600)
        .map(|n| ((n as f64) * 0.37).sin() * 0.5 + 0.5)
        .collect();
    c.bench_function("extract_features_3600", |b| {
        b.iter(|| extract_features(black_box(&x), black_box(16)))
    });
}

fn bench_feature_table(c: &mut Criterion) {
    let cutoffs = Cutoffs::default();
    let processed: Vec<Session> = synth(2, 1)
        .iter()
        .map(|s| preprocess(s, &cutoffs).unwrap())
        .collect();
    c.bench_function("feature_table_2_sessions", |b| {
        b.iter(|| build_feature_table(black_box(&processed), black_box(16)).unwrap())
    });
}

fn bench_loocv(c: &mut Criterion) {
    let sessions = synth(4, 1);
    let config = EvalConfig::default();
    c.bench_function("loocv_4_sessions", |b| {
        b.iter(|| run_loocv(black_box(&sessions), black_box(&config)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_zero_phase,
    bench_preprocess,
    bench_extract,
    bench_feature_table,
    bench_loocv
);
criterion_main!(benches);
