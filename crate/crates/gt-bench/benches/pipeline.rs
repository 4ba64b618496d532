//! Benchmarks for the hot paths: matrix generation, observation synthesis,
//! the column-driven decoders, and exact channel analysis at large k.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use gt_core::{
    channel_marginals, decode_comp, decode_dd, decode_ncomp, decode_separate, default_gamma,
    generate_test_matrix, info_density_table, info_stats, nu_symm, run_tests, run_trial,
    sample_defective_set, DecoderSpec, ExperimentConfig, NoiseChannel, Observations,
    RecoveryCriterion, SeparateDecoderConfig, TestDesign, TestMatrix,
};

const P: usize = 3000;
const K: usize = 30;
const N: usize = 600;

fn fixture() -> (TestMatrix, Observations, SeparateDecoderConfig) {
    let nu = std::f64::consts::LN_2;
    let inst = sample_defective_set(P, K, 1).unwrap();
    let design = TestDesign::new(N, nu, K).unwrap();
    let matrix = generate_test_matrix(&design, P, 2).unwrap();
    let channel = NoiseChannel::Symmetric { rho: 0.05 };
    let obs = run_tests(&matrix, &inst, &channel, 3).unwrap();
    let marginals = channel_marginals(K, nu, &channel).unwrap();
    let gamma = default_gamma(N, info_stats(&marginals).i1, 0.5);
    let cfg = SeparateDecoderConfig::new(gamma, info_density_table(&marginals)).unwrap();
    (matrix, obs, cfg)
}

fn bench_generation(c: &mut Criterion) {
    let design = TestDesign::new(1000, std::f64::consts::LN_2, K).unwrap();
    c.bench_function("generate_test_matrix_1000x3000", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed = seed.wrapping_add(1);
            black_box(generate_test_matrix(&design, P, seed).unwrap())
        })
    });
}

fn bench_decoders(c: &mut Criterion) {
    let (matrix, obs, cfg) = fixture();
    c.bench_function("decode_separate_3000x600", |b| {
        b.iter(|| black_box(decode_separate(&matrix, &obs, &cfg).unwrap()))
    });
    c.bench_function("decode_comp_3000x600", |b| {
        b.iter(|| black_box(decode_comp(&matrix, &obs).unwrap()))
    });
    c.bench_function("decode_dd_3000x600", |b| {
        b.iter(|| black_box(decode_dd(&matrix, &obs).unwrap()))
    });
    c.bench_function("decode_ncomp_3000x600", |b| {
        b.iter(|| black_box(decode_ncomp(&matrix, &obs, 0.05, 1.5).unwrap()))
    });
}

fn bench_analysis(c: &mut Criterion) {
    c.bench_function("channel_marginals_k1e5_symmetric", |b| {
        let ch = NoiseChannel::Symmetric { rho: 0.11 };
        b.iter(|| black_box(channel_marginals(100_000, nu_symm(100_000), &ch).unwrap()))
    });
}

fn bench_trial(c: &mut Criterion) {
    let cfg = ExperimentConfig {
        p: P,
        k: K,
        channel: NoiseChannel::Symmetric { rho: 0.05 },
        nu: std::f64::consts::LN_2,
        n_values: vec![N],
        decoder: DecoderSpec::Separate { delta: 0.5 },
        criterion: RecoveryCriterion::Partial { d_pos: 3, d_neg: 3 },
        trials: 1,
        master_seed: 0,
    };
    c.bench_function("run_trial_separate_p3000", |b| {
        let mut trial = 0u64;
        b.iter(|| {
            trial = trial.wrapping_add(1);
            black_box(run_trial(&cfg, N, trial).unwrap())
        })
    });
}

criterion_group!(
    benches,
    bench_generation,
    bench_decoders,
    bench_analysis,
    bench_trial
);
criterion_main!(benches);
