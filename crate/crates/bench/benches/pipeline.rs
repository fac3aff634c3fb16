use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pptsq::channels::{compose, random_cptp, sample_ppt_channel, DEFAULT_PRUNE_TOL};
use pptsq::fixtures::{gamma_computed, example_channel, verify_worked_example};
use pptsq::random::{random_rank_two_mixture, rng_from_seed};
use pptsq::{certify_block_split, certify_schmidt2_pipeline, hermitian_eigenvalues, Tolerance};

fn channels(c: &mut Criterion) {
    let mut group = c.benchmark_group("choi");
    for d in [2, 3, 4] {
        let ch = random_cptp(d, 4, 1);
        group.bench_with_input(BenchmarkId::from_parameter(d), &ch, |b, ch| b.iter(|| black_box(ch).choi()));
    }
    group.finish();

    let phi = example_channel();
    let prune = Tolerance::new(DEFAULT_PRUNE_TOL).unwrap();
    c.bench_function("compose/fixture", |b| b.iter(|| compose(black_box(&phi), &phi, prune).unwrap()));
}

fn spectra(c: &mut Criterion) {
    let gamma = gamma_computed().partial_transpose();
    c.bench_function("eigenvalues/16x16", |b| {
        b.iter(|| hermitian_eigenvalues(black_box(gamma.matrix()), Tolerance::default()).unwrap())
    });
}

fn certifiers(c: &mut Criterion) {
    let tol = Tolerance::default();
    let gamma = gamma_computed();
    c.bench_function("block_split/gamma", |b| b.iter(|| certify_block_split(black_box(&gamma), tol).unwrap()));

    let channel = sample_ppt_channel(3, 18, 3, 2000, tol).unwrap().channel;
    let dec = random_rank_two_mixture(3, 3, 4, &mut rng_from_seed(3));
    let rho = dec.reconstruct();
    c.bench_function("schmidt2_pipeline/3x3", |b| {
        b.iter(|| certify_schmidt2_pipeline(&channel, black_box(&rho), &dec, tol).unwrap())
    });

    c.bench_function("verify_worked_example", |b| b.iter(|| verify_worked_example(tol)));
}

criterion_group!(benches, channels, spectra, certifiers);
criterion_main!(benches);
