use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qpec_bench::{one_qubit_circuit, two_qubit_circuit};
use qpec_core::bounds::closed_form_decomposition;
use qpec_core::pec::{decompositions_from_identity, run_pec, run_pec_general, Measurement, PecOptions, SeriesSampler};
use qpec_core::{GeneralNoise, NoiseSpec};

const SAMPLES: usize = 20_000;

fn pec(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_pec");
    group.throughput(Throughput::Elements(SAMPLES as u64));
    let one = one_qubit_circuit();
    let two = two_qubit_circuit();
    let one_decs =
        decompositions_from_identity(&one, &closed_form_decomposition(&NoiseSpec::Dephasing { eps: 0.1 }).unwrap())
            .unwrap();
    let two_decs = decompositions_from_identity(
        &two,
        &closed_form_decomposition(&NoiseSpec::Depolarizing { d: 4, eps: 0.05 }).unwrap(),
    )
    .unwrap();
    group.bench_function("one qubit born", |b| {
        b.iter(|| run_pec(&one, &one_decs, &PecOptions::new(SAMPLES, black_box(1))).unwrap())
    });
    group.bench_function("one qubit exact", |b| {
        let opts = PecOptions::new(SAMPLES, 1).measurement(Measurement::Exact);
        b.iter(|| run_pec(&one, &one_decs, black_box(&opts)).unwrap())
    });
    group.bench_function("two qubit born", |b| {
        b.iter(|| run_pec(&two, &two_decs, &PecOptions::new(SAMPLES, black_box(1))).unwrap())
    });
    group.bench_function("two qubit born 4 workers", |b| {
        b.iter(|| run_pec(&two, &two_decs, &PecOptions::new(SAMPLES, black_box(1)).workers(4)).unwrap())
    });
    let ad = GeneralNoise::amplitude_damping(0.1).unwrap();
    group.bench_function("general amplitude damping", |b| {
        b.iter(|| run_pec_general(&one, &ad, &PecOptions::new(SAMPLES, black_box(1))).unwrap())
    });
    group.finish();
}

fn series_draws(c: &mut Criterion) {
    let sampler = SeriesSampler::new(0.2, 0.15, 0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    c.bench_function("series draw", |b| b.iter(|| black_box(sampler.draw(&mut rng))));
}

criterion_group!(benches, pec, series_draws);
criterion_main!(benches);
