use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qpec_core::bases::{basis_b13, basis_b16, basis_two_qubit_241, rank_of};
use qpec_core::decomposer::{decompose_exact, decompose_l1};
use qpec_core::{make_noise, Channel, NoiseSpec};

fn lp_one_qubit(c: &mut Criterion) {
    let noise = make_noise(&NoiseSpec::GeneralizedDephasing { axis: [1.0, 0.0, 1.0], eps: 0.1 }).unwrap();
    let id = Channel::identity(2);
    let b16 = basis_b16().noisy(&noise).unwrap();
    let b13 = basis_b13().noisy(&noise).unwrap();
    c.bench_function("decompose_l1 b16", |b| b.iter(|| decompose_l1(black_box(&id), &b16).unwrap()));
    c.bench_function("decompose_l1 b13", |b| b.iter(|| decompose_l1(black_box(&id), &b13).unwrap()));
    c.bench_function("decompose_exact b13", |b| b.iter(|| decompose_exact(black_box(&id), &b13).unwrap()));
}

fn lp_two_qubit(c: &mut Criterion) {
    let noise = make_noise(&NoiseSpec::Depolarizing { d: 4, eps: 0.05 }).unwrap();
    let id = Channel::identity(4);
    let ops = basis_two_qubit_241().noisy(&noise).unwrap();
    let mut group = c.benchmark_group("two qubit");
    group.sample_size(10);
    group.bench_function("decompose_l1 tq241", |b| b.iter(|| decompose_l1(black_box(&id), &ops).unwrap()));
    group.bench_function("rank_of tq241", |b| b.iter(|| rank_of(black_box(&ops)).unwrap()));
    group.finish();
}

criterion_group!(benches, lp_one_qubit, lp_two_qubit);
criterion_main!(benches);
