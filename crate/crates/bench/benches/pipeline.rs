use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rgquad_bench::{pip, xxx};
use rgquad_core::{
    build_charge, derive_coefficients, joint_spectrum, solve_all_homotopy, HomotopyOptions, OracleOptions,
};

fn charges(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_charge");
    for n in [6, 8, 10] {
        let spec = xxx(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &spec, |b, spec| {
            b.iter(|| build_charge(black_box(spec), 0).unwrap())
        });
    }
    group.finish();
}

fn derive(c: &mut Criterion) {
    let spec = pip(12);
    c.bench_function("derive_coefficients/pip12", |b| {
        b.iter(|| derive_coefficients(black_box(&spec), 1e-10).unwrap())
    });
}

fn homotopy(c: &mut Criterion) {
    let mut group = c.benchmark_group("homotopy");
    group.sample_size(10);
    for n in [4, 6, 8] {
        for (name, spec) in [("xxx", xxx(n)), ("pip", pip(n))] {
            group.bench_with_input(BenchmarkId::new(name, n), &spec, |b, spec| {
                b.iter(|| solve_all_homotopy(black_box(spec), &HomotopyOptions::default()).unwrap())
            });
        }
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("joint_spectrum");
    group.sample_size(10);
    for n in [4, 6, 8] {
        let spec = xxx(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &spec, |b, spec| {
            b.iter(|| joint_spectrum(black_box(spec), &OracleOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, charges, derive, homotopy, oracle);
criterion_main!(benches);
