//! Benchmarks for the three hot paths: the full condition checklist, the
//! boundary-locus sweep, and a coupled solve of the linear oscillation.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use peeroc_core::analysis::condition_report;
use peeroc_core::kkt::{solve_kkt, NewtonOptions};
use peeroc_core::problems::wave;
use peeroc_core::stability::boundary_locus;
use peeroc_core::triplets::{builtin_names, load_triplet};
use std::hint::black_box;

fn bench_condition_suite(c: &mut Criterion) {
    let trips: Vec<_> = builtin_names()
        .iter()
        .map(|n| load_triplet(n).unwrap())
        .collect();
    c.bench_function("condition_suite_all_builtins", |b| {
        b.iter(|| {
            for t in &trips {
                black_box(condition_report(t, 1e-8).unwrap());
            }
        })
    });
}

fn bench_boundary_locus(c: &mut Criterion) {
    let trip = load_triplet("AP4o43sil").unwrap();
    let st = &trip.coeffs.standard;
    c.bench_function("boundary_locus_3600_samples", |b| {
        b.iter(|| black_box(boundary_locus(&st.a, &st.b, &st.k, 3600).unwrap()))
    });
}

fn bench_wave_solve(c: &mut Criterion) {
    let trip = load_triplet("AP4o43die").unwrap();
    let prob = wave(16.0);
    c.bench_function("wave_solve_die_160_steps", |b| {
        b.iter_batched(
            NewtonOptions::default,
            |opts| black_box(solve_kkt(&trip, &prob, 159, &opts).unwrap()),
            BatchSize::SmallInput,
        )
    });
}

criterion_group! {
    name = suites;
    config = Criterion::default().sample_size(20);
    targets = bench_condition_suite, bench_boundary_locus, bench_wave_solve
}
criterion_main!(suites);
