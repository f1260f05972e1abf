use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cslab_bench::{half_blowup_time, resonant_coeffs, resonant_datum, TRUNCATIONS};
use cslab_core::closed_form::{hs_norm_closed, solution_coeffs};
use cslab_core::explicit::{reconstruct_coeffs, ExplicitSolver};
use cslab_core::oracle::Stepper;
use cslab_core::resonance::radius_scan;
use cslab_core::LaxMatrix;

fn lax(c: &mut Criterion) {
    let mut g = c.benchmark_group("lax_build_and_eigensolve");
    for n in TRUNCATIONS {
        let u = resonant_coeffs(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| {
            b.iter(|| LaxMatrix::build(black_box(u)).spectrum().unwrap())
        });
    }
    g.finish();
}

fn explicit(c: &mut Criterion) {
    let t = half_blowup_time();
    let mut g = c.benchmark_group("explicit_reconstruct_coeffs");
    g.sample_size(20);
    for n in TRUNCATIONS {
        let solver = ExplicitSolver::new(resonant_coeffs(n)).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &solver, |b, s| {
            b.iter(|| reconstruct_coeffs(&s.state(black_box(t)), n).unwrap())
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle_step");
    for n in [64, 128] {
        let stepper = Stepper::new(n, 1e-4).unwrap();
        let u = resonant_coeffs(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| {
            b.iter(|| stepper.step(black_box(u)).unwrap())
        });
    }
    g.finish();
}

fn closed_form(c: &mut Criterion) {
    let d = resonant_datum();
    let t = half_blowup_time();
    c.bench_function("closed_form_coeffs_256", |b| {
        b.iter(|| solution_coeffs(&d, black_box(t), 256).unwrap())
    });
    let near = 2.0 * t - 1e-3;
    let mut g = c.benchmark_group("hs_norm_near_blowup");
    g.sample_size(10);
    g.bench_function("s=1", |b| b.iter(|| hs_norm_closed(&d, black_box(near), 1.0).unwrap()));
    g.finish();
    c.bench_function("radius_scan_1024", |b| b.iter(|| radius_scan(black_box(&d), 1024)));
}

criterion_group!(benches, lax, explicit, oracle, closed_form);
criterion_main!(benches);
