//! Benchmarks for the hot paths: expression evaluation, eigensolves,
//! curvature Hessian tests, pseudo-singular search, and integration.

use canard_bench::{chua3_default, chua4_default};
use canard_core::curvature::curvature_hessian_test;
use canard_core::diffgeo::{classify_matrix, eigen_small};
use canard_core::odeint::{integrate, Samples, SolverOpts, StepMode};
use canard_core::pseudosing::find_pseudo_singular;
use canard_core::VectorField;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_expr_eval(c: &mut Criterion) {
    let sys = chua3_default();
    let reduced = sys.reduce();
    let x = [0.3, 1.7];
    c.bench_function("reduced_field_eval_chua3", |b| {
        b.iter(|| reduced.eval(black_box(&x)).expect("eval"))
    });
}

fn bench_eigen(c: &mut Criterion) {
    let a = vec![
        vec![0.0, -5.0, 5.0],
        vec![1.2857, 1.2857, 0.0],
        vec![0.0, 1.0, -1.0],
    ];
    c.bench_function("eigen_small_3x3", |b| {
        b.iter(|| eigen_small(black_box(&a)).expect("eigen"))
    });
    c.bench_function("classify_matrix_3x3", |b| {
        b.iter(|| classify_matrix(black_box(&a)).expect("classify"))
    });
}

fn bench_hessian_test(c: &mut Criterion) {
    let sys = chua3_default();
    let reduced = sys.reduce();
    let m = [1.0, 1.0];
    c.bench_function("curvature_hessian_test_chua3_at_m", |b| {
        b.iter(|| curvature_hessian_test(&reduced, black_box(&m)).expect("hessian test"))
    });
}

fn bench_search(c: &mut Criterion) {
    let sys = chua3_default();
    let sbox = [(-2.0, 2.0); 3];
    c.bench_function("pseudo_singular_search_chua3_grid6", |b| {
        b.iter(|| find_pseudo_singular(black_box(&sys), &sbox, 6).expect("search"))
    });
    let sys4 = chua4_default();
    let sbox4 = [(-2.0, 2.0), (-1.0, 1.0), (-2.0, 2.0), (-2.0, 2.0)];
    c.bench_function("pseudo_singular_search_chua4_grid4", |b| {
        b.iter(|| find_pseudo_singular(black_box(&sys4), &sbox4, 4).expect("search"))
    });
}

fn bench_integrate(c: &mut Criterion) {
    let sys = chua3_default();
    let field = sys.full_vector_field().expect("epsilon > 0");
    let x0 = [-2.0 / 3.0, 0.0, 2.0];
    let opts = SolverOpts {
        samples: Samples::Uniform(10),
        ..SolverOpts::default()
    };
    c.bench_function("integrate_chua3_one_slow_unit_adaptive", |b| {
        b.iter(|| integrate(&field, black_box(&x0), (0.0, 1.0), &opts).expect("integrate"))
    });
    let fixed = SolverOpts {
        mode: StepMode::FixedRk4(1e-3),
        samples: Samples::Uniform(10),
        ..SolverOpts::default()
    };
    c.bench_function("integrate_chua3_one_slow_unit_rk4_1e-3", |b| {
        b.iter(|| integrate(&field, black_box(&x0), (0.0, 1.0), &fixed).expect("integrate"))
    });
}

criterion_group!(
    benches,
    bench_expr_eval,
    bench_eigen,
    bench_hessian_test,
    bench_search,
    bench_integrate
);
criterion_main!(benches);
