//! Cross-validation of the jet-based differential operators against
//! independent finite-difference and linear-algebra oracles.

use canard_core::diffgeo::{
    classify_matrix, eigen_small, gradient, hessian, jacobian, trajectory_jets, Classification,
    LinearField, ScalarField,
};
use canard_core::expr::{CompiledExpr, Expr};
use canard_core::jet::JetScalar;
use canard_core::NumError;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;

/// An expression-backed scalar field, the way user code plugs formulas into
/// the differential operators.
struct FormulaField {
    compiled: CompiledExpr,
    n: usize,
}

impl FormulaField {
    fn new(src: &str, vars: &[&str]) -> FormulaField {
        let e = Expr::parse(src).expect("valid formula");
        let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let compiled =
            CompiledExpr::compile(&e, &names, &BTreeMap::new()).expect("all names bound");
        FormulaField {
            compiled,
            n: vars.len(),
        }
    }
}

impl ScalarField for FormulaField {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<C, NumError> {
        self.compiled.eval(x)
    }
}

/// Central difference with one Richardson extrapolation step: error O(h⁴).
fn fd_partial(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let d = |h: f64| {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        (f(&xp) - f(&xm)) / (2.0 * h)
    };
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len()).map(|i| fd_partial(f, x, i, h)).collect()
}

fn fd_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut m = vec![vec![0.0; n]; n];
    #[allow(clippy::needless_range_loop)]
    for j in 0..n {
        // Row j of H = gradient of ∂f/∂xⱼ.
        let dj = |y: &[f64]| fd_partial(f, y, j, h);
        let row = fd_gradient(&dj, x, h);
        m[j] = row;
    }
    // Symmetrize: the true Hessian is symmetric, FD noise is not.
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = avg;
            m[j][i] = avg;
        }
    }
    m
}

fn rel_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs())),
        "{what}: {a} vs {b}"
    );
}

#[test]
fn jet_gradient_and_hessian_match_finite_differences() {
    let fields = [
        FormulaField::new("sin(x*y) + x^3/3 - y/(1 + x^2)", &["x", "y"]),
        FormulaField::new("exp(x/4)*cos(y) + z^2*x - tanh(z*y)", &["x", "y", "z"]),
    ];
    let mut rng = StdRng::seed_from_u64(41);
    for field in &fields {
        let n = field.dim();
        for _ in 0..25 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
            let f = |y: &[f64]| field.eval(y).expect("smooth in the box");
            let g_jet = gradient(field, &x).expect("gradient");
            let g_fd = fd_gradient(&f, &x, 1e-3);
            for (a, b) in g_jet.iter().zip(&g_fd) {
                rel_close(*a, *b, 1e-7, "gradient entry");
            }
            let h_jet = hessian(field, &x).expect("hessian");
            let h_fd = fd_hessian(&f, &x, 1e-3);
            for (ra, rb) in h_jet.iter().zip(&h_fd) {
                for (a, b) in ra.iter().zip(rb) {
                    rel_close(*a, *b, 1e-5, "hessian entry");
                }
            }
        }
    }
}

fn random_matrix(rng: &mut StdRng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect()
}

fn det_complex(a: &[Vec<Complex64>]) -> Complex64 {
    match a.len() {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        _ => unreachable!("test uses n <= 3"),
    }
}

fn det_real(a: &[Vec<f64>]) -> f64 {
    let c: Vec<Vec<Complex64>> = a
        .iter()
        .map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)).collect())
        .collect();
    det_complex(&c).re
}

/// Vieta's formulas: the eigenvalues of 1000 random matrices must multiply
/// to the determinant and sum to the trace.
#[test]
fn eigenvalues_satisfy_vieta() {
    let mut rng = StdRng::seed_from_u64(42);
    for k in 0..1000 {
        let n = if k % 2 == 0 { 2 } else { 3 };
        let a = random_matrix(&mut rng, n);
        let eigs = eigen_small(&a).expect("eigenvalues");
        assert_eq!(eigs.len(), n);
        let sum: Complex64 = eigs.iter().sum();
        let prod: Complex64 = eigs.iter().product();
        let trace: f64 = (0..n).map(|i| a[i][i]).sum();
        let det = det_real(&a);
        rel_close(sum.re, trace, 1e-9, "sum vs trace (re)");
        assert!(sum.im.abs() <= 1e-9 * (1.0 + trace.abs()), "sum im {}", sum.im);
        rel_close(prod.re, det, 1e-9, "product vs det (re)");
        assert!(prod.im.abs() <= 1e-9 * (1.0 + det.abs()), "prod im {}", prod.im);
    }
}

/// Every reported eigenvalue is a root of the characteristic polynomial:
/// |det(A − λI)| below an ‖A‖-scaled bound.
#[test]
fn eigenvalues_annihilate_characteristic_polynomial() {
    let mut rng = StdRng::seed_from_u64(43);
    for k in 0..400 {
        let n = if k % 2 == 0 { 2 } else { 3 };
        let a = random_matrix(&mut rng, n);
        let norm: f64 = a
            .iter()
            .map(|r| r.iter().map(|v| f64::abs(*v)).sum::<f64>())
            .fold(0.0, f64::max);
        let eigs = eigen_small(&a).expect("eigenvalues");
        for lam in eigs {
            let shifted: Vec<Vec<Complex64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let d = if i == j { lam } else { Complex64::new(0.0, 0.0) };
                            Complex64::new(a[i][j], 0.0) - d
                        })
                        .collect()
                })
                .collect();
            let p = det_complex(&shifted).norm();
            assert!(
                p <= 1e-8 * (1.0 + norm).powi(3),
                "char-poly residual {p} for eigenvalue {lam} (norm {norm})"
            );
        }
    }
}

/// For ẋ = Ax the k-th trajectory derivative at x₀ is Aᵏx₀ exactly.
#[test]
fn linear_field_trajectory_jets_are_matrix_powers() {
    let mut rng = StdRng::seed_from_u64(44);
    for _ in 0..50 {
        let a = random_matrix(&mut rng, 3);
        let field = LinearField::new(a.clone()).expect("square");
        let x0: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let jets = trajectory_jets(&field, &x0, 4).expect("jets");
        assert_eq!(jets.len(), 5);
        let mut expect = x0.clone();
        for (k, col) in jets.iter().enumerate() {
            if k > 0 {
                let next: Vec<f64> = (0..3)
                    .map(|i| (0..3).map(|j| a[i][j] * expect[j]).sum())
                    .collect();
                expect = next;
            }
            for (got, want) in col.iter().zip(&expect) {
                rel_close(*got, *want, 1e-12, "trajectory jet column");
            }
        }
    }
}

/// The Jacobian of a linear field is its matrix, anywhere.
#[test]
fn jacobian_of_linear_field_is_the_matrix() {
    let mut rng = StdRng::seed_from_u64(45);
    let a = random_matrix(&mut rng, 3);
    let field = LinearField::new(a.clone()).expect("square");
    for _ in 0..10 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let j = jacobian(&field, &x).expect("jacobian");
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(j[i][k], a[i][k], "entry ({i},{k})");
            }
        }
    }
}

/// Away from classification boundaries, the eigenvalue-based labels match
/// the trace–determinant inequalities.
#[test]
fn classification_matches_trace_determinant_chart() {
    let mut rng = StdRng::seed_from_u64(46);
    let mut checked = 0;
    while checked < 300 {
        let a = random_matrix(&mut rng, 2);
        let trace = a[0][0] + a[1][1];
        let delta = det_real(&a);
        let disc = trace * trace / 4.0 - delta;
        // Skip near-boundary samples: the classifier's dead zone is exact
        // arithmetic territory, not what this property checks.
        if delta.abs() < 0.1 || disc.abs() < 0.1 {
            continue;
        }
        let report = classify_matrix(&a).expect("classification");
        let expected = if delta < 0.0 {
            Classification::Saddle
        } else if disc > 0.0 {
            Classification::Node
        } else {
            Classification::Focus
        };
        assert_eq!(
            report.classification, expected,
            "trace {trace}, delta {delta}, disc {disc}"
        );
        checked += 1;
    }
}
