//! Jet-based differential machinery: time-derivatives of trajectories under
//! a vector field, Jacobians, gradients, Hessians, small determinants, and
//! closed-form eigensolvers for 2×2/3×3 matrices with spectrum
//! classification.
//!
//! Everything here is a pure function of immutable inputs; all operations
//! are reentrant and safe to call from parallel parameter sweeps.

use crate::error::{Error, NumError, Result};
use crate::jet::{Jet2, JetScalar, TimeJet};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;

/// A vector field F: ℝⁿ → ℝⁿ evaluable over any jet scalar.
///
/// Implementors supply `eval_generic`, which must be a fixed arithmetic
/// straight-line program of its inputs: evaluating it on jets then yields
/// exact derivatives of the same program.
pub trait VectorField {
    fn dim(&self) -> usize;

    fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<Vec<C>, NumError>;

    /// Plain-real evaluation.
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, NumError> {
        self.eval_generic(x)
    }
}

impl<T: VectorField + ?Sized> VectorField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<Vec<C>, NumError> {
        (**self).eval_generic(x)
    }
}

/// A scalar field φ: ℝⁿ → ℝ evaluable over any jet scalar.
pub trait ScalarField {
    fn dim(&self) -> usize;

    fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<C, NumError>;

    fn eval(&self, x: &[f64]) -> Result<f64, NumError> {
        self.eval_generic(x)
    }
}

/// Linear field ẋ = A·x; used by identity tests and benchmarks.
#[derive(Debug, Clone)]
pub struct LinearField {
    a: Vec<Vec<f64>>,
}

impl LinearField {
    /// `a` must be square (n ≤ 6).
    pub fn new(a: Vec<Vec<f64>>) -> Result<LinearField> {
        let n = a.len();
        if n == 0 || n > 6 || a.iter().any(|row| row.len() != n) {
            return Err(Error::Precondition(
                "LinearField requires a square matrix of dimension 1..=6".into(),
            ));
        }
        Ok(LinearField { a })
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.a
    }
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<Vec<C>, NumError> {
        let n = self.a.len();
        let mut out = Vec::with_capacity(n);
        for row in &self.a {
            let mut acc = x[0].scale(row[0]);
            for j in 1..n {
                acc = acc.add(&x[j].scale(row[j]));
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// Uncoupled diagonal linear field ẋᵢ = λᵢxᵢ.
#[derive(Debug, Clone)]
pub struct DiagonalField {
    lambda: Vec<f64>,
}

impl DiagonalField {
    pub fn new(lambda: Vec<f64>) -> Result<DiagonalField> {
        if lambda.is_empty() || lambda.len() > 6 {
            return Err(Error::Precondition(
                "DiagonalField requires 1..=6 rates".into(),
            ));
        }
        Ok(DiagonalField { lambda })
    }

    pub fn rates(&self) -> &[f64] {
        &self.lambda
    }
}

impl VectorField for DiagonalField {
    fn dim(&self) -> usize {
        self.lambda.len()
    }

    fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<Vec<C>, NumError> {
        Ok(x.iter()
            .zip(&self.lambda)
            .map(|(xi, li)| xi.scale(*li))
            .collect())
    }
}

// ---------------------------------------------------------------------------
// Trajectory jets
// ---------------------------------------------------------------------------

/// Maximum derivative order supported by [`trajectory_jets`].
pub const MAX_TRAJECTORY_ORDER: usize = 6;

/// j-th Taylor coefficient of a series, treating coefficients beyond the
/// series' retained order as exact zeros. That reading is only valid for
/// series arising as genuinely constant field components (which is the one
/// way an output series can be shorter than the state series feeding it).
fn coeff_or_zero<C: JetScalar>(s: &TimeJet<C>, j: usize) -> C {
    if j <= s.order() {
        s.coeff(j).clone()
    } else {
        s.coeff(0).scale(0.0)
    }
}

/// Time-derivatives of the trajectory of `field` through `x0`, over any jet
/// scalar: returns `k+1` vectors `[X, Ẋ, Ẍ, …, X⁽ᵏ⁾]`.
///
/// The solution's Taylor series is grown one order at a time: with the state
/// series known to order j, the field applied to it is a series whose j-th
/// coefficient determines the state coefficient c_{j+1} = fⱼ/(j+1).
pub fn trajectory_jets_generic<C, F>(
    field: &F,
    x0: &[C],
    k: usize,
) -> Result<Vec<Vec<C>>>
where
    C: JetScalar,
    F: VectorField + ?Sized,
{
    if !(1..=MAX_TRAJECTORY_ORDER).contains(&k) {
        return Err(Error::Precondition(format!(
            "trajectory_jets order k={k} out of range 1..={MAX_TRAJECTORY_ORDER}"
        )));
    }
    let n = field.dim();
    if x0.len() != n {
        return Err(Error::Precondition(format!(
            "trajectory_jets point has {} coordinates, field has dimension {n}",
            x0.len()
        )));
    }
    let mut state: Vec<TimeJet<C>> = x0
        .iter()
        .map(|v| TimeJet::from_coeffs(std::slice::from_ref(v)))
        .collect();
    for j in 0..k {
        let f = field.eval_generic(&state)?;
        for i in 0..n {
            let cj = coeff_or_zero(&f[i], j);
            state[i].push_coeff(cj.scale(1.0 / (j + 1) as f64));
        }
    }
    Ok((0..=k)
        .map(|j| state.iter().map(|s| s.derivative(j)).collect())
        .collect())
}

/// Plain-real [`trajectory_jets_generic`].
pub fn trajectory_jets<F>(field: &F, x0: &[f64], k: usize) -> Result<Vec<Vec<f64>>>
where
    F: VectorField + ?Sized,
{
    trajectory_jets_generic(field, x0, k)
}

// ---------------------------------------------------------------------------
// Jacobian / gradient / Hessian
// ---------------------------------------------------------------------------

fn grad_entry(v: &Jet2<f64>, j: usize, n: usize) -> f64 {
    // A genuinely constant output carries no derivative directions.
    if v.dim() == n {
        *v.grad(j)
    } else {
        0.0
    }
}

fn hess_entry(v: &Jet2<f64>, i: usize, j: usize, n: usize) -> f64 {
    if v.dim() == n {
        *v.hess(i, j)
    } else {
        0.0
    }
}

/// Functional Jacobian matrix: entry (i,j) = ∂Fᵢ/∂xⱼ, by exact jets.
pub fn jacobian<F>(field: &F, x: &[f64]) -> Result<Vec<Vec<f64>>>
where
    F: VectorField + ?Sized,
{
    let n = field.dim();
    if x.len() != n {
        return Err(Error::Precondition(format!(
            "jacobian point has {} coordinates, field has dimension {n}",
            x.len()
        )));
    }
    let seeds: Vec<Jet2<f64>> = (0..n).map(|i| Jet2::variable(n, i, x[i])).collect();
    let f = field.eval_generic(&seeds)?;
    Ok(f.iter()
        .map(|fi| (0..n).map(|j| grad_entry(fi, j, n)).collect())
        .collect())
}

/// Exact gradient of a scalar field via second-order jets.
pub fn gradient<S>(scalar: &S, x: &[f64]) -> Result<Vec<f64>>
where
    S: ScalarField + ?Sized,
{
    let n = scalar.dim();
    if x.len() != n {
        return Err(Error::Precondition(format!(
            "gradient point has {} coordinates, field has dimension {n}",
            x.len()
        )));
    }
    let seeds: Vec<Jet2<f64>> = (0..n).map(|i| Jet2::variable(n, i, x[i])).collect();
    let v = scalar.eval_generic(&seeds)?;
    Ok((0..n).map(|j| grad_entry(&v, j, n)).collect())
}

/// Exact Hessian of a scalar field via second-order jets, symmetrized by
/// averaging (the raw jet already carries one triangle; averaging makes the
/// returned matrix exactly symmetric).
pub fn hessian<S>(scalar: &S, x: &[f64]) -> Result<Vec<Vec<f64>>>
where
    S: ScalarField + ?Sized,
{
    let n = scalar.dim();
    if x.len() != n {
        return Err(Error::Precondition(format!(
            "hessian point has {} coordinates, field has dimension {n}",
            x.len()
        )));
    }
    let seeds: Vec<Jet2<f64>> = (0..n).map(|i| Jet2::variable(n, i, x[i])).collect();
    let v = scalar.eval_generic(&seeds)?;
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            h[i][j] = 0.5 * (hess_entry(&v, i, j, n) + hess_entry(&v, j, i, n));
        }
    }
    Ok(h)
}

// ---------------------------------------------------------------------------
// Determinants
// ---------------------------------------------------------------------------

/// Determinant of a real n×n matrix, n ≤ 6, by partial-pivot elimination.
pub fn det_f64(m: &[Vec<f64>]) -> Result<f64> {
    let n = m.len();
    if n == 0 || n > 6 || m.iter().any(|row| row.len() != n) {
        return Err(Error::Precondition(
            "det_f64 requires a square matrix of dimension 1..=6".into(),
        ));
    }
    let mut a = [[0.0f64; 6]; 6];
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(NumError::NonFinite("det_f64 input".into()).into());
            }
            a[i][j] = *v;
        }
    }
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col] == 0.0 {
            return Ok(0.0);
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in (col + 1)..n {
            let factor = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    Ok(det)
}

/// Division-free cofactor determinant over any jet scalar, n ∈ {1,2,3}.
/// This is the path used where the determinant itself must stay a jet
/// (flow-curvature gradients and Hessians).
pub fn det_small<C: JetScalar>(rows: &[Vec<C>]) -> Result<C, NumError> {
    let n = rows.len();
    if rows.iter().any(|row| row.len() != n) {
        return Err(NumError::Shape("det_small requires a square matrix".into()));
    }
    match n {
        1 => Ok(rows[0][0].clone()),
        2 => Ok(rows[0][0]
            .mul(&rows[1][1])
            .sub(&rows[0][1].mul(&rows[1][0]))),
        3 => {
            let m = rows;
            let c0 = m[1][1].mul(&m[2][2]).sub(&m[1][2].mul(&m[2][1]));
            let c1 = m[1][0].mul(&m[2][2]).sub(&m[1][2].mul(&m[2][0]));
            let c2 = m[1][0].mul(&m[2][1]).sub(&m[1][1].mul(&m[2][0]));
            Ok(m[0][0]
                .mul(&c0)
                .sub(&m[0][1].mul(&c1))
                .add(&m[0][2].mul(&c2)))
        }
        _ => Err(NumError::Shape(format!(
            "det_small supports dimensions 1..=3, got {n}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Small eigensolver
// ---------------------------------------------------------------------------

fn max_abs_entry(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, v| acc.max(f64::abs(*v)))
}

/// One or two real-Newton polish steps on the monic characteristic
/// polynomial, keeping whichever iterate has the smaller residual.
fn polish_real(coeffs: &[f64], mut x: f64) -> f64 {
    let eval = |x: f64| {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in coeffs {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };
    for _ in 0..3 {
        let (p, dp) = eval(x);
        if p == 0.0 || dp == 0.0 {
            break;
        }
        let next = x - p / dp;
        if !next.is_finite() {
            break;
        }
        let (pn, _) = eval(next);
        if pn.abs() < p.abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

fn polish_complex(coeffs: &[f64], mut z: Complex64) -> Complex64 {
    let eval = |z: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in coeffs {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    for _ in 0..3 {
        let (p, dp) = eval(z);
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        let (pn, _) = eval(next);
        if pn.norm() < p.norm() {
            z = next;
        } else {
            break;
        }
    }
    z
}

fn eig2(b: &[Vec<f64>]) -> Vec<Complex64> {
    let t = b[0][0] + b[1][1];
    let d = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let coeffs = [1.0, -t, d];
    let disc = t * t / 4.0 - d;
    if disc >= 0.0 {
        let r = disc.sqrt();
        // Stable quadratic: form the larger-magnitude root first, recover
        // the other from the product to avoid cancellation.
        let (l1, l2) = if t == 0.0 {
            (r, -r)
        } else {
            let big = t / 2.0 + f64::copysign(r, t);
            (big, if big == 0.0 { 0.0 } else { d / big })
        };
        vec![
            Complex64::new(polish_real(&coeffs, l1), 0.0),
            Complex64::new(polish_real(&coeffs, l2), 0.0),
        ]
    } else {
        let im = (-disc).sqrt();
        let z = polish_complex(&coeffs, Complex64::new(t / 2.0, im));
        vec![z, z.conj()]
    }
}

fn eig3(b: &[Vec<f64>]) -> Vec<Complex64> {
    let t = b[0][0] + b[1][1] + b[2][2];
    let s = b[0][0] * b[1][1] - b[0][1] * b[1][0] + b[0][0] * b[2][2]
        - b[0][2] * b[2][0]
        + b[1][1] * b[2][2]
        - b[1][2] * b[2][1];
    let d = det_f64(b).expect("3x3 finite");
    // Characteristic polynomial λ³ − Tλ² + Sλ − Δ; depress with λ = μ + T/3.
    let coeffs = [1.0, -t, s, -d];
    let p = s - t * t / 3.0;
    let q = -2.0 * t * t * t / 27.0 + t * s / 3.0 - d;
    let shift = t / 3.0;
    let disc = 4.0 * p * p * p + 27.0 * q * q;
    if p == 0.0 && q == 0.0 {
        let l = polish_real(&coeffs, shift);
        return vec![Complex64::new(l, 0.0); 3];
    }
    if disc <= 0.0 && p < 0.0 {
        // Three real roots: trigonometric form, immune to cancellation.
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| {
                let mu = m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
                Complex64::new(polish_real(&coeffs, mu + shift), 0.0)
            })
            .collect()
    } else {
        // One real root and a conjugate pair: Cardano with the stable
        // choice of cube root (avoids cancellation in u) and v = −p/(3u).
        let dd = (disc / 108.0).max(0.0);
        let u = (-q / 2.0 - f64::copysign(dd.sqrt(), q)).cbrt();
        let v = if u == 0.0 { 0.0 } else { -p / (3.0 * u) };
        let real = polish_real(&coeffs, u + v + shift);
        let re = -(u + v) / 2.0 + shift;
        let im = (3.0f64.sqrt() / 2.0) * (u - v);
        let z = polish_complex(&coeffs, Complex64::new(re, im.abs()));
        // The characteristic polynomial is real, so complex roots pair up.
        vec![Complex64::new(real, 0.0), z, z.conj()]
    }
}

/// Eigenvalues of a real 2×2 or 3×3 matrix by closed-form quadratic/cubic
/// with max-entry balancing and Newton polish, sorted by real part
/// descending, then imaginary part ascending.
pub fn eigen_small(a: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    let n = a.len();
    if !(n == 2 || n == 3) || a.iter().any(|row| row.len() != n) {
        return Err(Error::Precondition(
            "eigen_small requires a square matrix of dimension 2 or 3".into(),
        ));
    }
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(NumError::NonFinite("eigen_small input".into()).into());
    }
    let scale = max_abs_entry(a);
    if scale == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let b: Vec<Vec<f64>> = a
        .iter()
        .map(|row| row.iter().map(|v| v / scale).collect())
        .collect();
    let mut eigs = if n == 2 { eig2(&b) } else { eig3(&b) };
    for e in &mut eigs {
        *e *= scale;
    }
    eigs.sort_by(|x, y| {
        y.re.partial_cmp(&x.re)
            .expect("finite")
            .then(x.im.partial_cmp(&y.im).expect("finite"))
    });
    Ok(eigs)
}

// ---------------------------------------------------------------------------
// Spectrum classification
// ---------------------------------------------------------------------------

/// Equilibrium type of a lin(earized) field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Saddle,
    DegenerateSaddle,
    Node,
    Focus,
    Indeterminate,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::Saddle => "Saddle",
            Classification::DegenerateSaddle => "DegenerateSaddle",
            Classification::Node => "Node",
            Classification::Focus => "Focus",
            Classification::Indeterminate => "Indeterminate",
        };
        f.write_str(s)
    }
}

/// Invariants, eigenvalues, and classification of a 2×2 or 3×3 real matrix.
///
/// `delta` is the determinant and `trace` the trace; for 3×3, `s` is the sum
/// of principal 2×2 minors and `p`, `q`, `r` are the depressed-cubic
/// discriminant quantities P = S − T²/3, Q = −2T³/27 + TS/3 − Δ,
/// R = 4P³ + 27Q².
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub dimension: usize,
    pub delta: f64,
    pub trace: f64,
    pub s: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub classification: Classification,
    pub notes: Vec<String>,
}

/// Sign with a dead zone: −1, 0, +1.
fn tsign(v: f64, tol: f64) -> i8 {
    if v.abs() <= tol {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

fn classify_eigenvalues(eigs: &[Complex64], tol: f64) -> Classification {
    let n = eigs.len();
    let is_zero = |z: &Complex64| z.norm() <= tol;
    let is_real = |z: &Complex64| z.im.abs() <= tol;
    let zeros = eigs.iter().filter(|z| is_zero(z)).count();
    let has_complex = eigs.iter().any(|z| !is_real(z) && !is_zero(z));
    if n == 2 {
        if zeros > 0 {
            return Classification::Indeterminate;
        }
        if has_complex {
            return Classification::Focus;
        }
        if eigs[0].re > 0.0 && eigs[1].re < 0.0 || eigs[0].re < 0.0 && eigs[1].re > 0.0 {
            Classification::Saddle
        } else {
            Classification::Node
        }
    } else {
        if zeros == 1 {
            let rest: Vec<&Complex64> = eigs.iter().filter(|z| !is_zero(z)).collect();
            if rest.len() == 2
                && rest.iter().all(|z| is_real(z))
                && rest[0].re * rest[1].re < 0.0
            {
                return Classification::DegenerateSaddle;
            }
            return Classification::Indeterminate;
        }
        if zeros > 1 {
            return Classification::Indeterminate;
        }
        if has_complex {
            return Classification::Focus;
        }
        let pos = eigs.iter().filter(|z| z.re > 0.0).count();
        if pos == 0 || pos == n {
            Classification::Node
        } else {
            Classification::Saddle
        }
    }
}

/// Label implied by the determinant/trace/discriminant inequalities alone,
/// used as a cross-check against the eigenvalue-based classification.
fn classify_inequalities(
    dim: usize,
    delta: f64,
    trace: f64,
    s: Option<f64>,
    r: Option<f64>,
    tol_inv: f64,
) -> Classification {
    if dim == 2 {
        match tsign(delta, tol_inv) {
            -1 => Classification::Saddle,
            0 => Classification::Indeterminate,
            _ => match tsign(trace * trace / 4.0 - delta, tol_inv) {
                1 => Classification::Node,
                -1 => Classification::Focus,
                _ => Classification::Indeterminate,
            },
        }
    } else {
        let s = s.expect("3D invariants");
        let r = r.expect("3D invariants");
        let t2 = trace * trace;
        if tsign(delta, tol_inv) == 0 && s < 0.0 {
            return Classification::DegenerateSaddle;
        }
        match tsign(r, tol_inv) {
            1 => Classification::Focus,
            -1 => {
                if s < t2 / 3.0 && delta < 0.0 {
                    Classification::Saddle
                } else if delta > 0.0 {
                    Classification::Node
                } else {
                    Classification::Indeterminate
                }
            }
            _ => Classification::Indeterminate,
        }
    }
}

/// Full spectrum analysis of a 2×2 or 3×3 real matrix: invariants,
/// eigenvalues, and equilibrium classification.
///
/// Classification is decided from the eigenvalues, with λ treated as zero
/// (resp. real) when |λ| (resp. |Im λ|) ≤ 1e−9·(1+‖A‖); the inequality
/// criteria on Δ, T, S, R are evaluated independently and any disagreement
/// with the eigenvalue-based label is recorded in `notes`, never silently
/// resolved.
pub fn classify_matrix(a: &[Vec<f64>]) -> Result<SpectrumReport> {
    let n = a.len();
    if !(n == 2 || n == 3) || a.iter().any(|row| row.len() != n) {
        return Err(Error::Precondition(
            "classify_matrix requires a square matrix of dimension 2 or 3".into(),
        ));
    }
    let eigenvalues = eigen_small(a)?;
    let scale = max_abs_entry(a);
    let tol = 1e-9 * (1.0 + scale);
    let delta = det_f64(a)?;
    let trace = (0..n).map(|i| a[i][i]).sum();
    let (s, p, q, r) = if n == 3 {
        let s = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2]
            - a[0][2] * a[2][0]
            + a[1][1] * a[2][2]
            - a[1][2] * a[2][1];
        let t: f64 = trace;
        let p = s - t * t / 3.0;
        let q = -2.0 * t * t * t / 27.0 + t * s / 3.0 - delta;
        let r = 4.0 * p * p * p + 27.0 * q * q;
        (Some(s), Some(p), Some(q), Some(r))
    } else {
        (None, None, None, None)
    };
    let classification = classify_eigenvalues(&eigenvalues, tol);
    // Invariants scale like powers of the entries; give the inequality
    // cross-check a dead zone of matching order.
    let tol_inv = 1e-9 * (1.0 + scale).powi(n as i32);
    let by_ineq = classify_inequalities(n, delta, trace, s, r, tol_inv);
    let mut notes = Vec::new();
    if by_ineq != classification {
        notes.push(format!(
            "inequality-based label {by_ineq} disagrees with eigenvalue-based \
             classification {classification} (delta={delta:.6e}, trace={trace:.6e}{})",
            match (s, r) {
                (Some(s), Some(r)) => format!(", s={s:.6e}, r={r:.6e}"),
                _ => String::new(),
            }
        ));
    }
    Ok(SpectrumReport {
        dimension: n,
        delta,
        trace,
        s,
        p,
        q,
        r,
        eigenvalues,
        classification,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol * (1.0 + b.abs()),
            "expected {b}, got {a} (tol {tol})"
        );
    }

    #[test]
    fn trajectory_jets_exponential() {
        // ẋ = λx at x = 2: derivative j is 2λʲ.
        let lambda = 0.7;
        let f = DiagonalField::new(vec![lambda]).expect("field");
        let jets = trajectory_jets(&f, &[2.0], 3).expect("jets");
        assert_eq!(jets.len(), 4);
        for (j, v) in jets.iter().enumerate() {
            approx(v[0], 2.0 * lambda.powi(j as i32), 1e-14);
        }
    }

    #[test]
    fn trajectory_jets_linear_matrix_powers() {
        // ẋ = Ax: derivative j is Aʲx, exactly.
        let a = vec![vec![0.3, -1.2], vec![0.8, 0.5]];
        let f = LinearField::new(a.clone()).expect("field");
        let x0 = [1.0, -2.0];
        let jets = trajectory_jets(&f, &x0, 4).expect("jets");
        let mut expect = x0.to_vec();
        approx(jets[0][0], expect[0], 1e-12);
        approx(jets[0][1], expect[1], 1e-12);
        for j in 1..=4 {
            expect = (0..2)
                .map(|i| a[i][0] * expect[0] + a[i][1] * expect[1])
                .collect();
            approx(jets[j][0], expect[0], 1e-12);
            approx(jets[j][1], expect[1], 1e-12);
        }
    }

    #[test]
    fn trajectory_jets_zero_at_equilibrium() {
        let f = LinearField::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).expect("field");
        let jets = trajectory_jets(&f, &[0.0, 0.0], 5).expect("jets");
        for v in &jets[1..] {
            assert!(v.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn trajectory_jets_second_derivative_is_jf() {
        // Ẍ = J_F(X)·F(X) for autonomous fields.
        struct Cubic;
        impl VectorField for Cubic {
            fn dim(&self) -> usize {
                2
            }
            fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<Vec<C>, NumError> {
                // (x² − y, x·y + 1)
                Ok(vec![
                    x[0].mul(&x[0]).sub(&x[1]),
                    x[0].mul(&x[1]).add(&C::one()),
                ])
            }
        }
        let x = [0.7, -1.3];
        let jets = trajectory_jets(&Cubic, &x, 2).expect("jets");
        let jac = jacobian(&Cubic, &x).expect("jacobian");
        let f = Cubic.eval(&x).expect("eval");
        for i in 0..2 {
            let jf: f64 = (0..2).map(|j| jac[i][j] * f[j]).sum();
            approx(jets[2][i], jf, 1e-10);
        }
    }

    #[test]
    fn trajectory_jets_rejects_bad_order() {
        let f = DiagonalField::new(vec![1.0]).expect("field");
        assert!(trajectory_jets(&f, &[1.0], 0).is_err());
        assert!(trajectory_jets(&f, &[1.0], 7).is_err());
    }

    #[test]
    fn jacobian_identity_field() {
        struct Ident;
        impl VectorField for Ident {
            fn dim(&self) -> usize {
                3
            }
            fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<Vec<C>, NumError> {
                Ok(x.to_vec())
            }
        }
        let j = jacobian(&Ident, &[0.3, -0.2, 5.0]).expect("jacobian");
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(j[r][c], if r == c { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn gradient_and_hessian_quadratics() {
        struct SqDiff;
        impl ScalarField for SqDiff {
            fn dim(&self) -> usize {
                2
            }
            fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<C, NumError> {
                Ok(x[0].mul(&x[0]).sub(&x[1].mul(&x[1])))
            }
        }
        let h = hessian(&SqDiff, &[3.0, -7.0]).expect("hessian");
        assert_eq!(h, vec![vec![2.0, 0.0], vec![0.0, -2.0]]);

        struct Prod;
        impl ScalarField for Prod {
            fn dim(&self) -> usize {
                2
            }
            fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<C, NumError> {
                Ok(x[0].mul(&x[1]))
            }
        }
        let g = gradient(&Prod, &[0.0, 0.0]).expect("gradient");
        assert_eq!(g, vec![0.0, 0.0]);
        let h = hessian(&Prod, &[0.0, 0.0]).expect("hessian");
        assert_eq!(h, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn det_f64_matches_cofactor() {
        let m = vec![
            vec![2.0, -1.0, 0.5],
            vec![1.5, 3.0, -2.0],
            vec![0.0, 4.0, 1.0],
        ];
        let byref = det_small(&m).expect("cofactor");
        approx(det_f64(&m).expect("det"), byref, 1e-13);
        // Singular matrix
        let s = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(det_f64(&s).expect("det"), 0.0);
        // 4×4 with known determinant: diag(1,2,3,4) permuted rows → −24
        let mut p = vec![vec![0.0; 4]; 4];
        p[0][1] = 2.0;
        p[1][0] = 1.0;
        p[2][2] = 3.0;
        p[3][3] = 4.0;
        approx(det_f64(&p).expect("det"), -24.0, 1e-14);
    }

    #[test]
    fn eigen_identity_and_rotation() {
        let eye = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let e = eigen_small(&eye).expect("eigs");
        for z in &e {
            approx(z.re, 1.0, 1e-12);
            approx(z.im, 0.0, 1e-12);
        }
        let rot = vec![vec![0.0, 1.0], vec![-1.0, 0.0]];
        let e = eigen_small(&rot).expect("eigs");
        approx(e[0].re, 0.0, 1e-12);
        approx(e[0].im.abs(), 1.0, 1e-12);
        assert!((e[0].im + e[1].im).abs() < 1e-14, "conjugate pair");
    }

    #[test]
    fn eigen_known_3x3_real_spectrum() {
        // diag(3, −1, 2) under a similarity-free test: plain diagonal.
        let d = vec![
            vec![3.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ];
        let e = eigen_small(&d).expect("eigs");
        let expect = [3.0, 2.0, -1.0]; // sorted by real part descending
        for (z, want) in e.iter().zip(expect) {
            approx(z.re, want, 1e-12);
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn eigen_residual_bound() {
        // |det(A − λI)| small relative to ‖A‖³ for each returned λ.
        let a = vec![
            vec![0.2, -1.7, 0.3],
            vec![2.2, 0.9, -0.4],
            vec![0.1, 0.8, -1.5],
        ];
        let eigs = eigen_small(&a).expect("eigs");
        let norm = 2.2f64;
        for l in &eigs {
            // complex determinant via direct cofactor over Complex64
            let m: Vec<Vec<Complex64>> = (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| {
                            Complex64::new(a[i][j], 0.0)
                                - if i == j { *l } else { Complex64::new(0.0, 0.0) }
                        })
                        .collect()
                })
                .collect();
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            assert!(
                det.norm() < 1e-8 * norm.powi(3),
                "residual {} for eigenvalue {l}",
                det.norm()
            );
        }
    }

    #[test]
    fn classify_2x2_cases() {
        let saddle = classify_matrix(&[vec![1.0, 0.0], vec![0.0, -2.0]]).expect("report");
        assert_eq!(saddle.classification, Classification::Saddle);
        assert!(saddle.notes.is_empty(), "{:?}", saddle.notes);

        let node = classify_matrix(&[vec![-1.0, 0.0], vec![0.0, -2.0]]).expect("report");
        assert_eq!(node.classification, Classification::Node);
        assert!(node.notes.is_empty(), "{:?}", node.notes);

        let focus = classify_matrix(&[vec![0.5, 1.0], vec![-1.0, 0.5]]).expect("report");
        assert_eq!(focus.classification, Classification::Focus);
        assert!(focus.notes.is_empty(), "{:?}", focus.notes);

        let degenerate = classify_matrix(&[vec![0.0, 0.0], vec![0.0, -2.0]]).expect("report");
        assert_eq!(degenerate.classification, Classification::Indeterminate);
    }

    #[test]
    fn classify_3x3_cases() {
        let saddle =
            classify_matrix(&[
                vec![1.0, 0.0, 0.0],
                vec![0.0, -1.0, 0.0],
                vec![0.0, 0.0, 2.0],
            ])
            .expect("report");
        assert_eq!(saddle.classification, Classification::Saddle);
        approx(saddle.delta, -2.0, 1e-14);
        assert!(saddle.r.expect("3D") < 0.0);
        assert!(saddle.notes.is_empty(), "{:?}", saddle.notes);

        let degsad =
            classify_matrix(&[
                vec![0.0, 0.0, 0.0],
                vec![0.0, -1.0, 0.0],
                vec![0.0, 0.0, 2.0],
            ])
            .expect("report");
        assert_eq!(degsad.classification, Classification::DegenerateSaddle);
        assert!(degsad.s.expect("3D") < 0.0);

        let focus = classify_matrix(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.5, 1.0],
            vec![0.0, -1.0, 0.5],
        ])
        .expect("report");
        assert_eq!(focus.classification, Classification::Focus);
        assert!(focus.r.expect("3D") > 0.0);
    }

    #[test]
    fn vieta_relations_hold() {
        let a = vec![
            vec![0.4, -1.1, 2.0],
            vec![0.9, 0.3, -0.2],
            vec![-0.5, 1.2, 0.8],
        ];
        let rep = classify_matrix(&a).expect("report");
        let e = &rep.eigenvalues;
        let sum = e[0] + e[1] + e[2];
        let prod = e[0] * e[1] * e[2];
        let pair = e[0] * e[1] + e[0] * e[2] + e[1] * e[2];
        approx(sum.re, rep.trace, 1e-9);
        approx(sum.im, 0.0, 1e-9);
        approx(prod.re, rep.delta, 1e-9);
        approx(prod.im, 0.0, 1e-9);
        approx(pair.re, rep.s.expect("3D"), 1e-9);
    }

    #[test]
    fn eigen_near_triple_root_uses_trig_branch() {
        // Perturbed triple eigenvalue. Root extraction through the
        // characteristic polynomial is ∛ε-conditioned near a triple root,
        // so the realistic expectation is ~1e−8 absolute here, not 1e−12.
        let eps = 1e-4;
        let a = vec![
            vec![1.0, eps, 0.0],
            vec![0.0, 1.0 + eps, eps],
            vec![0.0, 0.0, 1.0 - eps],
        ];
        let e = eigen_small(&a).expect("eigs");
        let mut got: Vec<f64> = e.iter().map(|z| z.re).collect();
        got.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        approx(got[0], 1.0 - eps, 1e-6);
        approx(got[1], 1.0, 1e-6);
        approx(got[2], 1.0 + eps, 1e-6);
        assert!(e.iter().all(|z| z.im.abs() < 1e-6), "real spectrum");
    }
}
