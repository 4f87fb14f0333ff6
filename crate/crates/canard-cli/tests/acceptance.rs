//! End-to-end acceptance gate.
//!
//! Each test checks one numbered release criterion at its stated tolerance
//! and prints exactly one `CRITERION n: PASS/FAIL — …` line (run with
//! `cargo test -p canard-cli --test acceptance -- --nocapture` to see the
//! lines for passing criteria too; a failing criterion also carries the
//! explanation in its panic message).
//!
//! Two criteria fail by design and are left failing rather than weakened:
//!
//! * criterion 6, final clause — it demands that D₃/(−2Δ²R) at (1,1,1) be a
//!   positive constant across random distinct-real spectra, but that
//!   quotient is identically Δ·V (V the Vandermonde product of the
//!   spectrum), a sign-indefinite spectrum-dependent quantity;
//! * criterion 8, at α ∈ {−0.074, −0.07} — in a planar chart the curvature
//!   saddle test fires exactly when the reduced Jacobian has real distinct
//!   eigenvalues, regardless of their signs, so for α ∈ (−3/40, 0) it
//!   reports a canard while the Jacobian criterion correctly sees a node.
//!
//! The failure messages derive both facts numerically.

use canard_core::curvature::{canard_verdict_curvature, curvature_hessian_test, flow_curvature};
use canard_core::diffgeo::{classify_matrix, Classification, DiagonalField, LinearField};
use canard_core::odeint::{canard_metrics, integrate, SolverOpts, Trajectory};
use canard_core::pseudosing::{
    canard_verdict_jacobian, classify_reduced, find_pseudo_singular, CanardVerdict,
};
use canard_core::slowfast::{chua3, chua4, ChuaParams3, ChuaParams4};
use canard_core::{CurvatureVerdict, HessianClass};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::process::Command;
use std::time::Instant;

// ---------------------------------------------------------------------------
// Reporting helpers
// ---------------------------------------------------------------------------

/// Print the criterion's pass/fail line; panic on failure with the same text.
fn report(n: usize, outcome: Result<String, String>) {
    match outcome {
        Ok(msg) => println!("CRITERION {n}: PASS — {msg}"),
        Err(msg) => {
            println!("CRITERION {n}: FAIL — {msg}");
            panic!("criterion {n} failed: {msg}");
        }
    }
}

/// Mixed absolute/relative closeness: |a−b| ≤ tol·(1 + max(|a|,|b|)).
fn within(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Map a library error into the criterion's failure string.
fn ce<T>(r: canard_core::Result<T>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

// ---------------------------------------------------------------------------
// Criterion 1 — pseudo-singular points of the 3D circuit model
// ---------------------------------------------------------------------------

fn check_1() -> Result<String, String> {
    let started = Instant::now();
    let sys = ce(chua3(ChuaParams3::default()), "chua3 model")?;
    let points = ce(
        find_pseudo_singular(&sys, &[(-2.0, 2.0); 3], 10),
        "pseudo-singular search",
    )?;
    let elapsed = started.elapsed().as_secs_f64();

    if points.len() != 2 {
        return Err(format!(
            "expected exactly 2 pseudo-singular points in [-2,2]^3, found {}: {:?}",
            points.len(),
            points.iter().map(|p| p.full_coords.clone()).collect::<Vec<_>>()
        ));
    }
    // Points come back sorted by chart coordinates: (−2/3,−1,−1) then (2/3,1,1).
    let expected = [
        [-2.0 / 3.0, -1.0, -1.0],
        [2.0 / 3.0, 1.0, 1.0],
    ];
    for (p, exp) in points.iter().zip(&expected) {
        for (got, want) in p.full_coords.iter().zip(exp) {
            if (got - want).abs() >= 1e-8 {
                return Err(format!(
                    "coordinate error {:.3e} ≥ 1e-8 at {:?} (expected {:?})",
                    (got - want).abs(),
                    p.full_coords,
                    exp
                ));
            }
        }
        if p.residual_norm >= 1e-8 {
            return Err(format!(
                "residual norm {:.3e} ≥ 1e-8 at {:?}",
                p.residual_norm, p.full_coords
            ));
        }
    }
    if elapsed >= 1.0 {
        return Err(format!("search took {elapsed:.2} s ≥ 1 s"));
    }
    Ok(format!(
        "found exactly {{(2/3,1,1), (−2/3,−1,−1)}}, residuals < 1e-8, \
         coordinates < 1e-8, in {:.0} ms",
        elapsed * 1e3
    ))
}

#[test]
fn criterion_01_chua3_pseudo_singular_points() {
    report(1, check_1());
}

// ---------------------------------------------------------------------------
// Criterion 2 — reduced-Jacobian invariants and saddle condition (3D model)
// ---------------------------------------------------------------------------

fn check_2() -> Result<String, String> {
    for alpha in [0.1, 0.2571389636, 1.0] {
        let sys = ce(chua3(ChuaParams3 { alpha }), "chua3 model")?;
        let spectrum = ce(
            classify_reduced(&sys.reduce(), &[1.0, 1.0]),
            "reduced-Jacobian classification",
        )?;
        let delta_expected = -10.0 * alpha / 3.0;
        if !within(spectrum.delta, delta_expected, 1e-10) {
            return Err(format!(
                "Δ = {} ≠ −10α/3 = {delta_expected} at α = {alpha} (rel 1e-10)",
                spectrum.delta
            ));
        }
        if !within(spectrum.trace, -1.0, 1e-10) {
            return Err(format!(
                "T = {} ≠ −1 at α = {alpha} (rel 1e-10)",
                spectrum.trace
            ));
        }
        let disc = spectrum.trace * spectrum.trace / 4.0 - spectrum.delta;
        let disc_expected = (3.0 + 40.0 * alpha) / 12.0;
        if !within(disc, disc_expected, 1e-10) {
            return Err(format!(
                "T²/4 − Δ = {disc} ≠ (3+40α)/12 = {disc_expected} at α = {alpha}"
            ));
        }
    }
    for alpha in [-0.2, -0.074, 0.01, 0.3] {
        let sys = ce(chua3(ChuaParams3 { alpha }), "chua3 model")?;
        let spectrum = ce(
            classify_reduced(&sys.reduce(), &[1.0, 1.0]),
            "reduced-Jacobian classification",
        )?;
        let is_saddle = spectrum.classification == Classification::Saddle;
        let should_be = alpha > 0.0 && 3.0 + 40.0 * alpha > 0.0;
        if is_saddle != should_be {
            return Err(format!(
                "at α = {alpha}: classification {} but the saddle condition \
                 (α > 0 and 3+40α > 0) is {should_be}",
                spectrum.classification
            ));
        }
    }
    Ok("(Δ, T) = (−10α/3, −1) and T²/4 − Δ = (3+40α)/12 to rel 1e-10 at \
        α ∈ {0.1, 0.2571389636, 1}; Saddle iff α > 0 ∧ 3+40α > 0 across the \
        sign sweep α ∈ {−0.2, −0.074, 0.01, 0.3}"
        .into())
}

#[test]
fn criterion_02_chua3_jacobian_invariants() {
    report(2, check_2());
}

// ---------------------------------------------------------------------------
// Criterion 3 — equilibrium spectrum of the normalized slow field (3D model)
// ---------------------------------------------------------------------------

fn check_3() -> Result<String, String> {
    // The nonzero equilibrium with z = −√6: y = z, x = −y.
    let s6 = 6.0_f64.sqrt();
    let equilibrium = [s6, -s6, -s6];
    for alpha in [0.01, 0.19, 0.21, 0.2571389636, 1.0] {
        let sys = ce(chua3(ChuaParams3 { alpha }), "chua3 model")?;
        let field = sys.normalized_slow_field();
        let spectrum = ce(
            classify_reduced(&field, &equilibrium),
            "normalized-slow-field spectrum",
        )?;

        // Closed form: λ₁ = 0, λ₂,₃ = ½(−1+5α ± √(1−90α+25α²)).
        let d = 1.0 - 90.0 * alpha + 25.0 * alpha * alpha;
        let mut expected: Vec<(f64, f64)> = if d >= 0.0 {
            vec![
                (0.0, 0.0),
                (0.5 * (-1.0 + 5.0 * alpha + d.sqrt()), 0.0),
                (0.5 * (-1.0 + 5.0 * alpha - d.sqrt()), 0.0),
            ]
        } else {
            let re = 0.5 * (-1.0 + 5.0 * alpha);
            let im = 0.5 * (-d).sqrt();
            vec![(0.0, 0.0), (re, im), (re, -im)]
        };
        let mut got: Vec<(f64, f64)> =
            spectrum.eigenvalues.iter().map(|z| (z.re, z.im)).collect();
        let key = |p: &(f64, f64)| (p.0, p.1);
        expected.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (g, e) in got.iter().zip(&expected) {
            if (g.0 - e.0).abs() > 1e-9 || (g.1 - e.1).abs() > 1e-9 {
                return Err(format!(
                    "at α = {alpha}: eigenvalues {got:?} do not match the closed \
                     form {expected:?} to absolute 1e-9"
                ));
            }
        }
    }

    // Bracketing of the Hopf-type sign change of Re λ₂,₃ at α = 1/5.
    let mut max_re = [0.0_f64; 2];
    for (k, alpha) in [0.19, 0.21].into_iter().enumerate() {
        let sys = ce(chua3(ChuaParams3 { alpha }), "chua3 model")?;
        let spectrum = ce(
            classify_reduced(&sys.normalized_slow_field(), &equilibrium),
            "normalized-slow-field spectrum",
        )?;
        max_re[k] = spectrum
            .eigenvalues
            .iter()
            .filter(|z| z.norm() > 1e-6)
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
    }
    if !(max_re[0] < 0.0 && max_re[1] > 0.0) {
        return Err(format!(
            "Re λ₂,₃ does not change sign between α = 0.19 (max Re = {}) and \
             α = 0.21 (max Re = {})",
            max_re[0], max_re[1]
        ));
    }
    Ok(format!(
        "eigenvalues match λ₁ = 0, λ₂,₃ = ½(−1+5α ± √(1−90α+25α²)) to abs 1e-9 \
         at five α values; Re λ₂,₃ flips from {:.4} (α=0.19) to {:.4} (α=0.21)",
        max_re[0], max_re[1]
    ))
}

#[test]
fn criterion_03_chua3_equilibrium_spectrum() {
    report(3, check_3());
}

// ---------------------------------------------------------------------------
// Criterion 4 — flow-curvature cross-validation against the closed-form φ
// ---------------------------------------------------------------------------

/// Independently transcribed polynomial for φ of the planar reduced field,
/// φ(y, z; α) — the determinant det(Ẋ, Ẍ) expanded by hand.
fn phi_closed_form(y: f64, z: f64, alpha: f64) -> f64 {
    let z2 = z * z;
    (alpha / 9.0)
        * (-3.0
            * (y - z)
            * (6.0 * y * y * z
                + 4.0 * z.powi(3) * (z2 - 2.0)
                + y * (-6.0 + 9.0 * z2 - 5.0 * z.powi(4)))
            + alpha * z * (z2 - 6.0) * (z2 - 1.0).powi(2) * (z.powi(3) - 3.0 * y - 3.0 * z))
}

fn check_4() -> Result<String, String> {
    let mut max_rel = 0.0_f64;
    for alpha in [0.25, 0.5, 1.0] {
        let sys = ce(chua3(ChuaParams3 { alpha }), "chua3 model")?;
        let reduced = sys.reduce();
        for i in 0..20 {
            for j in 0..20 {
                let y = -2.0 + 4.0 * (i as f64) / 19.0;
                let z = -2.0 + 4.0 * (j as f64) / 19.0;
                let phi = ce(flow_curvature(&reduced, &[y, z]), "flow curvature")?;
                let expected = phi_closed_form(y, z, alpha);
                let rel = (phi - expected).abs() / (1.0 + phi.abs().max(expected.abs()));
                max_rel = max_rel.max(rel);
                if rel > 1e-9 {
                    return Err(format!(
                        "φ({y}, {z}; α={alpha}) = {phi} vs closed form {expected}: \
                         relative error {rel:.3e} > 1e-9"
                    ));
                }
            }
        }
    }
    // Spot value φ(0, 2; α = 1) = 104/3 ≈ 34.6667 (6-digit display rounds it).
    let sys = ce(chua3(ChuaParams3 { alpha: 1.0 }), "chua3 model")?;
    let spot = ce(flow_curvature(&sys.reduce(), &[0.0, 2.0]), "flow curvature")?;
    let exact = 104.0 / 3.0;
    if (spot - exact).abs() > 1e-6 {
        return Err(format!(
            "spot value φ(0,2; α=1) = {spot} differs from 104/3 = {exact} by \
             {:.3e} > 1e-6",
            (spot - exact).abs()
        ));
    }
    Ok(format!(
        "numerical φ matches the closed-form polynomial on a 20×20 grid over \
         [−2,2]² at α ∈ {{0.25, 0.5, 1}} (max rel {max_rel:.2e} ≤ 1e-9); spot \
         φ(0,2;1) = {spot:.8} = 104/3 within 1e-6"
    ))
}

#[test]
fn criterion_04_chua3_flow_curvature_cross_validation() {
    report(4, check_4());
}

// ---------------------------------------------------------------------------
// Criterion 5 — Second Derivative Test values and saddle flip (3D model)
// ---------------------------------------------------------------------------

fn check_5() -> Result<String, String> {
    for alpha in [0.2571389636, 0.45, 1.0, -0.08, -0.07] {
        let sys = ce(chua3(ChuaParams3 { alpha }), "chua3 model")?;
        let reduced = sys.reduce();
        let d2_expected = -(100.0 / 27.0) * alpha * alpha * (3.0 + 40.0 * alpha);
        for point in [[1.0, 1.0], [-1.0, -1.0]] {
            let rep = ce(
                curvature_hessian_test(&reduced, &point),
                "curvature Hessian test",
            )?;
            if !within(rep.d2, d2_expected, 1e-6) {
                return Err(format!(
                    "D₂ at ({}, {}) with α = {alpha}: {} vs −(100/27)α²(3+40α) = \
                     {d2_expected} (rel 1e-6)",
                    point[0], point[1], rep.d2
                ));
            }
        }
    }
    // The saddle verdict flips with the sign of 3+40α: −0.08 < −3/40 < −0.07.
    let mut classes = Vec::new();
    for alpha in [-0.08, -0.07] {
        let sys = ce(chua3(ChuaParams3 { alpha }), "chua3 model")?;
        let rep = ce(
            curvature_hessian_test(&sys.reduce(), &[1.0, 1.0]),
            "curvature Hessian test",
        )?;
        classes.push(rep.hessian_class);
    }
    if classes[0] == HessianClass::Saddle || classes[1] != HessianClass::Saddle {
        return Err(format!(
            "saddle flip broken: α = −0.08 → {}, α = −0.07 → {} (expected \
             non-saddle then Saddle as 3+40α changes sign)",
            classes[0], classes[1]
        ));
    }
    Ok(format!(
        "D₂(±1,±1) = −(100/27)α²(3+40α) to rel 1e-6 at five α values; Hessian \
         class flips {} → {} across α = −3/40",
        classes[0], classes[1]
    ))
}

#[test]
fn criterion_05_chua3_hessian_test() {
    report(5, check_5());
}

// ---------------------------------------------------------------------------
// Criterion 6 — linear-system identities (final clause fails by design)
// ---------------------------------------------------------------------------

/// Distinct-real spectrum with magnitudes in [0.6, 1.8] and pairwise
/// separation ≥ 0.4, keeping every sample well-conditioned.
fn draw_spectrum(rng: &mut StdRng, n: usize) -> Vec<f64> {
    loop {
        let lam: Vec<f64> = (0..n)
            .map(|_| {
                let mag = rng.random_range(0.6..1.8);
                if rng.random_range(0..2) == 0 {
                    -mag
                } else {
                    mag
                }
            })
            .collect();
        let separated = (0..n)
            .all(|i| (0..i).all(|j| (lam[i] - lam[j]).abs() >= 0.4));
        if separated {
            return lam;
        }
    }
}

fn check_6() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(6);

    // (a) φ closed forms for diagonal systems, rel 1e-10, 100 systems.
    for k in 0..100 {
        let n = if k % 2 == 0 { 2 } else { 3 };
        let lam = draw_spectrum(&mut rng, n);
        let field = ce(DiagonalField::new(lam.clone()), "diagonal field")?;
        let x: Vec<f64> = (0..n)
            .map(|_| {
                let mag = rng.random_range(0.3..2.0);
                if rng.random_range(0..2) == 0 {
                    -mag
                } else {
                    mag
                }
            })
            .collect();
        let phi = ce(flow_curvature(&field, &x), "flow curvature")?;
        let expected = if n == 2 {
            x[0] * x[1] * lam[0] * lam[1] * (lam[1] - lam[0])
        } else {
            x[0] * x[1]
                * x[2]
                * lam[0]
                * lam[1]
                * lam[2]
                * (lam[1] - lam[0])
                * (lam[2] - lam[0])
                * (lam[2] - lam[1])
        };
        if !within(phi, expected, 1e-10) {
            return Err(format!(
                "{n}D diagonal identity violated: φ = {phi} vs {expected} for \
                 λ = {lam:?}, x = {x:?} (rel 1e-10)"
            ));
        }
    }

    // (b) D₂ = −Δ²(T²−4Δ) at (1,1) for general 2×2 systems, rel 1e-9.
    for _ in 0..20 {
        let a: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..2).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let field = ce(LinearField::new(a.clone()), "linear field")?;
        let rep = ce(
            curvature_hessian_test(&field, &[1.0, 1.0]),
            "curvature Hessian test",
        )?;
        let delta = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let trace = a[0][0] + a[1][1];
        let expected = -delta * delta * (trace * trace - 4.0 * delta);
        if !within(rep.d2, expected, 1e-9) {
            return Err(format!(
                "D₂ identity violated: {} vs −Δ²(T²−4Δ) = {expected} for A = \
                 {a:?} (rel 1e-9)",
                rep.d2
            ));
        }
    }

    // (c) The final clause: D₃/(−2Δ²R) at (1,1,1) is claimed to be a positive
    // constant (CV < 1e-6) over 50 random distinct-real spectra. Measure it.
    let mut quotients = Vec::with_capacity(50);
    for _ in 0..50 {
        let lam = draw_spectrum(&mut rng, 3);
        let field = ce(DiagonalField::new(lam.clone()), "diagonal field")?;
        let rep = ce(
            curvature_hessian_test(&field, &[1.0, 1.0, 1.0]),
            "curvature Hessian test",
        )?;
        let d3 = rep.d3.ok_or("missing D₃ in a 3D chart")?;
        let matrix: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { lam[i] } else { 0.0 }).collect())
            .collect();
        let spectrum = ce(classify_matrix(&matrix), "spectrum invariants")?;
        let (delta, r) = (
            spectrum.delta,
            spectrum.r.ok_or("missing R invariant in 3D")?,
        );
        let quotient = d3 / (-2.0 * delta * delta * r);
        // The quotient is exactly Δ·V, V the Vandermonde product: verify on
        // every sample so the failure explanation below is airtight.
        let vandermonde = (lam[1] - lam[0]) * (lam[2] - lam[0]) * (lam[2] - lam[1]);
        if !within(quotient, delta * vandermonde, 1e-9) {
            return Err(format!(
                "internal cross-check failed: D₃/(−2Δ²R) = {quotient} vs Δ·V = \
                 {} for λ = {lam:?}",
                delta * vandermonde
            ));
        }
        quotients.push(quotient);
    }
    let mean = quotients.iter().sum::<f64>() / quotients.len() as f64;
    let var = quotients
        .iter()
        .map(|q| (q - mean) * (q - mean))
        .sum::<f64>()
        / quotients.len() as f64;
    let cv = var.sqrt() / mean.abs().max(1e-300);
    let positive = quotients.iter().filter(|q| **q > 0.0).count();
    let negative = quotients.len() - positive;

    if cv < 1e-6 && quotients.iter().all(|q| *q > 0.0) {
        return Ok(format!(
            "diagonal φ identities (rel 1e-10) and D₂ = −Δ²(T²−4Δ) (rel 1e-9) \
             hold; D₃/(−2Δ²R) constant with CV {cv:.2e}"
        ));
    }
    Err(format!(
        "the φ closed forms (100 diagonal systems, rel 1e-10) and the planar \
         identity D₂ = −Δ²(T²−4Δ) at (1,1) (rel 1e-9) both hold, but the final \
         clause cannot: for a diagonal system with spectrum (λ₁,λ₂,λ₃), \
         D₃ at (1,1,1) equals 2(ΔV)³ while −2Δ²R = 2Δ²V² (R = −V², with \
         V = (λ₂−λ₁)(λ₃−λ₁)(λ₃−λ₂) and Δ = λ₁λ₂λ₃), so D₃/(−2Δ²R) = Δ·V \
         exactly — verified on every sample to rel 1e-9 above. Over 50 random \
         distinct-real spectra the quotient took {positive} positive and \
         {negative} negative values with mean {mean:.3} and coefficient of \
         variation {cv:.3}; it is a sign-indefinite, spectrum-dependent \
         quantity, not a positive constant with CV < 1e-6"
    ))
}

#[test]
fn criterion_06_linear_system_identities() {
    report(6, check_6());
}

// ---------------------------------------------------------------------------
// Criterion 7 — closed forms of the 4D circuit model
// ---------------------------------------------------------------------------

fn check_7() -> Result<String, String> {
    let params = ChuaParams4::default();
    let sys = ce(chua4(params), "chua4 model")?;
    let search_box = [(-2.0, 2.0); 4];
    let points = ce(
        find_pseudo_singular(&sys, &search_box, 6),
        "pseudo-singular search",
    )?;
    if points.len() != 2 {
        return Err(format!(
            "expected 2 family representatives (u = ±u*), found {}",
            points.len()
        ));
    }
    // Full coordinates are (x, y, z, u); compare |z| and |u| against the
    // published 6-digit values at tolerance 1e-5.
    for p in &points {
        let (z, u) = (p.full_coords[2], p.full_coords[3]);
        if (u.abs() - 0.782622).abs() > 1e-5 {
            return Err(format!("|u| = {} vs 0.782622 (tol 1e-5)", u.abs()));
        }
        if (z.abs() - 0.405107).abs() > 1e-5 {
            return Err(format!("|z| = {} vs 0.405107 (tol 1e-5)", z.abs()));
        }
    }

    // Invariants of the reduced Jacobian at the family points.
    let inner = 3.0 * params.alpha2 + 2.0 * params.c2 * (1.0 + params.alpha2);
    let s_closed = -(2.0 / 3.0) * params.beta1 * params.c2 * inner;
    let r_closed = -(4.0 / 27.0)
        * params.beta1.powi(3)
        * params.c2
        * params.c2
        * inner
        * inner
        * (8.0 * params.c2 * inner + 3.0 * params.beta1);
    // Transcription guards: frozen independent evaluations of both forms.
    if !within(s_closed, -0.00289306729668, 1e-9) {
        return Err(format!("S closed-form transcription drifted: {s_closed}"));
    }
    if !within(r_closed, -2.1940082658604854e-7, 1e-9) {
        return Err(format!("R closed-form transcription drifted: {r_closed}"));
    }
    for p in &points {
        let s = p.spectrum.s.ok_or("missing S invariant in 3D")?;
        let r = p.spectrum.r.ok_or("missing R invariant in 3D")?;
        if !within(s, s_closed, 1e-6) {
            return Err(format!(
                "S = {s} vs closed form −(2/3)β₁c₂(3α₂+2c₂(1+α₂)) = {s_closed} \
                 (rel 1e-6) at {:?}",
                p.full_coords
            ));
        }
        if !within(r, r_closed, 1e-6) {
            return Err(format!(
                "R = {r} vs closed form {r_closed} ≈ −2.194e-7 (rel 1e-6) at {:?}",
                p.full_coords
            ));
        }
    }

    // Saddle-threshold bracketing: −2c₂/(3+2c₂) = 0.931918….
    let threshold = -2.0 * params.c2 / (3.0 + 2.0 * params.c2);
    let analysis_090 = ce(
        canard_verdict_jacobian(&sys, &search_box, 6),
        "Jacobian analysis at α₂ = 0.90",
    )?;
    if analysis_090.verdict != CanardVerdict::DegenerateCanardBySaddle {
        return Err(format!(
            "α₂ = 0.90 < {threshold:.6}: expected DegenerateCanardBySaddle, got {}",
            analysis_090.verdict
        ));
    }
    let sys_095 = ce(sys.with_param("alpha2", 0.95), "parameter override")?;
    let analysis_095 = ce(
        canard_verdict_jacobian(&sys_095, &search_box, 6),
        "Jacobian analysis at α₂ = 0.95",
    )?;
    if analysis_095.verdict != CanardVerdict::NoCanardEvidence {
        return Err(format!(
            "α₂ = 0.95 > {threshold:.6}: expected NoCanardEvidence (not a \
             saddle), got {}",
            analysis_095.verdict
        ));
    }
    Ok(format!(
        "u = ±0.782622 and z = ±0.405107 to 1e-5; S = {s_closed:.6e} and \
         R = {r_closed:.4e} match their closed forms to rel 1e-6; saddle \
         threshold {threshold:.6} bracketed: α₂ = 0.90 → \
         DegenerateCanardBySaddle, α₂ = 0.95 → NoCanardEvidence"
    ))
}

#[test]
fn criterion_07_chua4_closed_forms() {
    report(7, check_7());
}

// ---------------------------------------------------------------------------
// Criterion 8 — cross-method verdict agreement (fails by design at two α)
// ---------------------------------------------------------------------------

fn check_8() -> Result<String, String> {
    let mut conflicts: Vec<String> = Vec::new();
    let mut checked = 0usize;

    // Every 3D-model parameter point exercised by criteria 2 and 5.
    let box3 = [(-2.0, 2.0); 3];
    for alpha in [
        0.1,
        0.2571389636,
        1.0,
        -0.2,
        -0.074,
        0.01,
        0.3,
        -0.08,
        -0.07,
        0.45,
    ] {
        let sys = ce(chua3(ChuaParams3 { alpha }), "chua3 model")?;
        let jac = ce(
            canard_verdict_jacobian(&sys, &box3, 8),
            "Jacobian analysis",
        )?;
        let curv = ce(
            canard_verdict_curvature(&sys, &jac.points),
            "curvature analysis",
        )?;
        checked += 1;
        if !curv.agreement.agree {
            let jc = jac.points[0].spectrum.classification;
            let hc = curv.reports[0].report.hessian_class;
            conflicts.push(format!(
                "α = {alpha}: Jacobian {} ({jc}) vs curvature {} ({hc})",
                jac.verdict, curv.verdict
            ));
        }
    }

    // The 4D-model parameter points of criterion 7.
    let box4 = [(-2.0, 2.0); 4];
    for alpha2 in [0.90, 0.95] {
        let base = ce(chua4(ChuaParams4::default()), "chua4 model")?;
        let sys = ce(base.with_param("alpha2", alpha2), "parameter override")?;
        let jac = ce(
            canard_verdict_jacobian(&sys, &box4, 6),
            "Jacobian analysis",
        )?;
        let curv = ce(
            canard_verdict_curvature(&sys, &jac.points),
            "curvature analysis",
        )?;
        checked += 1;
        if !curv.agreement.agree {
            conflicts.push(format!(
                "α₂ = {alpha2}: Jacobian {} vs curvature {}",
                jac.verdict, curv.verdict
            ));
        }
    }

    if conflicts.is_empty() {
        return Ok(format!(
            "Jacobian and curvature verdicts agree (with Degenerate abstentions \
             and DegenerateSaddle/Saddle whitelisted) at all {checked} \
             parameter points"
        ));
    }
    Err(format!(
        "{} of {checked} parameter points conflict definitively: [{}]. This is \
         structural, not a bug: in a planar chart det H(φ) at the fold point \
         equals D₂ = −(100/27)α²(3+40α), which is negative exactly when the \
         reduced Jacobian has real distinct eigenvalues (T²−4Δ > 0 with \
         Δ ≠ 0), so the curvature test labels the point a saddle of φ whenever \
         the eigenvalues are real — regardless of their signs. For \
         α ∈ (−3/40, 0) the eigenvalues are real, distinct and of EQUAL sign: \
         the Jacobian criterion correctly reports a node (no canard) while the \
         curvature criterion reports canard-by-saddle. Both implementations \
         faithfully compute their respective definitions; the two definitions \
         genuinely disagree on this parameter interval, so this criterion is \
         left failing rather than masked",
        conflicts.len(),
        conflicts.join("; ")
    ))
}

#[test]
fn criterion_08_verdict_agreement() {
    report(8, check_8());
}

// ---------------------------------------------------------------------------
// Criterion 9 — canard trajectory properties of the 3D model
// ---------------------------------------------------------------------------

struct RunSummary {
    metrics: canard_core::CanardMetrics,
    z_min: f64,
    z_max: f64,
    seconds: f64,
}

fn canard_run(alpha: f64) -> Result<RunSummary, String> {
    let started = Instant::now();
    let sys = ce(chua3(ChuaParams3 { alpha }), "chua3 model")?;
    let field = ce(sys.full_vector_field(), "full vector field")?;
    let opts = SolverOpts::default();
    let tr = ce(
        integrate(&field, &[-2.0 / 3.0, 0.0, 2.0], (0.0, 60.0), &opts),
        "integration",
    )?;
    // Discard the first 20 slow-time units as transient.
    let keep: Vec<usize> = (0..tr.times.len()).filter(|&i| tr.times[i] >= 20.0).collect();
    let recorded = Trajectory {
        times: keep.iter().map(|&i| tr.times[i]).collect(),
        states: keep.iter().map(|&i| tr.states[i].clone()).collect(),
        meta: tr.meta.clone(),
    };
    let metrics = ce(
        canard_metrics(&recorded, &sys, &[2.0 / 3.0, 1.0, 1.0], 0.05),
        "canard metrics",
    )?;
    let z_min = recorded.states.iter().map(|s| s[2]).fold(f64::INFINITY, f64::min);
    let z_max = recorded
        .states
        .iter()
        .map(|s| s[2])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RunSummary {
        metrics,
        z_min,
        z_max,
        seconds: started.elapsed().as_secs_f64(),
    })
}

fn check_9() -> Result<String, String> {
    // Reference parameters: α = 0.2571389636, ε = 1/20.
    let reference = canard_run(0.2571389636)?;
    if reference.seconds >= 30.0 {
        return Err(format!("reference run took {:.1} s ≥ 30 s", reference.seconds));
    }
    if reference.metrics.repelling_dwell <= 0.0 {
        return Err(format!(
            "repelling dwell {} ≤ 0 at the reference parameters",
            reference.metrics.repelling_dwell
        ));
    }
    if reference.metrics.closest_approach_to_m >= 0.1 {
        return Err(format!(
            "closest approach to M(2/3,1,1) is {} ≥ 0.1",
            reference.metrics.closest_approach_to_m
        ));
    }

    // At α = 0.45 the loop persists: the trajectory still runs the full
    // relaxation loop, repeatedly crossing both folds z = ±1 (it jumps at
    // the folds rather than dwelling near the repelling sheet, so the
    // η-dwell is not required there — loop persistence is the criterion).
    let wide = canard_run(0.45)?;
    if wide.seconds >= 30.0 {
        return Err(format!("α = 0.45 run took {:.1} s ≥ 30 s", wide.seconds));
    }
    if !(wide.z_max > 1.0 && wide.z_min < -1.0) {
        return Err(format!(
            "loop lost at α = 0.45: z range [{}, {}] no longer spans both \
             folds ±1",
            wide.z_min, wide.z_max
        ));
    }
    Ok(format!(
        "reference run: repelling dwell {:.3} > 0, closest approach {:.4} < 0.1 \
         ({:.1} s); α = 0.45: loop persists (z ∈ [{:.2}, {:.2}]) ({:.1} s)",
        reference.metrics.repelling_dwell,
        reference.metrics.closest_approach_to_m,
        reference.seconds,
        wide.z_min,
        wide.z_max,
        wide.seconds
    ))
}

#[test]
fn criterion_09_chua3_canard_trajectory() {
    report(9, check_9());
}

// ---------------------------------------------------------------------------
// Criterion 10 — CLI determinism and sweep throughput
// ---------------------------------------------------------------------------

fn check_10() -> Result<String, String> {
    let bin = env!("CARGO_BIN_EXE_canard");
    let analyze = || -> Result<Vec<u8>, String> {
        let out = Command::new(bin)
            .args(["analyze", "--builtin", "chua3"])
            .output()
            .map_err(|e| format!("spawning the analyze subcommand: {e}"))?;
        if out.status.code() != Some(0) {
            return Err(format!(
                "analyze exited with {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        Ok(out.stdout)
    };
    let first = analyze()?;
    let second = analyze()?;
    if first != second {
        return Err("repeated analyze runs are not byte-identical".into());
    }

    let out_dir = std::env::temp_dir().join(format!(
        "canard-acceptance-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0)
    ));
    let started = Instant::now();
    let sweep = Command::new(bin)
        .args([
            "sweep",
            "--builtin",
            "chua3",
            "--sweep",
            "alpha",
            "--values",
            "0.45,0.35,0.2571389636,0.2571389",
            "--out-dir",
        ])
        .arg(&out_dir)
        .output()
        .map_err(|e| format!("spawning the sweep subcommand: {e}"))?;
    let elapsed = started.elapsed().as_secs_f64();
    let cleanup = || {
        let _ = std::fs::remove_dir_all(&out_dir);
    };
    if sweep.status.code() != Some(0) {
        cleanup();
        return Err(format!(
            "sweep exited with {:?}: {}",
            sweep.status.code(),
            String::from_utf8_lossy(&sweep.stderr)
        ));
    }
    if elapsed >= 180.0 {
        cleanup();
        return Err(format!("sweep took {elapsed:.1} s ≥ 180 s"));
    }
    let summary_raw = std::fs::read_to_string(out_dir.join("summary.json"))
        .map_err(|e| {
            cleanup();
            format!("reading summary.json: {e}")
        })?;
    let summary: serde_json::Value = serde_json::from_str(&summary_raw).map_err(|e| {
        cleanup();
        format!("parsing summary.json: {e}")
    })?;
    let results = summary["results"]
        .as_array()
        .cloned()
        .unwrap_or_default();
    cleanup();
    if results.len() != 4 || !results.iter().all(|r| r["ok"] == serde_json::json!(true)) {
        return Err(format!(
            "sweep summary does not contain 4 successful rows: {summary_raw}"
        ));
    }
    Ok(format!(
        "repeated analyze runs byte-identical ({} bytes); 4-value α sweep \
         finished in {:.2} s with every row ok",
        first.len(),
        elapsed
    ))
}

#[test]
fn criterion_10_cli_determinism_and_sweep() {
    report(10, check_10());
}
