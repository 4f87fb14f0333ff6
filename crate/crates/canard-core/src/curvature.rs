//! Flow curvature manifolds and the Second Derivative Test, yielding the
//! curvature-criterion canard verdict.
//!
//! For a field ẋ = F(x) on ℝⁿ the *flow curvature manifold* is the zero set
//! of
//!
//! ```text
//!   φ(x) = det(Ẋ, Ẍ, …, X⁽ⁿ⁾)
//! ```
//!
//! where the time derivatives are evaluated along the trajectory through x.
//! Canard detection proceeds by testing whether a pseudo-singular point is a
//! saddle of φ: compute ∇φ and the Hessian H(φ) there and classify the
//! critical point by the leading principal minors D₁, D₂ (and D₃ in 3D
//! charts).
//!
//! ## A structural caveat for 3D charts
//!
//! At an exact equilibrium M of a smooth field, every column of the
//! curvature matrix vanishes linearly in (x − M), so φ vanishes to order n
//! at M. In a 2D chart (n = 2) the Hessian of φ carries exactly the leading
//! quadratic term and the test is decisive. In a 3D chart (n = 3), however,
//! φ vanishes to *third* order, hence φ(M) = ∇φ(M) = H(M) = 0 identically
//! and the Second Derivative Test is structurally inconclusive at M itself.
//! Pseudo-singular points are equilibria of the reduced field, so 3D-chart
//! reports at such points are honestly labeled `Degenerate` rather than
//! forced into a sign pattern; the sensitivity probes (offsets along a
//! solution family) are reported alongside.

use crate::diffgeo::{
    det_f64, det_small, gradient, hessian, trajectory_jets, trajectory_jets_generic,
    Classification, ScalarField, VectorField,
};
use crate::error::{Error, NumError, Result};
use crate::jet::JetScalar;
use crate::pseudosing::{CanardVerdict, PseudoSingularPoint};
use crate::slowfast::{ModelKind, SlowFastSystem};
use serde::Serialize;
use std::fmt;

/// Critical-point type of φ from the Second Derivative Test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HessianClass {
    LocalMin,
    LocalMax,
    Saddle,
    Degenerate,
}

impl fmt::Display for HessianClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HessianClass::LocalMin => "LocalMin",
            HessianClass::LocalMax => "LocalMax",
            HessianClass::Saddle => "Saddle",
            HessianClass::Degenerate => "Degenerate",
        };
        f.write_str(s)
    }
}

/// Canard verdict of the curvature criterion. `Degenerate` means the test
/// was inconclusive (vanishing minors), not that canards are excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CurvatureVerdict {
    CanardByCurvatureSaddle,
    NoCanardEvidence,
    Degenerate,
}

impl fmt::Display for CurvatureVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CurvatureVerdict::CanardByCurvatureSaddle => "CanardByCurvatureSaddle",
            CurvatureVerdict::NoCanardEvidence => "NoCanardEvidence",
            CurvatureVerdict::Degenerate => "Degenerate",
        };
        f.write_str(s)
    }
}

/// Full record of a Second Derivative Test run at one point.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    pub phi: f64,
    pub grad_phi: Vec<f64>,
    pub grad_norm: f64,
    /// Symmetrized Hessian of φ.
    pub hessian: Vec<Vec<f64>>,
    /// Leading principal minors of the Hessian.
    pub d1: f64,
    pub d2: f64,
    /// Present only in 3D charts.
    pub d3: Option<f64>,
    pub hessian_class: HessianClass,
    /// True when ‖∇φ‖ exceeds the extremum tolerance — the Second
    /// Derivative Test formally assumes a critical point; the test still
    /// runs, but the violation is flagged rather than silently enforced.
    pub extremum_violated: bool,
    pub verdict: CurvatureVerdict,
    pub notes: Vec<String>,
}

/// Curvature report for one pseudo-singular point, with the cross-check
/// against the Jacobian-criterion classification.
#[derive(Debug, Clone, Serialize)]
pub struct PointCurvature {
    pub chart_coords: Vec<f64>,
    pub report: CurvatureReport,
    /// Reports at probe offsets along a solution family (4D models):
    /// `(offset, report)`.
    pub sensitivity: Vec<(f64, CurvatureReport)>,
    pub jacobian_classification: Classification,
    /// No *definitive* conflict: one method saying canard-yes while the
    /// other says canard-no. A `Degenerate` curvature outcome abstains and
    /// never conflicts; a DegenerateSaddle/Saddle label difference counts
    /// as agreement.
    pub agrees_with_jacobian: bool,
    pub notes: Vec<String>,
}

/// Result of the curvature-criterion analysis over a point set.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureAnalysis {
    pub reports: Vec<PointCurvature>,
    pub verdict: CurvatureVerdict,
    /// Fast-equation stiffness parameter of the 4D built-in, recorded
    /// because its sign conditions were derived asymptotically (β₂ ≪ 1).
    pub beta2: Option<f64>,
    pub agreement: AgreementSummary,
}

/// Cross-method agreement over all analyzed points.
#[derive(Debug, Clone, Serialize)]
pub struct AgreementSummary {
    pub agree: bool,
    /// Human-readable description of each definitive conflict.
    pub conflicts: Vec<String>,
}

// ---------------------------------------------------------------------------
// φ itself
// ---------------------------------------------------------------------------

/// Flow curvature φ = det(Ẋ, Ẍ, …, X⁽ⁿ⁾) of an n-dimensional field at a
/// point (2 ≤ n ≤ 6), by trajectory jets and partial-pivot elimination.
pub fn flow_curvature<F>(field: &F, point: &[f64]) -> Result<f64>
where
    F: VectorField + ?Sized,
{
    let n = field.dim();
    if !(2..=6).contains(&n) {
        return Err(Error::Precondition(format!(
            "flow_curvature requires dimension 2..=6, got {n}"
        )));
    }
    let jets = trajectory_jets(field, point, n)?;
    // Column j is the (j+1)-th time derivative.
    let m: Vec<Vec<f64>> = (0..n)
        .map(|row| (1..=n).map(|j| jets[j][row]).collect())
        .collect();
    det_f64(&m)
}

/// The flow curvature of a fixed field, as a scalar field evaluable over
/// jets — this is what makes ∇φ and H(φ) available exactly. Chart
/// dimensions 2 and 3 (the reduced-field cases).
#[derive(Debug, Clone)]
pub struct FlowCurvatureField<F: VectorField> {
    field: F,
}

impl<F: VectorField> FlowCurvatureField<F> {
    pub fn new(field: F) -> Result<Self> {
        let n = field.dim();
        if !(n == 2 || n == 3) {
            return Err(Error::Precondition(format!(
                "FlowCurvatureField supports chart dimensions 2 and 3, got {n}"
            )));
        }
        Ok(FlowCurvatureField { field })
    }

    pub fn inner(&self) -> &F {
        &self.field
    }
}

impl<F: VectorField> ScalarField for FlowCurvatureField<F> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<C, NumError> {
        let n = self.field.dim();
        // Construction pinned n to 2 or 3, so the only reachable failures
        // here are numeric ones.
        let jets = trajectory_jets_generic(&self.field, x, n).map_err(|e| match e {
            Error::Num(num) => num,
            other => NumError::Domain(other.to_string()),
        })?;
        let m: Vec<Vec<C>> = (0..n)
            .map(|row| (1..=n).map(|j| jets[j][row].clone()).collect())
            .collect();
        det_small(&m)
    }
}

/// Closed-form φ of a diagonal linear field at a point — the test oracle:
/// 2D: x₁x₂·λ₁λ₂·(λ₂−λ₁); 3D: x₁x₂x₃·λ₁λ₂λ₃·(λ₂−λ₁)(λ₁−λ₃)(λ₂−λ₃).
pub fn linear_identity_phi(eigenvalues: &[f64], point: &[f64]) -> Result<f64> {
    if eigenvalues.len() != point.len() {
        return Err(Error::Precondition(
            "eigenvalue and point lists must have equal length".into(),
        ));
    }
    match eigenvalues {
        [l1, l2] => Ok(point[0] * point[1] * l1 * l2 * (l2 - l1)),
        [l1, l2, l3] => Ok(point[0]
            * point[1]
            * point[2]
            * l1
            * l2
            * l3
            * ((l2 - l1) * (l1 - l3) * (l2 - l3))),
        _ => Err(Error::Precondition(
            "linear_identity_phi requires 2 or 3 eigenvalues".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Second Derivative Test
// ---------------------------------------------------------------------------

fn max_abs(m: &[Vec<f64>]) -> f64 {
    m.iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(f64::abs(*v)))
}

/// Second Derivative Test on an arbitrary scalar field (2D or 3D): value,
/// gradient, symmetrized Hessian, leading principal minors, and the
/// classification. The curvature criterion composes this over
/// [`FlowCurvatureField`]; the direct scalar path exists for engineered
/// test surfaces.
pub fn hessian_test_scalar<S>(phi: &S, point: &[f64]) -> Result<CurvatureReport>
where
    S: ScalarField + ?Sized,
{
    let n = phi.dim();
    if !(n == 2 || n == 3) {
        return Err(Error::Precondition(format!(
            "Second Derivative Test supports dimensions 2 and 3, got {n}"
        )));
    }
    if point.len() != n {
        return Err(Error::Precondition(format!(
            "point has {} coordinates, field has {n}",
            point.len()
        )));
    }
    let val = phi.eval(point)?;
    let grad = gradient(phi, point)?;
    let hess = hessian(phi, point)?;
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let hnorm = max_abs(&hess);

    let d1 = hess[0][0];
    let d2 = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
    // Closed-form cofactor expansion: no pivoting noise in a sign-critical
    // quantity.
    let d3 = (n == 3).then(|| {
        hess[0][0] * (hess[1][1] * hess[2][2] - hess[1][2] * hess[2][1])
            - hess[0][1] * (hess[1][0] * hess[2][2] - hess[1][2] * hess[2][0])
            + hess[0][2] * (hess[1][0] * hess[2][1] - hess[1][1] * hess[2][0])
    });

    // Dead zone for minor sign tests: sign decisions near machine epsilon
    // are meaningless.
    let tol = 1e-9 * (1.0 + hnorm * hnorm);
    let mut notes = Vec::new();
    let hessian_class = if n == 2 {
        if d2.abs() <= tol {
            HessianClass::Degenerate
        } else if d2 < 0.0 {
            HessianClass::Saddle
        } else if d1 > tol {
            HessianClass::LocalMin
        } else if d1 < -tol {
            HessianClass::LocalMax
        } else {
            // D₂ > 0 excludes D₁ = 0 exactly; reaching this means D₂ barely
            // cleared the dead zone while D₁ did not — numerically
            // unresolved.
            notes.push(
                "D2 > 0 but D1 within the dead zone: sign pattern numerically \
                 unresolved"
                    .to_string(),
            );
            HessianClass::Degenerate
        }
    } else {
        let d3v = d3.expect("3D chart");
        if d3v.abs() <= tol {
            HessianClass::Degenerate
        } else if d1 > tol && d2 > tol && d3v > 0.0 {
            HessianClass::LocalMin
        } else if d1 < -tol && d2 > tol && d3v < 0.0 {
            HessianClass::LocalMax
        } else {
            // Any other sign pattern of a nonsingular symmetric matrix is
            // indefinite.
            HessianClass::Saddle
        }
    };
    if hessian_class == HessianClass::Degenerate && hnorm <= tol {
        notes.push(
            "Hessian of φ vanishes at this point (φ has a zero of order ≥ 3, \
             as it must at an exact equilibrium in a 3D chart); the Second \
             Derivative Test carries no sign information here"
                .to_string(),
        );
    }

    let extremum_tol = 1e-6 * (1.0 + val.abs() + hnorm);
    let extremum_violated = grad_norm > extremum_tol;
    if extremum_violated {
        notes.push(format!(
            "‖∇φ‖ = {grad_norm:.3e} exceeds the extremum tolerance \
             {extremum_tol:.3e}: the point is not numerically critical for φ; \
             the Hessian classification is reported anyway"
        ));
    }

    let verdict = match hessian_class {
        HessianClass::Saddle => CurvatureVerdict::CanardByCurvatureSaddle,
        HessianClass::Degenerate => CurvatureVerdict::Degenerate,
        HessianClass::LocalMin | HessianClass::LocalMax => CurvatureVerdict::NoCanardEvidence,
    };

    Ok(CurvatureReport {
        point: point.to_vec(),
        phi: val,
        grad_phi: grad,
        grad_norm,
        hessian: hess,
        d1,
        d2,
        d3,
        hessian_class,
        extremum_violated,
        verdict,
        notes,
    })
}

/// Second Derivative Test of the flow curvature φ of `field` at `point`.
pub fn curvature_hessian_test<F>(field: &F, point: &[f64]) -> Result<CurvatureReport>
where
    F: VectorField + ?Sized,
{
    let fc = FlowCurvatureField::new(field)?;
    hessian_test_scalar(&fc, point)
}

// ---------------------------------------------------------------------------
// Verdict over a point set
// ---------------------------------------------------------------------------

fn jacobian_says_canard(c: Classification) -> Option<bool> {
    match c {
        Classification::Saddle | Classification::DegenerateSaddle => Some(true),
        Classification::Node | Classification::Focus => Some(false),
        Classification::Indeterminate => None,
    }
}

fn curvature_says_canard(v: CurvatureVerdict) -> Option<bool> {
    match v {
        CurvatureVerdict::CanardByCurvatureSaddle => Some(true),
        CurvatureVerdict::NoCanardEvidence => Some(false),
        CurvatureVerdict::Degenerate => None,
    }
}

/// Run the curvature criterion at every pseudo-singular point found by the
/// Jacobian-criterion search, cross-checking the two methods.
///
/// The overall verdict is `CanardByCurvatureSaddle` when any point is a
/// saddle of φ, `Degenerate` when the test abstained everywhere it could
/// have fired, and `NoCanardEvidence` otherwise. For points on a solution
/// family the test is additionally run at offsets ±0.5 along the family to
/// record sensitivity.
pub fn canard_verdict_curvature(
    system: &SlowFastSystem,
    points: &[PseudoSingularPoint],
) -> Result<CurvatureAnalysis> {
    let reduced = system.reduce();
    let mut reports = Vec::with_capacity(points.len());
    let mut conflicts = Vec::new();
    for p in points {
        let report = curvature_hessian_test(&reduced, &p.chart_coords)?;
        let mut sensitivity = Vec::new();
        if p.family {
            if let Some(dir) = &p.family_dir {
                // Chart components of the full-space family direction.
                let chart_dir = &dir[1..];
                for offset in [-0.5, 0.5] {
                    let probe: Vec<f64> = p
                        .chart_coords
                        .iter()
                        .zip(chart_dir)
                        .map(|(c, d)| c + offset * d)
                        .collect();
                    if let Ok(r) = curvature_hessian_test(&reduced, &probe) {
                        sensitivity.push((offset, r));
                    }
                }
            }
        }
        let jc = p.spectrum.classification;
        let mut notes = Vec::new();
        let agrees = match (jacobian_says_canard(jc), curvature_says_canard(report.verdict)) {
            (Some(a), Some(b)) if a != b => {
                let msg = format!(
                    "definitive conflict at chart point {:?}: Jacobian criterion says \
                     {} ({jc}), curvature criterion says {} ({})",
                    p.chart_coords,
                    if a { "canard" } else { "no canard" },
                    if b { "canard" } else { "no canard" },
                    report.hessian_class,
                );
                conflicts.push(msg.clone());
                notes.push(msg);
                false
            }
            _ => true,
        };
        reports.push(PointCurvature {
            chart_coords: p.chart_coords.clone(),
            report,
            sensitivity,
            jacobian_classification: jc,
            agrees_with_jacobian: agrees,
            notes,
        });
    }
    let verdict = if reports
        .iter()
        .any(|r| r.report.hessian_class == HessianClass::Saddle)
    {
        CurvatureVerdict::CanardByCurvatureSaddle
    } else if reports
        .iter()
        .any(|r| r.report.hessian_class == HessianClass::Degenerate)
    {
        CurvatureVerdict::Degenerate
    } else {
        CurvatureVerdict::NoCanardEvidence
    };
    let beta2 = match system.kind() {
        ModelKind::Chua4 => system.params().get("beta2").copied(),
        _ => None,
    };
    Ok(CurvatureAnalysis {
        reports,
        verdict,
        beta2,
        agreement: AgreementSummary {
            agree: conflicts.is_empty(),
            conflicts,
        },
    })
}

/// Definitive-conflict check between the two overall verdicts, with the
/// same abstention semantics as the per-point cross-check.
pub fn verdicts_conflict(jacobian: CanardVerdict, curvature: CurvatureVerdict) -> bool {
    let j = match jacobian {
        CanardVerdict::CanardBySaddle | CanardVerdict::DegenerateCanardBySaddle => Some(true),
        CanardVerdict::NoCanardEvidence => Some(false),
    };
    match (j, curvature_says_canard(curvature)) {
        (Some(a), Some(b)) => a != b,
        _ => false,
    }
}
