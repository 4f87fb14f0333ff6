//! Pseudo-singular points of a slow-fast system and their classification
//! through the reduced-field Jacobian, yielding the Jacobian-criterion
//! canard verdict.
//!
//! A pseudo-singular point is a full-space point where
//!
//! ```text
//!   g = 0,   ∂g/∂y₁ = 0,   Σᵢ ∂g/∂xᵢ·fᵢ = 0
//! ```
//!
//! simultaneously — a fold point at which the slow flow is tangent to the
//! fold. Such points are equilibria of the reduced normalized field, and
//! their saddle/node/focus type decides whether trajectories can cross from
//! the attractive to the repelling sheet of the slow manifold (the canard
//! mechanism).
//!
//! With three slow variables the defining system is under-determined (three
//! equations, four unknowns) and solutions can form one-parameter families;
//! the search detects this, reports the family direction, and returns a
//! representative with the free coordinate pinned to 0.
//!
//! Note: in the three-slow-variable case the tangency residual sums over
//! *all three* slow variables, following the defining equations rather than
//! the narrower two-variable projection mentioned in passing in the source
//! text's definition.

use crate::diffgeo::{classify_matrix, jacobian, Classification, SpectrumReport, VectorField};
use crate::error::{Error, NumError, Result};
use crate::jet::{Jet2, JetScalar};
use crate::slowfast::{ModelKind, ReducedField, SlowFastSystem};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Canard verdict attached to a single point or a whole analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CanardVerdict {
    CanardBySaddle,
    DegenerateCanardBySaddle,
    NoCanardEvidence,
}

impl fmt::Display for CanardVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CanardVerdict::CanardBySaddle => "CanardBySaddle",
            CanardVerdict::DegenerateCanardBySaddle => "DegenerateCanardBySaddle",
            CanardVerdict::NoCanardEvidence => "NoCanardEvidence",
        };
        f.write_str(s)
    }
}

/// A located pseudo-singular point with classification and verdict.
#[derive(Debug, Clone, Serialize)]
pub struct PseudoSingularPoint {
    /// Chart coordinates (x₂, …, x_p, y₁).
    pub chart_coords: Vec<f64>,
    /// Full-space coordinates (x₁, …, x_p, y₁).
    pub full_coords: Vec<f64>,
    /// ‖(g, ∂g/∂y₁, Σ ∂g/∂xᵢ fᵢ)‖₂, re-evaluated independently of the
    /// solver.
    pub residual_norm: f64,
    pub spectrum: SpectrumReport,
    pub verdict: CanardVerdict,
    /// True when the point lies on a one-parameter solution family.
    pub family: bool,
    /// Unit direction of the family in full-space coordinates.
    pub family_dir: Option<Vec<f64>>,
    pub notes: Vec<String>,
}

/// Counters describing a pseudo-singular search run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SearchDiagnostics {
    pub seeds_total: usize,
    pub seeds_converged: usize,
    pub seeds_failed: usize,
    pub seeds_skipped_singular: usize,
    pub roots_discarded_out_of_box: usize,
    pub roots_merged_duplicates: usize,
    /// First few seeds skipped due to a singular Jacobian (for logging).
    pub skipped_seed_examples: Vec<Vec<f64>>,
}

/// Symbolic saddle-threshold check for a recognized built-in model.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdCheck {
    pub description: String,
    pub satisfied: bool,
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// Result of the Jacobian-criterion analysis.
#[derive(Debug, Clone, Serialize)]
pub struct JacobianAnalysis {
    pub points: Vec<PseudoSingularPoint>,
    pub verdict: CanardVerdict,
    pub threshold_check: Option<ThresholdCheck>,
    pub diagnostics: SearchDiagnostics,
}

// ---------------------------------------------------------------------------
// Residuals
// ---------------------------------------------------------------------------

/// The three defining residuals (g, ∂g/∂y₁, Σᵢ ∂g/∂xᵢ·fᵢ) at a full-space
/// point, over any jet scalar.
pub fn pseudo_singular_residual_generic<C: JetScalar>(
    system: &SlowFastSystem,
    full: &[C],
) -> Result<Vec<C>, NumError> {
    let n = system.dim();
    if full.len() != n {
        return Err(NumError::Shape(format!(
            "expected a full-space point with {n} coordinates, got {}",
            full.len()
        )));
    }
    let seeds: Vec<Jet2<C>> = (0..n)
        .map(|i| Jet2::variable(n, i, full[i].clone()))
        .collect();
    let gj = system.g_compiled().eval(&seeds)?;
    let zero = C::from_f64(0.0);
    let g_partial = |i: usize| -> C {
        if gj.dim() == n {
            gj.grad(i).clone()
        } else {
            zero.clone()
        }
    };
    let g = gj.val().clone();
    let g_y = g_partial(n - 1);
    let mut tangency = C::from_f64(0.0);
    for (i, f) in system.f_compiled().iter().enumerate() {
        tangency = tangency.add(&g_partial(i).mul(&f.eval(full)?));
    }
    Ok(vec![g, g_y, tangency])
}

/// Plain-real defining residuals.
pub fn pseudo_singular_residual(system: &SlowFastSystem, full: &[f64]) -> Result<[f64; 3]> {
    let r = pseudo_singular_residual_generic(system, full)?;
    Ok([r[0], r[1], r[2]])
}

/// Residual vector together with its 3×n Jacobian, assembled from the value,
/// gradient, and Hessian of g plus the gradients of the fᵢ (no nested jets
/// needed: the residual is first-order in derivatives of g except for rows
/// that read the Hessian).
fn residual_and_jacobian(
    system: &SlowFastSystem,
    full: &[f64],
) -> Result<([f64; 3], Vec<Vec<f64>>), NumError> {
    let n = system.dim();
    let p = n - 1;
    let seeds: Vec<Jet2<f64>> = (0..n).map(|i| Jet2::variable(n, i, full[i])).collect();
    let gj = system.g_compiled().eval(&seeds)?;
    let gdim = gj.dim();
    let gg = |i: usize| if gdim == n { *gj.grad(i) } else { 0.0 };
    let gh = |i: usize, j: usize| if gdim == n { *gj.hess(i, j) } else { 0.0 };
    let mut fvals = vec![0.0; p];
    let mut fgrads = vec![vec![0.0; n]; p];
    for (i, f) in system.f_compiled().iter().enumerate() {
        let fj = f.eval(&seeds)?;
        fvals[i] = *fj.val();
        for j in 0..n {
            fgrads[i][j] = if fj.dim() == n { *fj.grad(j) } else { 0.0 };
        }
    }
    let r0 = *gj.val();
    let r1 = gg(n - 1);
    let r2 = (0..p).map(|i| gg(i) * fvals[i]).sum::<f64>();
    let mut jac = vec![vec![0.0; n]; 3];
    for j in 0..n {
        jac[0][j] = gg(j);
        jac[1][j] = 0.5 * (gh(n - 1, j) + gh(j, n - 1));
        jac[2][j] = (0..p)
            .map(|i| 0.5 * (gh(i, j) + gh(j, i)) * fvals[i] + gg(i) * fgrads[i][j])
            .sum();
    }
    Ok(([r0, r1, r2], jac))
}

// ---------------------------------------------------------------------------
// Small linear solves
// ---------------------------------------------------------------------------

/// Solve an n×n system (n ≤ 4) by partial-pivot elimination; `None` when
/// the matrix is numerically singular.
fn solve_small(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(*rhs);
            r
        })
        .collect();
    let scale: f64 = m
        .iter()
        .flat_map(|r| r[..n].iter())
        .fold(0.0f64, |acc, v| acc.max(f64::abs(*v)));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .expect("finite")
        })?;
        if m[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        m.swap(piv, col);
        for r in (col + 1)..n {
            let factor = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= factor * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for c in (row + 1)..n {
            acc -= m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Generalized cross product of three 4-vectors (the rows of `j`): the
/// vector orthogonal to all three, with components the signed 3×3 minors.
fn null_direction_4(j: &[Vec<f64>]) -> Vec<f64> {
    let minor = |skip: usize| -> f64 {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let m: Vec<Vec<f64>> = (0..3)
            .map(|r| cols.iter().map(|&c| j[r][c]).collect())
            .collect();
        crate::diffgeo::det_f64(&m).expect("3x3 finite")
    };
    (0..4)
        .map(|i| if i % 2 == 0 { minor(i) } else { -minor(i) })
        .collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(f64::abs(*x)))
}

// ---------------------------------------------------------------------------
// Newton search
// ---------------------------------------------------------------------------

const MAX_NEWTON_ITERS: usize = 50;
const MAX_BACKTRACKS: usize = 30;
const ACCEPT_RESIDUAL: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-6;

enum SeedOutcome {
    Converged(Vec<f64>),
    SingularJacobian,
    Failed,
}

/// One damped-Newton run. `pin` optionally fixes coordinate `pin.0` at
/// value `pin.1`, shrinking the 4-unknown system to a square 3×3 one.
fn newton_from(
    system: &SlowFastSystem,
    seed: &[f64],
    pin: Option<(usize, f64)>,
) -> SeedOutcome {
    let n = system.dim();
    let mut x = seed.to_vec();
    if let Some((k, v)) = pin {
        x[k] = v;
    }
    let mut r = match residual_and_jacobian(system, &x) {
        Ok((r, _)) => r,
        Err(_) => return SeedOutcome::Failed,
    };
    for _ in 0..MAX_NEWTON_ITERS {
        if norm_inf(&r) <= 1e-12 * (1.0 + norm_inf(&x)) {
            return SeedOutcome::Converged(x);
        }
        let jac = match residual_and_jacobian(system, &x) {
            Ok((_, j)) => j,
            Err(_) => return SeedOutcome::Failed,
        };
        // Build the square step system.
        let delta = if n == 3 {
            match solve_small(&jac, &[-r[0], -r[1], -r[2]]) {
                Some(d) => d,
                None => return SeedOutcome::SingularJacobian,
            }
        } else {
            match pin {
                Some((k, _)) => {
                    // Eliminate the pinned column: 3×3 on the free coords.
                    let free: Vec<usize> = (0..n).filter(|&c| c != k).collect();
                    let a: Vec<Vec<f64>> = (0..3)
                        .map(|row| free.iter().map(|&c| jac[row][c]).collect())
                        .collect();
                    match solve_small(&a, &[-r[0], -r[1], -r[2]]) {
                        Some(d) => {
                            let mut full = vec![0.0; n];
                            for (idx, &c) in free.iter().enumerate() {
                                full[c] = d[idx];
                            }
                            full
                        }
                        None => return SeedOutcome::SingularJacobian,
                    }
                }
                None => {
                    // Bordered system: step orthogonal to the (approximate)
                    // null direction of the 3×4 Jacobian.
                    let v = null_direction_4(&jac);
                    let vn = norm2(&v);
                    if vn <= 1e-14 {
                        return SeedOutcome::SingularJacobian;
                    }
                    let vhat: Vec<f64> = v.iter().map(|c| c / vn).collect();
                    let mut rows = jac.clone();
                    rows.push(vhat);
                    match solve_small(&rows, &[-r[0], -r[1], -r[2], 0.0]) {
                        Some(d) => d,
                        None => return SeedOutcome::SingularJacobian,
                    }
                }
            }
        };
        // Backtracking line search on the residual norm.
        let base = norm2(&r);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_BACKTRACKS {
            let trial: Vec<f64> = x
                .iter()
                .zip(&delta)
                .map(|(xi, di)| xi + lambda * di)
                .collect();
            if let Ok((rt, _)) = residual_and_jacobian(system, &trial) {
                if norm2(&rt) < base || norm2(&rt) <= 1e-15 {
                    x = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return SeedOutcome::Failed;
        }
    }
    if norm_inf(&r) <= 1e-10 * (1.0 + norm_inf(&x)) {
        SeedOutcome::Converged(x)
    } else {
        SeedOutcome::Failed
    }
}

/// Probe whether the residual stays (near) zero along ±dir from `x`: a
/// rank-deficient Jacobian alone may be a coincidence; a genuinely flat
/// residual direction marks a solution family.
fn family_probe(system: &SlowFastSystem, x: &[f64], dir: &[f64]) -> bool {
    for h in [1e-3, 1e-2] {
        for sgn in [1.0, -1.0] {
            let probe: Vec<f64> = x
                .iter()
                .zip(dir)
                .map(|(xi, di)| xi + sgn * h * di)
                .collect();
            match pseudo_singular_residual(system, &probe) {
                Ok(r) => {
                    if norm2(&r) > 1e-8 {
                        return false;
                    }
                }
                Err(_) => return false,
            }
        }
    }
    true
}

/// Locate pseudo-singular points in `search_box` (one `(lo, hi)` interval
/// per full-space variable) by damped Newton seeded from every cell center
/// of a `grid`-per-axis lattice. Returns deduplicated points sorted by
/// chart coordinates, plus search diagnostics.
pub fn find_pseudo_singular_with_diag(
    system: &SlowFastSystem,
    search_box: &[(f64, f64)],
    grid: usize,
) -> Result<(Vec<PseudoSingularPoint>, SearchDiagnostics)> {
    let n = system.dim();
    if search_box.len() != n {
        return Err(Error::Precondition(format!(
            "search box has {} intervals, system has {n} variables",
            search_box.len()
        )));
    }
    if search_box.iter().any(|(lo, hi)| !(lo < hi)) {
        return Err(Error::Precondition(
            "search box intervals must satisfy lo < hi".into(),
        ));
    }
    if grid < 2 {
        return Err(Error::Precondition("grid_per_axis must be at least 2".into()));
    }
    let mut diag = SearchDiagnostics::default();
    let reduced = system.reduce();

    // Roots as raw full-space points, pre-classification.
    struct Root {
        full: Vec<f64>,
        residual_norm: f64,
        family: bool,
        family_dir: Option<Vec<f64>>,
        notes: Vec<String>,
    }
    let mut roots: Vec<Root> = Vec::new();

    let mut idx = vec![0usize; n];
    'seeds: loop {
        let seed: Vec<f64> = idx
            .iter()
            .zip(search_box)
            .map(|(&i, (lo, hi))| lo + (i as f64 + 0.5) * (hi - lo) / grid as f64)
            .collect();
        diag.seeds_total += 1;

        match newton_from(system, &seed, None) {
            SeedOutcome::Converged(x) => {
                diag.seeds_converged += 1;
                register_root(
                    system,
                    &reduced,
                    search_box,
                    x,
                    &mut roots,
                    &mut diag,
                )?;
            }
            SeedOutcome::SingularJacobian => {
                diag.seeds_skipped_singular += 1;
                if diag.skipped_seed_examples.len() < 5 {
                    diag.skipped_seed_examples.push(seed.clone());
                }
            }
            SeedOutcome::Failed => diag.seeds_failed += 1,
        }

        let mut k = n;
        loop {
            if k == 0 {
                break 'seeds;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < grid {
                break;
            }
            idx[k] = 0;
        }
    }

    // Classify, attach verdicts, sort.
    let mut points = Vec::with_capacity(roots.len());
    for root in roots {
        let chart = root.full[1..].to_vec();
        let spectrum = classify_reduced(&reduced, &chart)?;
        let verdict = match spectrum.classification {
            Classification::Saddle => CanardVerdict::CanardBySaddle,
            Classification::DegenerateSaddle => CanardVerdict::DegenerateCanardBySaddle,
            _ => CanardVerdict::NoCanardEvidence,
        };
        let mut notes = root.notes;
        if root.family {
            if let Some(dir) = &root.family_dir {
                notes.push(family_spectrum_note(&reduced, &root.full, dir, &spectrum));
            }
        }
        points.push(PseudoSingularPoint {
            chart_coords: chart,
            full_coords: root.full,
            residual_norm: root.residual_norm,
            spectrum,
            verdict,
            family: root.family,
            family_dir: root.family_dir,
            notes,
        });
    }
    points.sort_by(|a, b| {
        a.chart_coords
            .partial_cmp(&b.chart_coords)
            .expect("finite coordinates")
    });
    return Ok((points, diag));

    // Converged-point handling: family detection, representative pinning,
    // out-of-box filtering, dedup.
    #[allow(clippy::too_many_arguments)]
    fn register_root(
        system: &SlowFastSystem,
        _reduced: &ReducedField,
        search_box: &[(f64, f64)],
        mut x: Vec<f64>,
        roots: &mut Vec<Root>,
        diag: &mut SearchDiagnostics,
    ) -> Result<()> {
        let n = system.dim();
        let mut family = false;
        let mut family_dir = None;
        let mut notes = Vec::new();
        if n == 4 {
            // Under-determined case: detect a solution family through the
            // Jacobian null direction plus a flatness probe.
            let (_, jac) = residual_and_jacobian(system, &x)
                .map_err(crate::error::Error::from)?;
            let v = null_direction_4(&jac);
            let vn = norm2(&v);
            let row_scale = jac
                .iter()
                .flat_map(|r| r.iter())
                .fold(0.0f64, |acc, c| acc.max(f64::abs(*c)));
            let vhat: Vec<f64> = if vn > 1e-10 * (1.0 + row_scale.powi(3)) {
                v.iter().map(|c| c / vn).collect()
            } else {
                vec![0.0; 4]
            };
            if norm2(&vhat) > 0.5 && family_probe(system, &x, &vhat) {
                family = true;
                // Representative: pin the dominant free coordinate to the
                // conventional value 0 and re-converge in the pinned chart.
                let dominant = (0..4)
                    .max_by(|&i, &j| {
                        vhat[i]
                            .abs()
                            .partial_cmp(&vhat[j].abs())
                            .expect("finite")
                    })
                    .expect("nonempty");
                match newton_from(system, &x, Some((dominant, 0.0))) {
                    SeedOutcome::Converged(xr) => {
                        x = xr;
                        notes.push(format!(
                            "one-parameter solution family; representative pinned at \
                             {} = 0",
                            system.full_var_names()[dominant]
                        ));
                    }
                    _ => {
                        notes.push(
                            "one-parameter solution family; pinning the free \
                             coordinate to 0 did not converge, reporting an \
                             unpinned family point"
                                .to_string(),
                        );
                    }
                }
                let mut dir = vhat;
                // Normalize sign for determinism: first nonzero component
                // positive.
                if let Some(first) = dir.iter().find(|c| f64::abs(**c) > 1e-12) {
                    if *first < 0.0 {
                        for c in &mut dir {
                            *c = -*c;
                        }
                    }
                }
                family_dir = Some(dir);
            }
        }
        // Independent residual re-check.
        let r = pseudo_singular_residual(system, &x)?;
        let rn = norm2(&r);
        if rn > ACCEPT_RESIDUAL {
            diag.seeds_failed += 1;
            return Ok(());
        }
        // Out-of-box roots are discarded (a seed's Newton run may wander).
        let margin = 1e-9;
        let inside = x.iter().zip(search_box).all(|(xi, (lo, hi))| {
            let w = hi - lo;
            *xi >= lo - margin * (1.0 + w) && *xi <= hi + margin * (1.0 + w)
        });
        if !inside {
            diag.roots_discarded_out_of_box += 1;
            return Ok(());
        }
        // Dedup in the chart metric.
        for existing in roots.iter_mut() {
            let close = existing.full[1..]
                .iter()
                .zip(&x[1..])
                .all(|(a, b)| (a - b).abs() <= DEDUP_TOL);
            if close {
                diag.roots_merged_duplicates += 1;
                if rn < existing.residual_norm {
                    existing.full = x;
                    existing.residual_norm = rn;
                    existing.family = family;
                    existing.family_dir = family_dir;
                    existing.notes = notes;
                }
                return Ok(());
            }
        }
        roots.push(Root {
            full: x,
            residual_norm: rn,
            family,
            family_dir,
            notes,
        });
        Ok(())
    }
}

/// Probe the spectrum along a solution family: the defining equations leave
/// the family coordinate free, but the reduced-field Jacobian may still
/// depend on it, so the classification is sampled at ±0.5 along the family
/// and any variation reported rather than assumed away.
fn family_spectrum_note(
    reduced: &ReducedField,
    full: &[f64],
    dir: &[f64],
    at_rep: &SpectrumReport,
) -> String {
    let mut labels = Vec::new();
    for offset in [-0.5, 0.5] {
        let probe_full: Vec<f64> = full
            .iter()
            .zip(dir)
            .map(|(x, d)| x + offset * d)
            .collect();
        let chart = &probe_full[1..];
        match classify_reduced(reduced, chart) {
            Ok(rep) => labels.push(format!("{} at offset {offset:+}", rep.classification)),
            Err(_) => labels.push(format!("unclassifiable at offset {offset:+}")),
        }
    }
    let varies = !labels
        .iter()
        .all(|l| l.starts_with(&at_rep.classification.to_string()));
    if varies {
        format!(
            "classification varies along the family: {} (representative: {})",
            labels.join(", "),
            at_rep.classification
        )
    } else {
        format!(
            "classification constant along the family at probes ±0.5: {}",
            at_rep.classification
        )
    }
}

/// [`find_pseudo_singular_with_diag`] without the diagnostics.
pub fn find_pseudo_singular(
    system: &SlowFastSystem,
    search_box: &[(f64, f64)],
    grid: usize,
) -> Result<Vec<PseudoSingularPoint>> {
    Ok(find_pseudo_singular_with_diag(system, search_box, grid)?.0)
}

// ---------------------------------------------------------------------------
// Classification and verdicts
// ---------------------------------------------------------------------------

/// Spectrum report of a field's Jacobian at an equilibrium chart point.
///
/// Precondition: the point must actually be an equilibrium
/// (‖field(point)‖∞ < 1e−6); pseudo-singular points satisfy this by
/// construction.
pub fn classify_reduced<F>(field: &F, chart: &[f64]) -> Result<SpectrumReport>
where
    F: VectorField + ?Sized,
{
    let v = field.eval(chart)?;
    let vn = norm_inf(&v);
    if vn >= 1e-6 {
        return Err(Error::Precondition(format!(
            "classify_reduced requires an equilibrium point; ‖field‖∞ = {vn:.3e} \
             at {chart:?}"
        )));
    }
    let j = jacobian(field, chart)?;
    classify_matrix(&j)
}

fn threshold_check_for(system: &SlowFastSystem) -> Option<ThresholdCheck> {
    match system.kind() {
        ModelKind::Chua3 => {
            let alpha = *system.params().get("alpha")?;
            let lhs = 3.0 + 40.0 * alpha;
            Some(ThresholdCheck {
                description: "pseudo-singular saddle iff 3 + 40·alpha > 0 and alpha > 0"
                    .into(),
                satisfied: lhs > 0.0 && alpha > 0.0,
                values: [
                    ("alpha".to_string(), alpha),
                    ("3 + 40*alpha".to_string(), lhs),
                ]
                .into(),
                notes: vec![],
            })
        }
        ModelKind::Chua4 => {
            let alpha2 = *system.params().get("alpha2")?;
            let c2 = *system.params().get("c2")?;
            let denom = 3.0 + 2.0 * c2;
            let threshold = -2.0 * c2 / denom;
            let mut notes = vec![];
            if denom <= 0.0 {
                notes.push(
                    "threshold formula assumes 3 + 2·c2 > 0; it does not apply to \
                     these parameters"
                        .to_string(),
                );
            }
            Some(ThresholdCheck {
                description: "pseudo-singular saddle (degenerate) iff \
                              alpha2 < -2*c2/(3 + 2*c2)"
                    .into(),
                satisfied: denom > 0.0 && alpha2 < threshold,
                values: [
                    ("alpha2".to_string(), alpha2),
                    ("c2".to_string(), c2),
                    ("-2*c2/(3 + 2*c2)".to_string(), threshold),
                ]
                .into(),
                notes,
            })
        }
        ModelKind::Custom => None,
    }
}

/// Run the full Jacobian-criterion analysis: locate pseudo-singular points,
/// classify each, and derive the overall verdict — `CanardBySaddle` if any
/// point is a saddle, `DegenerateCanardBySaddle` if saddles appear only in
/// the degenerate (zero-eigenvalue) form, `NoCanardEvidence` otherwise.
/// For the built-in models the symbolic parameter-threshold check is
/// attached.
pub fn canard_verdict_jacobian(
    system: &SlowFastSystem,
    search_box: &[(f64, f64)],
    grid: usize,
) -> Result<JacobianAnalysis> {
    let (points, diagnostics) = find_pseudo_singular_with_diag(system, search_box, grid)?;
    let verdict = if points
        .iter()
        .any(|p| p.spectrum.classification == Classification::Saddle)
    {
        CanardVerdict::CanardBySaddle
    } else if points
        .iter()
        .any(|p| p.spectrum.classification == Classification::DegenerateSaddle)
    {
        CanardVerdict::DegenerateCanardBySaddle
    } else {
        CanardVerdict::NoCanardEvidence
    };
    Ok(JacobianAnalysis {
        points,
        verdict,
        threshold_check: threshold_check_for(system),
        diagnostics,
    })
}
