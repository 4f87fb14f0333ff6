//! Trajectory integration for the full stiff slow-fast system, plus canard
//! dwell metrics and CSV export.
//!
//! The workhorse is an explicit embedded Dormand–Prince 5(4) pair with
//! FSAL, PI step-size control, and a 4th-order dense-output interpolant, so
//! sample times never constrain step selection. At the parameter scales
//! handled here (ε of order 1/20 … 1/10) stiffness is mild enough for an
//! explicit method with tight tolerances; a classical fixed-step RK4 mode
//! exists for byte-identical reproducibility, and a fixed-step mode of the
//! 5th-order pair supports order-of-convergence measurements.

use crate::diffgeo::VectorField;
use crate::error::{Error, Result};
use crate::slowfast::SlowFastSystem;
use serde::Serialize;
use std::io::Write;

/// Stepping regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StepMode {
    /// Embedded 5(4) pair with PI control (the default).
    Adaptive,
    /// The 5th-order stages at a fixed step (error estimate ignored).
    FixedDp5(f64),
    /// Classical 4th-order Runge–Kutta at a fixed step.
    FixedRk4(f64),
}

/// Solver options; defaults follow the design tolerances (rel 1e−9,
/// abs 1e−11, max step 1e−2 slow-time units) — canard trajectories are
/// exponentially sensitive near the repelling branch, which makes tight
/// tolerances mandatory.
#[derive(Debug, Clone, Serialize)]
pub struct SolverOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub mode: StepMode,
    /// Hard cap on accepted+rejected steps before aborting.
    pub max_steps: usize,
    pub samples: Samples,
}

impl Default for SolverOpts {
    fn default() -> Self {
        SolverOpts {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: 1e-2,
            mode: StepMode::Adaptive,
            max_steps: 20_000_000,
            samples: Samples::AcceptedSteps,
        }
    }
}

/// Where the trajectory is sampled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Samples {
    /// One sample per accepted step (plus the initial point).
    AcceptedSteps,
    /// `n` equal intervals across the span (`n+1` samples including both
    /// endpoints), evaluated through dense output.
    Uniform(usize),
    /// Explicit sample times; must be increasing and within the span.
    At(Vec<f64>),
}

/// Integration statistics and identification.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryMeta {
    pub solver: String,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
}

/// A sampled solution of ẋ = F(x).
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub meta: TrajectoryMeta,
}

/// Branch-dwell quantification of canard behavior along a trajectory:
/// slow time spent near the critical manifold (|g| < η) on the attracting
/// (∂g/∂y₁ < 0) and repelling (∂g/∂y₁ > 0) sheets, and the closest
/// approach to a reference point. `repelling_dwell > 0` is the canard
/// signature.
#[derive(Debug, Clone, Serialize)]
pub struct CanardMetrics {
    pub closest_approach_to_m: f64,
    pub attracting_dwell: f64,
    pub repelling_dwell: f64,
    pub eta: f64,
}

// ---------------------------------------------------------------------------
// Dormand–Prince 5(4) tableau
// ---------------------------------------------------------------------------

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
/// Also the 5th-order weights b (the pair is FSAL).
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
/// b − b̂: the embedded error weights (k7 included).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Dense-output weights (d2 = 0).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFE: f64 = 0.9;
const FAC1: f64 = 0.2; // min hnew/h
const FAC2: f64 = 10.0; // max hnew/h
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;

fn axpyv(y: &[f64], h: f64, coeffs: &[f64], ks: &[Vec<f64>]) -> Vec<f64> {
    let n = y.len();
    let mut out = y.to_vec();
    for (c, k) in coeffs.iter().zip(ks) {
        if *c != 0.0 {
            for i in 0..n {
                out[i] += h * c * k[i];
            }
        }
    }
    debug_assert_eq!(out.len(), n);
    out
}

fn eval_field<F: VectorField + ?Sized>(
    field: &F,
    x: &[f64],
    t: f64,
    evals: &mut usize,
) -> Result<Vec<f64>> {
    *evals += 1;
    field.eval(x).map_err(|e| {
        Error::Solve(format!(
            "right-hand side failed at t = {t:.6}: {e} — state {x:?}"
        ))
    })
}

/// Hairer-style starting step size: balance the scaled norms of the state
/// and its first two derivatives against the method order.
fn initial_step<F: VectorField + ?Sized>(
    field: &F,
    x0: &[f64],
    f0: &[f64],
    t0: f64,
    hmax: f64,
    rel: f64,
    abs: f64,
    evals: &mut usize,
) -> Result<f64> {
    let n = x0.len();
    let sk = |y: &f64| abs + rel * y.abs();
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..n {
        let s = sk(&x0[i]);
        dnf += (f0[i] / s).powi(2);
        dny += (x0[i] / s).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(hmax);
    let x1: Vec<f64> = (0..n).map(|i| x0[i] + h * f0[i]).collect();
    let f1 = eval_field(field, &x1, t0 + h, evals)?;
    let mut der2 = 0.0;
    for i in 0..n {
        let s = sk(&x0[i]);
        der2 += ((f1[i] - f0[i]) / s).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(1.0 / 5.0)
    };
    Ok(h.min(h1.min(100.0 * h)).min(hmax))
}

struct DenseSeg {
    t: f64,
    h: f64,
    cont: [Vec<f64>; 5],
}

impl DenseSeg {
    fn eval(&self, t: f64) -> Vec<f64> {
        let theta = if self.h == 0.0 { 0.0 } else { (t - self.t) / self.h };
        let th1 = 1.0 - theta;
        let n = self.cont[0].len();
        (0..n)
            .map(|i| {
                self.cont[0][i]
                    + theta
                        * (self.cont[1][i]
                            + th1
                                * (self.cont[2][i]
                                    + theta * (self.cont[3][i] + th1 * self.cont[4][i])))
            })
            .collect()
    }

    /// Cubic Hermite from endpoint values/derivatives, reshaped into the
    /// same nested evaluation scheme (cont4 = 0).
    fn hermite(t: f64, h: f64, y0: &[f64], y1: &[f64], f0: &[f64], f1: &[f64]) -> DenseSeg {
        let n = y0.len();
        let mut cont = [
            y0.to_vec(),
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
        ];
        for i in 0..n {
            let ydiff = y1[i] - y0[i];
            let bspl = h * f0[i] - ydiff;
            cont[1][i] = ydiff;
            cont[2][i] = bspl;
            cont[3][i] = ydiff - h * f1[i] - bspl;
        }
        DenseSeg { t, h, cont }
    }
}

/// Integrate ẋ = F(x) over `t_span`, sampling per `opts.samples`.
///
/// A zero-length span yields the single-sample trajectory {x0}. The
/// integration aborts with a diagnostic if the step size underflows —
/// for slow-fast systems that signals a fast time scale too stiff for an
/// explicit method at this tolerance (an ε below desk scale).
pub fn integrate<F>(field: &F, x0: &[f64], t_span: (f64, f64), opts: &SolverOpts) -> Result<Trajectory>
where
    F: VectorField + ?Sized,
{
    let n = field.dim();
    if x0.len() != n {
        return Err(Error::Precondition(format!(
            "initial state has {} coordinates, field has {n}",
            x0.len()
        )));
    }
    let (t0, t1) = t_span;
    if !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Precondition("t_span must be finite".into()));
    }
    if t1 < t0 {
        return Err(Error::Precondition(
            "t_span must be forward (t_end >= t_start)".into(),
        ));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::Precondition("initial state must be finite".into()));
    }
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0 && opts.max_step > 0.0) {
        return Err(Error::Precondition(
            "tolerances and max_step must be positive".into(),
        ));
    }

    let solver_name = match opts.mode {
        StepMode::Adaptive => "dopri5-adaptive",
        StepMode::FixedDp5(_) => "dopri5-fixed",
        StepMode::FixedRk4(_) => "rk4-fixed",
    };
    let mut meta = TrajectoryMeta {
        solver: solver_name.to_string(),
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_step: opts.max_step,
        steps_accepted: 0,
        steps_rejected: 0,
        rhs_evals: 0,
    };

    // Sample plan.
    let mut sample_queue: Vec<f64> = match &opts.samples {
        Samples::AcceptedSteps => Vec::new(),
        Samples::Uniform(m) => {
            if *m == 0 {
                return Err(Error::Precondition(
                    "Samples::Uniform needs at least 1 interval".into(),
                ));
            }
            (1..=*m)
                .map(|i| t0 + (t1 - t0) * i as f64 / *m as f64)
                .collect()
        }
        Samples::At(ts) => {
            if ts.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Precondition(
                    "sample times must be strictly increasing".into(),
                ));
            }
            if ts.iter().any(|t| *t < t0 || *t > t1) {
                return Err(Error::Precondition(
                    "sample times must lie within t_span".into(),
                ));
            }
            ts.clone()
        }
    };
    // Never emit t0 twice.
    while sample_queue.first().is_some_and(|t| *t <= t0) {
        sample_queue.remove(0);
    }
    let mut next_sample = 0usize;

    let mut times = vec![t0];
    let mut states = vec![x0.to_vec()];

    if t1 == t0 {
        return Ok(Trajectory { times, states, meta });
    }

    let record_step = matches!(opts.samples, Samples::AcceptedSteps);
    let mut emit = |seg: &DenseSeg,
                    t_new: f64,
                    y_new: &[f64],
                    times: &mut Vec<f64>,
                    states: &mut Vec<Vec<f64>>| {
        while next_sample < sample_queue.len() && sample_queue[next_sample] <= t_new {
            let ts = sample_queue[next_sample];
            // Exact endpoint: use the step value, not the interpolant.
            let y = if ts == t_new { y_new.to_vec() } else { seg.eval(ts) };
            times.push(ts);
            states.push(y);
            next_sample += 1;
        }
        if record_step {
            times.push(t_new);
            states.push(y_new.to_vec());
        }
    };

    let mut t = t0;
    let mut y = x0.to_vec();
    let mut k1 = eval_field(field, &y, t, &mut meta.rhs_evals)?;

    match opts.mode {
        StepMode::FixedRk4(h_fixed) => {
            if !(h_fixed > 0.0) {
                return Err(Error::Precondition("fixed step must be positive".into()));
            }
            let mut total_steps = 0usize;
            while t < t1 {
                total_steps += 1;
                if total_steps > opts.max_steps {
                    return Err(Error::Solve(format!(
                        "step budget exhausted at t = {t:.6}"
                    )));
                }
                let h = h_fixed.min(t1 - t);
                let k2x: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k1[i]).collect();
                let k2 = eval_field(field, &k2x, t + 0.5 * h, &mut meta.rhs_evals)?;
                let k3x: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k2[i]).collect();
                let k3 = eval_field(field, &k3x, t + 0.5 * h, &mut meta.rhs_evals)?;
                let k4x: Vec<f64> = (0..n).map(|i| y[i] + h * k3[i]).collect();
                let k4 = eval_field(field, &k4x, t + h, &mut meta.rhs_evals)?;
                let y_new: Vec<f64> = (0..n)
                    .map(|i| y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                    .collect();
                if !y_new.iter().all(|v| v.is_finite()) {
                    return Err(Error::Solve(format!(
                        "non-finite state at t = {:.6}",
                        t + h
                    )));
                }
                let t_new = t + h;
                let f_new = eval_field(field, &y_new, t_new, &mut meta.rhs_evals)?;
                let seg = DenseSeg::hermite(t, h, &y, &y_new, &k1, &f_new);
                emit(&seg, t_new, &y_new, &mut times, &mut states);
                t = t_new;
                y = y_new;
                k1 = f_new;
                meta.steps_accepted += 1;
            }
        }
        StepMode::Adaptive | StepMode::FixedDp5(_) => {
            let fixed_h = match opts.mode {
                StepMode::FixedDp5(h) => {
                    if !(h > 0.0) {
                        return Err(Error::Precondition(
                            "fixed step must be positive".into(),
                        ));
                    }
                    Some(h)
                }
                _ => None,
            };
            let mut h = match fixed_h {
                Some(h) => h,
                None => initial_step(
                    field,
                    &y,
                    &k1,
                    t,
                    opts.max_step,
                    opts.rel_tol,
                    opts.abs_tol,
                    &mut meta.rhs_evals,
                )?,
            };
            let mut facold: f64 = 1e-4;
            let mut total_steps = 0usize;
            while t < t1 {
                total_steps += 1;
                if total_steps > opts.max_steps {
                    return Err(Error::Solve(format!(
                        "step budget exhausted at t = {t:.6} (accepted {}, rejected {})",
                        meta.steps_accepted, meta.steps_rejected
                    )));
                }
                if h < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::Solve(format!(
                        "step size underflow at t = {t:.6}: the fast time scale is \
                         too stiff for an explicit solver at this tolerance — an ε \
                         this small is outside desk scale; increase tolerances, the \
                         max step, or ε"
                    )));
                }
                h = match fixed_h {
                    // The requested step wins over max_step; only the final
                    // step is truncated to land exactly on t1.
                    Some(hf) => hf.min(t1 - t),
                    None => h.min(t1 - t).min(opts.max_step),
                };

                // The six intermediate stages (k1 carried over, FSAL).
                let y2 = axpyv(&y, h, &A2, std::slice::from_ref(&k1));
                let k2 = eval_field(field, &y2, t + C[1] * h, &mut meta.rhs_evals)?;
                let ks12 = [k1.clone(), k2];
                let y3 = axpyv(&y, h, &A3, &ks12);
                let k3 = eval_field(field, &y3, t + C[2] * h, &mut meta.rhs_evals)?;
                let ks123 = [ks12[0].clone(), ks12[1].clone(), k3];
                let y4 = axpyv(&y, h, &A4, &ks123);
                let k4 = eval_field(field, &y4, t + C[3] * h, &mut meta.rhs_evals)?;
                let ks1234 = [
                    ks123[0].clone(),
                    ks123[1].clone(),
                    ks123[2].clone(),
                    k4,
                ];
                let y5 = axpyv(&y, h, &A5, &ks1234);
                let k5 = eval_field(field, &y5, t + C[4] * h, &mut meta.rhs_evals)?;
                let ks = [
                    ks1234[0].clone(),
                    ks1234[1].clone(),
                    ks1234[2].clone(),
                    ks1234[3].clone(),
                    k5,
                ];
                let y6 = axpyv(&y, h, &A6, &ks);
                let k6 = eval_field(field, &y6, t + C[5] * h, &mut meta.rhs_evals)?;
                let ks6 = [
                    ks[0].clone(),
                    ks[1].clone(),
                    ks[2].clone(),
                    ks[3].clone(),
                    ks[4].clone(),
                    k6,
                ];
                let y_new = axpyv(&y, h, &A7, &ks6);
                if !y_new.iter().all(|v| v.is_finite()) {
                    if fixed_h.is_some() {
                        return Err(Error::Solve(format!(
                            "non-finite state at t = {:.6}",
                            t + h
                        )));
                    }
                    // Adaptive: treat as a failed step and retry smaller.
                    meta.steps_rejected += 1;
                    h *= 0.25;
                    continue;
                }
                let k7 = eval_field(field, &y_new, t + h, &mut meta.rhs_evals)?;

                // Scaled error norm over all seven stage slopes.
                let all_ks = [
                    &ks6[0], &ks6[1], &ks6[2], &ks6[3], &ks6[4], &ks6[5], &k7,
                ];
                let mut err = 0.0;
                for i in 0..n {
                    let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
                    let mut e = 0.0;
                    for (c, k) in E.iter().zip(all_ks.iter()) {
                        e += c * k[i];
                    }
                    err += (h * e / sc).powi(2);
                }
                let err = (err / n as f64).sqrt();

                let accept = fixed_h.is_some() || err <= 1.0;
                if accept {
                    // Dense output coefficients.
                    let mut cont = [
                        y.clone(),
                        vec![0.0; n],
                        vec![0.0; n],
                        vec![0.0; n],
                        vec![0.0; n],
                    ];
                    for i in 0..n {
                        let ydiff = y_new[i] - y[i];
                        let bspl = h * ks6[0][i] - ydiff;
                        cont[1][i] = ydiff;
                        cont[2][i] = bspl;
                        cont[3][i] = ydiff - h * k7[i] - bspl;
                        let mut d = 0.0;
                        for (dc, k) in D.iter().zip(all_ks.iter()) {
                            d += dc * k[i];
                        }
                        cont[4][i] = h * d;
                    }
                    let seg = DenseSeg { t, h, cont };
                    let t_new = t + h;
                    emit(&seg, t_new, &y_new, &mut times, &mut states);
                    meta.steps_accepted += 1;
                    t = t_new;
                    y = y_new;
                    k1 = k7;
                    if fixed_h.is_none() {
                        let fac11 = err.max(1e-30).powf(EXPO1);
                        let fac = (fac11 / facold.powf(BETA) / SAFE)
                            .clamp(1.0 / FAC2, 1.0 / FAC1);
                        h /= fac;
                        facold = err.max(1e-4);
                    }
                } else {
                    meta.steps_rejected += 1;
                    let fac11 = err.max(1e-30).powf(EXPO1);
                    h /= (fac11 / SAFE).min(1.0 / FAC1);
                }
            }
        }
    }

    Ok(Trajectory { times, states, meta })
}

// ---------------------------------------------------------------------------
// Canard metrics
// ---------------------------------------------------------------------------

/// Trapezoidal branch-dwell metrics along a trajectory of `system`'s full
/// field: time with |g| < η on the attracting (∂g/∂y₁ < 0) and repelling
/// (∂g/∂y₁ > 0) sheets, plus the closest sample distance to `m_point`.
pub fn canard_metrics(
    trajectory: &Trajectory,
    system: &SlowFastSystem,
    m_point: &[f64],
    eta: f64,
) -> Result<CanardMetrics> {
    if m_point.len() != system.dim() {
        return Err(Error::Precondition(format!(
            "reference point has {} coordinates, system has {}",
            m_point.len(),
            system.dim()
        )));
    }
    if !(eta > 0.0) {
        return Err(Error::Precondition("eta must be positive".into()));
    }
    let mut closest = f64::INFINITY;
    let mut att = 0.0;
    let mut rep = 0.0;
    let mut prev: Option<(f64, f64, f64)> = None; // (t, att indicator, rep indicator)
    for (t, x) in trajectory.times.iter().zip(&trajectory.states) {
        let (g, gy) = system.fold_residuals(x)?;
        let d = x
            .iter()
            .zip(m_point)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        closest = closest.min(d);
        let near = g.abs() < eta;
        let ia = if near && gy < 0.0 { 1.0 } else { 0.0 };
        let ir = if near && gy > 0.0 { 1.0 } else { 0.0 };
        if let Some((tp, ap, rp)) = prev {
            let dt = t - tp;
            att += 0.5 * dt * (ap + ia);
            rep += 0.5 * dt * (rp + ir);
        }
        prev = Some((*t, ia, ir));
    }
    Ok(CanardMetrics {
        closest_approach_to_m: closest,
        attracting_dwell: att,
        repelling_dwell: rep,
        eta,
    })
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

/// Write a trajectory as CSV: header `t,<vars...>`, full double precision,
/// LF line endings.
pub fn write_csv<W: Write>(
    trajectory: &Trajectory,
    var_names: &[String],
    out: &mut W,
) -> Result<()> {
    write!(out, "t")?;
    for v in var_names {
        write!(out, ",{v}")?;
    }
    out.write_all(b"\n")?;
    for (t, x) in trajectory.times.iter().zip(&trajectory.states) {
        write!(out, "{t:.16e}")?;
        for c in x {
            write!(out, ",{c:.16e}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}
