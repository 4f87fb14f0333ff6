//! The `simulate` subcommand: integrate the full system, write `<out>.csv`
//! and `<out>.plot`, print canard metrics as JSON.

use crate::model::{load_system, parse_point, parse_t_span};
use crate::{ModelArgs, SolverArgs};
use canard_core::odeint::{canard_metrics, integrate, write_csv, Samples, SolverOpts, StepMode};
use canard_core::pseudosing::find_pseudo_singular;
use canard_core::slowfast::ModelKind;
use canard_core::{CanardMetrics, Error, Result, SlowFastSystem, Trajectory};
use serde_json::json;
use std::path::{Path, PathBuf};

/// Everything one simulation produced; `sweep` consumes this too.
pub struct SimOutcome {
    pub trajectory: Trajectory,
    pub metrics: Option<CanardMetrics>,
    pub m_point: Option<Vec<f64>>,
    pub x0: Vec<f64>,
    pub recorded_start: Vec<f64>,
    pub t_span: (f64, f64),
    pub transient: f64,
}

/// Attracting-branch start for the built-ins: fast coordinate on the outer
/// branch (z = 2 / u = 1.5), remaining slow coordinates zero, x₁ from the
/// elimination rule.
fn auto_x0(system: &SlowFastSystem) -> Result<Vec<f64>> {
    let fast_value = match system.kind() {
        ModelKind::Chua3 => 2.0,
        ModelKind::Chua4 => 1.5,
        ModelKind::Custom => {
            return Err(Error::Model(
                "--x0 auto is only defined for built-in models; pass explicit coordinates"
                    .to_string(),
            ))
        }
    };
    let mut chart = vec![0.0; system.dim() - 1];
    *chart.last_mut().expect("nonempty chart") = fast_value;
    let x1 = system
        .reduce()
        .eliminate_x1(&chart)
        .map_err(canard_core::Error::Num)?;
    let mut x0 = vec![x1];
    x0.extend_from_slice(&chart);
    Ok(x0)
}

/// Reference fold point for the closest-approach metric: the located
/// pseudo-singular point with the largest fast coordinate (deterministic
/// tie-break: first in sorted order).
fn auto_m_point(system: &SlowFastSystem) -> Option<Vec<f64>> {
    let search_box = vec![(-2.0, 2.0); system.dim()];
    let points = find_pseudo_singular(system, &search_box, 8).ok()?;
    points
        .into_iter()
        .map(|p| p.full_coords)
        .max_by(|a, b| {
            let fa = a.last().copied().unwrap_or(f64::NEG_INFINITY);
            let fb = b.last().copied().unwrap_or(f64::NEG_INFINITY);
            fa.partial_cmp(&fb).unwrap_or(std::cmp::Ordering::Equal)
        })
}

fn solver_opts(args: &SolverArgs, samples: Samples) -> SolverOpts {
    SolverOpts {
        rel_tol: args.rel_tol,
        abs_tol: args.abs_tol,
        max_step: args.max_step,
        mode: match args.fixed_step {
            Some(h) => StepMode::FixedRk4(h),
            None => StepMode::Adaptive,
        },
        samples,
        ..SolverOpts::default()
    }
}

/// Run the integration pipeline for an already-loaded system.
pub fn simulate_system(system: &SlowFastSystem, args: &SolverArgs) -> Result<SimOutcome> {
    let auto = args.x0.trim() == "auto";
    let x0 = if auto {
        auto_x0(system)?
    } else {
        parse_point(&args.x0, system.dim(), "--x0")?
    };
    let t_span = parse_t_span(&args.t_span)?;
    let transient = args.transient.unwrap_or(if auto { 20.0 } else { 0.0 });
    if !(transient >= 0.0 && transient.is_finite()) {
        return Err(Error::Model(format!(
            "--transient must be a nonnegative real, got {transient}"
        )));
    }
    let field = system.full_vector_field()?;

    let recorded_start = if transient > 0.0 {
        let warmup = integrate(
            &field,
            &x0,
            (t_span.0 - transient, t_span.0),
            &solver_opts(args, Samples::At(vec![t_span.0])),
        )?;
        warmup.states.last().expect("trajectory is nonempty").clone()
    } else {
        x0.clone()
    };

    let samples = match args.samples {
        Some(n) => Samples::Uniform(n.max(1)),
        None => Samples::AcceptedSteps,
    };
    let trajectory = integrate(&field, &recorded_start, t_span, &solver_opts(args, samples))?;

    let m_point = match &args.m_point {
        Some(spec) => Some(parse_point(spec, system.dim(), "--m-point")?),
        None => auto_m_point(system),
    };
    let metrics = match &m_point {
        Some(m) => Some(canard_metrics(&trajectory, system, m, args.eta)?),
        None => None,
    };
    Ok(SimOutcome {
        trajectory,
        metrics,
        m_point,
        x0,
        recorded_start,
        t_span,
        transient,
    })
}

/// Column index (1-based, gnuplot convention; column 1 is time) of a named
/// variable in the CSV.
fn col(names: &[String], var: &str) -> usize {
    2 + names.iter().position(|n| n == var).expect("known variable")
}

/// Self-contained gnuplot script showing the projections that make the
/// canard loop visible: the (fast, x₁) plane with the fold lines, and a
/// model-appropriate 3-D phase portrait.
fn plot_script(system: &SlowFastSystem, csv_name: &str, plot_name: &str) -> String {
    let names = system.full_var_names();
    let fast = system.fast_var().to_string();
    let x1 = names[0].clone();
    let (c_fast, c_x1) = (col(&names, &fast), col(&names, &x1));
    let (splot_cols, splot_labels) = match system.kind() {
        // (x, y, z): the full slow-slow-fast portrait.
        ModelKind::Chua3 => ("2:3:4".to_string(), (names[0].clone(), names[1].clone(), names[2].clone())),
        // (u, z, x): fast variable against the two slow ones that close the loop.
        ModelKind::Chua4 => (
            format!("{}:{}:{}", col(&names, "u"), col(&names, "z"), col(&names, "x")),
            ("u".to_string(), "z".to_string(), "x".to_string()),
        ),
        ModelKind::Custom => (
            format!("{}:{}:{}", c_fast, names.len(), c_x1),
            (fast.clone(), names[names.len() - 2].clone(), x1.clone()),
        ),
    };
    format!(
        "# gnuplot script; run from this directory: gnuplot {plot}\n\
         set datafile separator ','\n\
         set key off\n\
         set xlabel '{fast}'\n\
         set ylabel '{x1}'\n\
         # fold lines of the cubic fast nullcline\n\
         set arrow 1 from  1, graph 0 to  1, graph 1 nohead dashtype 2\n\
         set arrow 2 from -1, graph 0 to -1, graph 1 nohead dashtype 2\n\
         plot '{csv}' skip 1 using {c_fast}:{c_x1} with lines lw 1\n\
         pause -1 '({fast}, {x1}) plane; press enter for the 3-D portrait'\n\
         unset arrow 1\n\
         unset arrow 2\n\
         set xlabel '{sx}'\n\
         set ylabel '{sy}'\n\
         set zlabel '{sz}'\n\
         splot '{csv}' skip 1 using {splot_cols} with lines lw 1\n\
         pause -1 'phase portrait; press enter to finish'\n",
        csv = csv_name,
        plot = plot_name,
        fast = fast,
        x1 = x1,
        c_fast = c_fast,
        c_x1 = c_x1,
        splot_cols = splot_cols,
        sx = splot_labels.0,
        sy = splot_labels.1,
        sz = splot_labels.2,
    )
}

/// Write `<stem>.csv` and `<stem>.plot`; returns both paths.
pub fn write_outputs(
    system: &SlowFastSystem,
    outcome: &SimOutcome,
    stem: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let csv_path = PathBuf::from(format!("{}.csv", stem.display()));
    let plot_path = PathBuf::from(format!("{}.plot", stem.display()));
    if let Some(dir) = csv_path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut csv = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
    write_csv(&outcome.trajectory, &system.full_var_names(), &mut csv)?;
    // The script references the CSV by file name so it runs from its own dir.
    let csv_name = csv_path
        .file_name()
        .expect("csv path has a file name")
        .to_string_lossy()
        .to_string();
    let plot_name = plot_path
        .file_name()
        .expect("plot path has a file name")
        .to_string_lossy()
        .to_string();
    std::fs::write(&plot_path, plot_script(system, &csv_name, &plot_name))?;
    Ok((csv_path, plot_path))
}

/// JSON summary printed to stdout (and stored by `sweep`).
pub fn outcome_json(
    system: &SlowFastSystem,
    outcome: &SimOutcome,
    eta: f64,
    csv_path: &Path,
    plot_path: &Path,
) -> serde_json::Value {
    json!({
        "model": {
            "name": system.name(),
            "epsilon": system.epsilon(),
            "params": system.params(),
        },
        "x0": outcome.x0,
        "recorded_start": outcome.recorded_start,
        "t_span": [outcome.t_span.0, outcome.t_span.1],
        "transient": outcome.transient,
        "eta": eta,
        "m_point": outcome.m_point,
        "metrics": outcome.metrics,
        "solver": outcome.trajectory.meta,
        "samples": outcome.trajectory.times.len(),
        "files": {
            "csv": csv_path.display().to_string(),
            "plot": plot_path.display().to_string(),
        },
    })
}

pub fn run(model: &ModelArgs, solver: &SolverArgs, out: &Path) -> Result<i32> {
    let system = load_system(model)?;
    let outcome = simulate_system(&system, solver)?;
    let (csv_path, plot_path) = write_outputs(&system, &outcome, out)?;
    let summary = outcome_json(&system, &outcome, solver.eta, &csv_path, &plot_path);
    crate::emit_stdout(
        &serde_json::to_string_pretty(&summary)
            .map_err(|e| Error::Model(format!("summary serialization failed: {e}")))?,
    )?;
    Ok(0)
}
