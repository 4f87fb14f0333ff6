//! The `sweep` subcommand: run `analyze` or `simulate` across a parameter
//! value list, in parallel, merging results deterministically by value order.

use crate::model::{load_system, parse_boxes};
use crate::simulate::{outcome_json, simulate_system, write_outputs};
use crate::{SweepArgs, SweepMode};
use canard_core::report::to_json_string;
use canard_core::{Error, Result, SlowFastSystem};
use serde_json::json;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Parallelism cap: `CANARD_LAB_THREADS` if set (>= 1), else the number of
/// available cores.
fn thread_cap() -> usize {
    std::env::var("CANARD_LAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn run_one(
    base: &SlowFastSystem,
    args: &SweepArgs,
    search_box: &[(f64, f64)],
    token: &str,
    value: f64,
) -> Result<serde_json::Value> {
    let system = base.with_param(&args.sweep, value)?;
    let dir = args.out_dir.join(token);
    std::fs::create_dir_all(&dir)?;
    match args.mode {
        SweepMode::Analyze => {
            let report = canard_core::report::run_analysis(&system, search_box, args.search.grid);
            std::fs::write(dir.join("report.json"), to_json_string(&report)? + "\n")?;
            Ok(json!({
                "value": token,
                "ok": report.failures.is_empty(),
                "verdict_jacobian":
                    report.jacobian_analysis.as_ref().map(|j| j.verdict.to_string()),
                "verdict_curvature":
                    report.curvature_analysis.as_ref().map(|c| c.verdict.to_string()),
                "verdict_conflict": report.agreement.as_ref().map(|a| a.verdict_conflict),
                "points_found":
                    report.jacobian_analysis.as_ref().map(|j| j.points.len()),
                "failures": report.failures,
            }))
        }
        SweepMode::Simulate => {
            let outcome = simulate_system(&system, &args.solver)?;
            let stem = dir.join("trajectory");
            let (csv_path, plot_path) = write_outputs(&system, &outcome, &stem)?;
            let summary = outcome_json(&system, &outcome, args.solver.eta, &csv_path, &plot_path);
            std::fs::write(
                dir.join("metrics.json"),
                serde_json::to_string_pretty(&summary)
                    .map_err(|e| Error::Model(format!("summary serialization failed: {e}")))?
                    + "\n",
            )?;
            Ok(json!({
                "value": token,
                "ok": true,
                "metrics": outcome.metrics,
                "files": {
                    "csv": csv_path.display().to_string(),
                    "plot": plot_path.display().to_string(),
                },
            }))
        }
    }
}

pub fn run(args: &SweepArgs) -> Result<i32> {
    let base = load_system(&args.model)?;
    if !base.params().contains_key(&args.sweep) {
        return Err(Error::Model(format!(
            "--sweep: unknown parameter `{}` (declared: {})",
            args.sweep,
            base.params()
                .keys()
                .cloned()
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    if args.search.grid < 2 {
        return Err(Error::Model(format!(
            "--grid must be at least 2, got {}",
            args.search.grid
        )));
    }
    let search_box = parse_boxes(&base, &args.search.boxes)?;
    let values: Vec<(String, f64)> = args
        .values
        .iter()
        .filter(|tok| !tok.trim().is_empty())
        .map(|tok| {
            let v: f64 = tok.trim().parse().map_err(|_| {
                Error::Model(format!("--values: `{tok}` is not a number"))
            })?;
            Ok((tok.trim().to_string(), v))
        })
        .collect::<Result<_>>()?;
    std::fs::create_dir_all(&args.out_dir)?;

    // One result slot per value; workers claim indices from a shared
    // counter, so merge order is the value order regardless of scheduling.
    let n = values.len();
    let results: Mutex<Vec<Option<serde_json::Value>>> = Mutex::new(vec![None; n]);
    let next = AtomicUsize::new(0);
    let workers = thread_cap().min(n.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let (token, value) = &values[i];
                let row = match run_one(&base, args, &search_box, token, *value) {
                    Ok(row) => row,
                    Err(e) => json!({
                        "value": token,
                        "ok": false,
                        "error": e.to_string(),
                    }),
                };
                results.lock().expect("no poisoned lock").as_mut_slice()[i] = Some(row);
            });
        }
    });
    let rows: Vec<serde_json::Value> = results
        .into_inner()
        .expect("no poisoned lock")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect();

    let all_ok = rows
        .iter()
        .all(|r| r.get("ok").and_then(|v| v.as_bool()).unwrap_or(false));
    let summary = json!({
        "parameter": args.sweep,
        "mode": match args.mode {
            SweepMode::Analyze => "analyze",
            SweepMode::Simulate => "simulate",
        },
        "model": base.name(),
        "results": rows,
    });
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Model(format!("summary serialization failed: {e}")))?;
    std::fs::write(args.out_dir.join("summary.json"), text.clone() + "\n")?;
    crate::emit_stdout(&text)?;
    Ok(if all_ok { 0 } else { 1 })
}
