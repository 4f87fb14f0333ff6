//! The `analyze` subcommand: run both canard criteria, emit the JSON report.

use crate::model::{load_system, parse_boxes};
use crate::{ModelArgs, SearchArgs};
use canard_core::report::{run_analysis, to_json_string, AnalysisReport};
use canard_core::{Error, Result, SlowFastSystem};
use std::path::Path;

/// Run the analysis pipeline for already-loaded inputs. Shared with `sweep`.
pub fn analyze_system(
    system: &SlowFastSystem,
    search_box: &[(f64, f64)],
    grid: usize,
) -> AnalysisReport {
    run_analysis(system, search_box, grid)
}

pub fn run(model: &ModelArgs, search: &SearchArgs, out: Option<&Path>) -> Result<i32> {
    let system = load_system(model)?;
    let search_box = parse_boxes(&system, &search.boxes)?;
    if search.grid < 2 {
        return Err(Error::Model(format!(
            "--grid must be at least 2, got {}",
            search.grid
        )));
    }
    let report = analyze_system(&system, &search_box, search.grid);
    let json = to_json_string(&report)?;
    match out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => crate::emit_stdout(&json)?,
    }
    // Partial results were emitted; signal numerical trouble via the exit
    // code per the 0/1/2 contract.
    Ok(if report.failures.is_empty() { 0 } else { 1 })
}
