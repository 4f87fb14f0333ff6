//! Aggregation of both canard criteria into one deterministic, diffable
//! analysis report.

use crate::curvature::{canard_verdict_curvature, verdicts_conflict, CurvatureAnalysis};
use crate::pseudosing::{canard_verdict_jacobian, JacobianAnalysis};
use crate::slowfast::{ModelKind, SlowFastSystem};
use serde::Serialize;
use std::collections::BTreeMap;

/// Identification of the analyzed model.
#[derive(Debug, Clone, Serialize)]
pub struct ModelIdentity {
    pub name: String,
    pub kind: String,
    pub slow_vars: Vec<String>,
    pub fast_var: String,
    pub epsilon: f64,
    pub params: BTreeMap<String, f64>,
}

/// Search-space settings echoed into the report.
#[derive(Debug, Clone, Serialize)]
pub struct SearchSettings {
    /// One (lo, hi) interval per full-space variable.
    pub search_box: Vec<(f64, f64)>,
    pub grid_per_axis: usize,
}

/// Cross-method agreement at the whole-analysis level.
#[derive(Debug, Clone, Serialize)]
pub struct OverallAgreement {
    /// Every analyzed point is free of a definitive conflict.
    pub per_point_agree: bool,
    /// The two overall verdicts are in definitive conflict.
    pub verdict_conflict: bool,
    pub conflicts: Vec<String>,
}

/// The complete analysis of one model: both criteria plus agreement.
///
/// Serialization is deterministic: all maps are ordered, floats print via
/// the shortest-round-trip form, and no timestamps or machine identifiers
/// appear anywhere, so reports from identical runs are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: String,
    pub tool_version: String,
    pub model: ModelIdentity,
    pub search: SearchSettings,
    /// Every numeric tolerance in effect for this run.
    pub tolerances: BTreeMap<String, f64>,
    pub jacobian_analysis: Option<JacobianAnalysis>,
    pub curvature_analysis: Option<CurvatureAnalysis>,
    pub agreement: Option<OverallAgreement>,
    /// Numerical failures encountered; partial results above remain valid.
    pub failures: Vec<String>,
}

/// The fixed tolerance table used by the analysis pipeline. Formula-scaled
/// dead zones record their coefficient.
pub fn tolerance_table() -> BTreeMap<String, f64> {
    [
        ("newton_accept_residual", 1e-9),
        ("dedup_chart_metric", 1e-6),
        ("equilibrium_precondition", 1e-6),
        ("eigenvalue_dead_zone_coeff", 1e-9),
        ("inequality_dead_zone_coeff", 1e-9),
        ("hessian_degeneracy_coeff", 1e-9),
        ("extremum_tolerance_coeff", 1e-6),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn kind_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Chua3 => "chua3",
        ModelKind::Chua4 => "chua4",
        ModelKind::Custom => "custom",
    }
}

/// Run both canard criteria over the search box and assemble the report.
///
/// Never fails outright: numerical failures are recorded in `failures`
/// with whatever partial results were obtained.
pub fn run_analysis(
    system: &SlowFastSystem,
    search_box: &[(f64, f64)],
    grid: usize,
) -> AnalysisReport {
    let mut failures = Vec::new();
    let jacobian_analysis: Option<JacobianAnalysis> =
        match canard_verdict_jacobian(system, search_box, grid) {
            Ok(a) => Some(a),
            Err(e) => {
                failures.push(format!("Jacobian criterion failed: {e}"));
                None
            }
        };
    let curvature_analysis: Option<CurvatureAnalysis> = match &jacobian_analysis {
        Some(jac) => match canard_verdict_curvature(system, &jac.points) {
            Ok(c) => Some(c),
            Err(e) => {
                failures.push(format!("curvature criterion failed: {e}"));
                None
            }
        },
        None => None,
    };
    let agreement = match (&jacobian_analysis, &curvature_analysis) {
        (Some(j), Some(c)) => Some(OverallAgreement {
            per_point_agree: c.agreement.agree,
            verdict_conflict: verdicts_conflict(j.verdict, c.verdict),
            conflicts: c.agreement.conflicts.clone(),
        }),
        _ => None,
    };
    AnalysisReport {
        schema_version: "1".to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        model: ModelIdentity {
            name: system.name().to_string(),
            kind: kind_name(system.kind()).to_string(),
            slow_vars: system.slow_vars().to_vec(),
            fast_var: system.fast_var().to_string(),
            epsilon: system.epsilon(),
            params: system.params().clone(),
        },
        search: SearchSettings {
            search_box: search_box.to_vec(),
            grid_per_axis: grid,
        },
        tolerances: tolerance_table(),
        jacobian_analysis,
        curvature_analysis,
        agreement,
        failures,
    }
}

/// Deterministic pretty JSON: route through `serde_json::Value` so object
/// keys come out sorted at every level.
pub fn to_json_string(report: &AnalysisReport) -> crate::error::Result<String> {
    let value = serde_json::to_value(report)
        .map_err(|e| crate::error::Error::Model(format!("report serialization failed: {e}")))?;
    serde_json::to_string_pretty(&value)
        .map_err(|e| crate::error::Error::Model(format!("report serialization failed: {e}")))
}
