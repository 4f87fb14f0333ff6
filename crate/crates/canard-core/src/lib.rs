//! # canard-core
//!
//! Detection and characterization of canard solutions in singularly
//! perturbed (slow-fast) dynamical systems with one fast variable.
//!
//! The crate provides two independent canard criteria, validated against
//! each other:
//!
//! * the **Jacobian criterion**: locate pseudo-singular points of the
//!   reduced normalized vector field and classify them through the
//!   eigenvalues of the reduced Jacobian ([`pseudosing`]);
//! * the **flow-curvature criterion**: evaluate the flow curvature manifold
//!   `φ = det(Ẋ, Ẍ, …, X⁽ⁿ⁾)` of the reduced field and run the Second
//!   Derivative Test on its Hessian at the same points ([`curvature`]).
//!
//! Supporting machinery: an expression language for vector-field components
//! ([`expr`]), exact Taylor-jet differentiation ([`jet`], [`diffgeo`]),
//! slow-fast system modeling with the built-in 3D/4D Chua circuit models
//! ([`slowfast`]), a stiff-friendly explicit integrator with canard metrics
//! ([`odeint`]), and a deterministic analysis report ([`report`]).

pub mod curvature;
pub mod diffgeo;
pub mod error;
pub mod expr;
pub mod jet;
pub mod odeint;
pub mod pseudosing;
pub mod report;
pub mod slowfast;



pub use curvature::{
    canard_verdict_curvature, curvature_hessian_test, flow_curvature, hessian_test_scalar,
    linear_identity_phi, verdicts_conflict, AgreementSummary, CurvatureAnalysis, CurvatureReport,
    CurvatureVerdict, FlowCurvatureField, HessianClass, PointCurvature,
};
pub use diffgeo::{
    Classification, DiagonalField, LinearField, ScalarField, SpectrumReport, VectorField,
};
pub use error::{Error, NumError, Result};
pub use expr::{CompiledExpr, Expr, MathFn};
pub use jet::{Jet2, JetScalar, TimeJet};
pub use odeint::{
    canard_metrics, integrate, write_csv, CanardMetrics, Samples, SolverOpts, StepMode,
    Trajectory, TrajectoryMeta,
};
pub use pseudosing::{
    canard_verdict_jacobian, classify_reduced, find_pseudo_singular,
    find_pseudo_singular_with_diag, pseudo_singular_residual, CanardVerdict, JacobianAnalysis,
    PseudoSingularPoint, SearchDiagnostics, ThresholdCheck,
};
pub use report::{
    run_analysis, to_json_string, AnalysisReport, ModelIdentity, OverallAgreement, SearchSettings,
};
pub use slowfast::{
    chua3, chua4, ChuaParams3, ChuaParams4, EliminationRule, FullField, ModelKind,
    NormalizedSlowField, ReducedField, SlowFastSystem,
};
