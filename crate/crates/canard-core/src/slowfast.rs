//! Singularly perturbed systems with one fast variable:
//!
//! ```text
//!   ẋᵢ = fᵢ(x, y₁)        i = 1..p   (slow)
//!   ε ẏ₁ = g(x, y₁)                  (fast)
//! ```
//!
//! with p ∈ {2, 3}. The module provides model construction and validation,
//! the built-in Chua 3D/4D circuit models, critical-manifold and fold
//! residuals, the reduced normalized vector field on the chart
//! (x₂, …, x_p, y₁) with x₁ eliminated, the full-space field for
//! integration, and the full-space normalized slow field.
//!
//! A [`SlowFastSystem`] is immutable after construction and safe to share
//! across threads. [`ReducedField`] evaluators with implicit elimination
//! keep a warm-start cache, so one evaluator instance must not be shared
//! across threads — cloning evaluators is cheap and is the prescribed
//! pattern for parallel sweeps.

use crate::diffgeo::VectorField;
use crate::error::{Error, NumError, Result};
use crate::expr::{CompiledExpr, Expr};
use crate::jet::{Jet2, JetScalar};
use std::cell::Cell;
use std::collections::BTreeMap;

/// How x₁ is recovered from the remaining variables on the critical
/// manifold {g = 0}.
#[derive(Debug, Clone)]
pub enum EliminationRule {
    /// x₁ given in closed form as an expression in (x₂, …, x_p, y₁).
    Explicit(Expr),
    /// x₁ found by 1D Newton on x₁ ↦ g(x₁, x₂, …, y₁).
    Implicit { seed: f64, tol: f64 },
}

/// Parameters of the built-in Chua 3D model (cubic nonlinearity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChuaParams3 {
    pub alpha: f64,
}

impl Default for ChuaParams3 {
    /// The canard-exhibiting parameter value of the reference trajectory.
    fn default() -> Self {
        ChuaParams3 {
            alpha: 0.257_138_963_6,
        }
    }
}

/// Parameters of the built-in Chua 4D model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChuaParams4 {
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for ChuaParams4 {
    fn default() -> Self {
        ChuaParams4 {
            alpha2: 0.9,
            beta1: 0.121,
            beta2: 0.0047,
            c1: 0.393_781,
            c2: -0.723_57,
        }
    }
}

/// Which built-in model (if any) a system was constructed from; used to
/// attach model-specific symbolic threshold checks to analysis reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Chua3,
    Chua4,
    Custom,
}

/// A validated slow-fast system. See the module docs for the shape.
#[derive(Debug, Clone)]
pub struct SlowFastSystem {
    name: String,
    kind: ModelKind,
    slow_vars: Vec<String>,
    fast_var: String,
    f_src: Vec<Expr>,
    g_src: Expr,
    epsilon: f64,
    elimination: EliminationRule,
    params: BTreeMap<String, f64>,
    // Compiled over the full variable list (x₁, …, x_p, y₁).
    f_c: Vec<CompiledExpr>,
    g_c: CompiledExpr,
    // Explicit elimination compiled over the chart list (x₂, …, x_p, y₁).
    elim_c: Option<CompiledExpr>,
}

impl SlowFastSystem {
    /// Construct and validate a system.
    ///
    /// Validation: p ∈ {2,3}; variable names distinct; every expression
    /// references only declared variables and parameters; ε > 0; an
    /// explicit elimination rule must parametrize the critical manifold
    /// (|g| < 1e−8 with x₁ substituted, sampled over the chart cube
    /// [−1,1]^p).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        slow_vars: Vec<String>,
        fast_var: String,
        f: Vec<Expr>,
        g: Expr,
        epsilon: f64,
        elimination: EliminationRule,
        params: BTreeMap<String, f64>,
    ) -> Result<SlowFastSystem> {
        let p = slow_vars.len();
        if !(p == 2 || p == 3) {
            return Err(Error::Model(format!(
                "this toolkit handles systems with 2 or 3 slow variables and \
                 one fast variable; got {p} slow variables"
            )));
        }
        if f.len() != p {
            return Err(Error::Model(format!(
                "{p} slow variables declared but {} slow equations given",
                f.len()
            )));
        }
        let mut all_names: Vec<&String> = slow_vars.iter().collect();
        all_names.push(&fast_var);
        for (i, a) in all_names.iter().enumerate() {
            for b in &all_names[i + 1..] {
                if a == b {
                    return Err(Error::Model(format!("duplicate variable name `{a}`")));
                }
            }
        }
        for v in &all_names {
            if params.contains_key(*v) {
                return Err(Error::Model(format!(
                    "`{v}` is declared both as a variable and as a parameter"
                )));
            }
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Model(format!(
                "epsilon must be a positive real, got {epsilon}"
            )));
        }
        let full_vars: Vec<String> = slow_vars
            .iter()
            .cloned()
            .chain(std::iter::once(fast_var.clone()))
            .collect();
        let f_c = f
            .iter()
            .map(|e| CompiledExpr::compile(e, &full_vars, &params))
            .collect::<Result<Vec<_>>>()?;
        let g_c = CompiledExpr::compile(&g, &full_vars, &params)?;
        let chart_vars: Vec<String> = full_vars[1..].to_vec();
        let elim_c = match &elimination {
            EliminationRule::Explicit(e) => {
                Some(CompiledExpr::compile(e, &chart_vars, &params)?)
            }
            EliminationRule::Implicit { tol, .. } => {
                if !(*tol > 0.0) {
                    return Err(Error::Model(
                        "implicit elimination tolerance must be positive".into(),
                    ));
                }
                None
            }
        };
        let sys = SlowFastSystem {
            name: name.into(),
            kind: ModelKind::Custom,
            slow_vars,
            fast_var,
            f_src: f,
            g_src: g,
            epsilon,
            elimination,
            params,
            f_c,
            g_c,
            elim_c,
        };
        if let Some(elim) = &sys.elim_c {
            // Sample the chart cube [−1,1]^p and verify the parametrization.
            let p = sys.p();
            let steps = [-1.0, 0.0, 1.0];
            let mut idx = vec![0usize; p];
            loop {
                let chart: Vec<f64> = idx.iter().map(|&i| steps[i]).collect();
                let x1 = elim.eval(&chart)?;
                let mut full = Vec::with_capacity(p + 1);
                full.push(x1);
                full.extend_from_slice(&chart);
                let gv = sys.g_c.eval(&full)?;
                if gv.abs() > 1e-8 {
                    return Err(Error::Model(format!(
                        "explicit elimination rule does not parametrize the \
                         critical manifold: |g| = {:.3e} at chart point {:?}",
                        gv.abs(),
                        chart
                    )));
                }
                let mut k = p;
                loop {
                    if k == 0 {
                        return Ok(sys);
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < steps.len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        }
        Ok(sys)
    }

    // -- accessors ---------------------------------------------------------

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Number of slow variables (2 or 3).
    pub fn p(&self) -> usize {
        self.slow_vars.len()
    }

    /// Full-space dimension p + 1.
    pub fn dim(&self) -> usize {
        self.slow_vars.len() + 1
    }

    pub fn slow_vars(&self) -> &[String] {
        &self.slow_vars
    }

    pub fn fast_var(&self) -> &str {
        &self.fast_var
    }

    /// Variable names in full-space order (x₁, …, x_p, y₁).
    pub fn full_var_names(&self) -> Vec<String> {
        self.slow_vars
            .iter()
            .cloned()
            .chain(std::iter::once(self.fast_var.clone()))
            .collect()
    }

    /// Chart variable names (x₂, …, x_p, y₁).
    pub fn chart_var_names(&self) -> Vec<String> {
        self.full_var_names()[1..].to_vec()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn elimination(&self) -> &EliminationRule {
        &self.elimination
    }

    /// Slow equations compiled over the full variable list.
    pub fn f_compiled(&self) -> &[CompiledExpr] {
        &self.f_c
    }

    /// Fast equation compiled over the full variable list.
    pub fn g_compiled(&self) -> &CompiledExpr {
        &self.g_c
    }

    pub fn f_exprs(&self) -> &[Expr] {
        &self.f_src
    }

    pub fn g_expr(&self) -> &Expr {
        &self.g_src
    }

    // -- rebuilds ----------------------------------------------------------

    /// Same system with one parameter changed (recompiles everything).
    pub fn with_param(&self, name: &str, value: f64) -> Result<SlowFastSystem> {
        if !self.params.contains_key(name) {
            return Err(Error::Model(format!(
                "unknown parameter `{name}` (declared: {})",
                self.params
                    .keys()
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        if !value.is_finite() {
            return Err(Error::Model(format!(
                "parameter `{name}` must be finite, got {value}"
            )));
        }
        let mut params = self.params.clone();
        params.insert(name.to_string(), value);
        let mut sys = SlowFastSystem::new(
            self.name.clone(),
            self.slow_vars.clone(),
            self.fast_var.clone(),
            self.f_src.clone(),
            self.g_src.clone(),
            self.epsilon,
            self.elimination.clone(),
            params,
        )?;
        sys.kind = self.kind;
        Ok(sys)
    }

    /// Same system with a different ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<SlowFastSystem> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Model(format!(
                "epsilon must be a positive real, got {epsilon}"
            )));
        }
        let mut sys = self.clone();
        sys.epsilon = epsilon;
        Ok(sys)
    }

    // -- residuals ---------------------------------------------------------

    /// g at a full-space point; zero iff the point lies on the critical
    /// manifold.
    pub fn critical_manifold_residual(&self, point: &[f64]) -> Result<f64> {
        self.check_full_point(point)?;
        Ok(self.g_c.eval(point)?)
    }

    /// (g, ∂g/∂y₁) at a full-space point; the fold is the joint zero set.
    pub fn fold_residuals(&self, point: &[f64]) -> Result<(f64, f64)> {
        self.check_full_point(point)?;
        let n = self.dim();
        let seeds: Vec<Jet2<f64>> = (0..n)
            .map(|i| Jet2::variable(n, i, point[i]))
            .collect();
        let gj = self.g_c.eval(&seeds)?;
        let g = *gj.val();
        let gy = if gj.dim() == n { *gj.grad(n - 1) } else { 0.0 };
        Ok((g, gy))
    }

    fn check_full_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::Precondition(format!(
                "expected a full-space point with {} coordinates, got {}",
                self.dim(),
                point.len()
            )));
        }
        Ok(())
    }

    // -- derived fields ----------------------------------------------------

    /// The reduced normalized vector field on the chart (x₂, …, x_p, y₁):
    /// first p−1 components −fᵢ·∂g/∂y₁ (i = 2..p), last component
    /// Σᵢ ∂g/∂xᵢ·fᵢ, with x₁ substituted via the elimination rule.
    pub fn reduce(&self) -> ReducedField {
        ReducedField {
            chart_vars: self.chart_var_names(),
            p: self.p(),
            f_c: self.f_c.clone(),
            g_c: self.g_c.clone(),
            elim: match (&self.elimination, &self.elim_c) {
                (EliminationRule::Explicit(_), Some(c)) => ElimEval::Explicit(c.clone()),
                (EliminationRule::Implicit { seed, tol }, _) => ElimEval::Implicit {
                    seed: *seed,
                    tol: *tol,
                    warm: Cell::new(*seed),
                },
                _ => unreachable!("explicit rule always compiled at construction"),
            },
        }
    }

    /// The full-space field (f₁, …, f_p, g/ε) for integration.
    pub fn full_vector_field(&self) -> Result<FullField> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Model(format!(
                "full vector field requires epsilon > 0, got {}",
                self.epsilon
            )));
        }
        Ok(FullField {
            f_c: self.f_c.clone(),
            g_c: self.g_c.clone(),
            inv_eps: 1.0 / self.epsilon,
        })
    }

    /// The full-space normalized slow field
    /// (−∂g/∂y₁·f₁, …, −∂g/∂y₁·f_p, Σᵢ ∂g/∂xᵢ·fᵢ): the desingularized
    /// slow dynamics whose Jacobian enters the 3-slow-variable analysis.
    pub fn normalized_slow_field(&self) -> NormalizedSlowField {
        NormalizedSlowField {
            f_c: self.f_c.clone(),
            g_c: self.g_c.clone(),
            p: self.p(),
        }
    }
}

// ---------------------------------------------------------------------------
// Built-in models
// ---------------------------------------------------------------------------

/// The Chua 3D circuit model with cubic nonlinearity k(z) = z³/3 − z:
///
/// ẋ = z − y, ẏ = α(x + y), ε ż = −x − k(z); x eliminated as x = −k(z).
pub fn chua3(params: ChuaParams3) -> Result<SlowFastSystem> {
    let ChuaParams3 { alpha } = params;
    let mut sys = SlowFastSystem::new(
        "chua3",
        vec!["x".into(), "y".into()],
        "z".into(),
        vec![Expr::parse("z - y")?, Expr::parse("alpha*(x + y)")?],
        Expr::parse("-x - (z^3/3 - z)")?,
        1.0 / 20.0,
        EliminationRule::Explicit(Expr::parse("z - z^3/3")?),
        [("alpha".to_string(), alpha)].into(),
    )?;
    sys.kind = ModelKind::Chua3;
    Ok(sys)
}

/// The Chua 4D circuit model with cubic nonlinearity k(u) = c₁u³ + c₂u:
///
/// ẋ = β₁(z − x − u), ẏ = β₂z, ż = −α₂z − y − x, ε u̇ = x − k(u);
/// x eliminated as x = k(u). Requires c₂ < 0 and β₁ > 0.
pub fn chua4(params: ChuaParams4) -> Result<SlowFastSystem> {
    let ChuaParams4 {
        alpha2,
        beta1,
        beta2,
        c1,
        c2,
    } = params;
    if !(c2 < 0.0) {
        return Err(Error::Model(format!(
            "Chua 4D requires c2 < 0 (got c2 = {c2}); the fold structure \
             needs the cubic nonlinearity to have two turning points"
        )));
    }
    if !(beta1 > 0.0) {
        return Err(Error::Model(format!(
            "Chua 4D requires beta1 > 0 (got beta1 = {beta1})"
        )));
    }
    let mut sys = SlowFastSystem::new(
        "chua4",
        vec!["x".into(), "y".into(), "z".into()],
        "u".into(),
        vec![
            Expr::parse("beta1*(z - x - u)")?,
            Expr::parse("beta2*z")?,
            Expr::parse("-alpha2*z - y - x")?,
        ],
        Expr::parse("x - (c1*u^3 + c2*u)")?,
        0.098_592,
        EliminationRule::Explicit(Expr::parse("c1*u^3 + c2*u")?),
        [
            ("alpha2".to_string(), alpha2),
            ("beta1".to_string(), beta1),
            ("beta2".to_string(), beta2),
            ("c1".to_string(), c1),
            ("c2".to_string(), c2),
        ]
        .into(),
    )?;
    sys.kind = ModelKind::Chua4;
    Ok(sys)
}

// ---------------------------------------------------------------------------
// Derived vector fields
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum ElimEval {
    Explicit(CompiledExpr),
    Implicit {
        seed: f64,
        tol: f64,
        warm: Cell<f64>,
    },
}

/// The reduced normalized vector field on the chart (x₂, …, x_p, y₁).
///
/// With implicit elimination this carries a warm-start cache and is
/// deliberately not `Sync`; clone one evaluator per thread.
#[derive(Debug, Clone)]
pub struct ReducedField {
    chart_vars: Vec<String>,
    p: usize,
    f_c: Vec<CompiledExpr>,
    g_c: CompiledExpr,
    elim: ElimEval,
}

impl ReducedField {
    pub fn chart_vars(&self) -> &[String] {
        &self.chart_vars
    }

    /// Recover x₁ from a chart point via the elimination rule.
    pub fn eliminate_x1(&self, chart: &[f64]) -> Result<f64, NumError> {
        self.eliminate_generic(chart)
    }

    fn eliminate_generic<C: JetScalar>(&self, chart: &[C]) -> Result<C, NumError> {
        match &self.elim {
            ElimEval::Explicit(c) => c.eval(chart),
            ElimEval::Implicit { seed, tol, warm } => {
                // Stage 1: plain f64 Newton from the warm start.
                let vals: Vec<f64> = chart.iter().map(|c| c.value()).collect();
                let mut x = warm.get();
                if !x.is_finite() {
                    x = *seed;
                }
                let mut converged = false;
                for _ in 0..50 {
                    let (g, gx) = self.g_and_gx1(&x, &vals)?;
                    if g.abs() <= tol * (1.0 + x.abs()) {
                        converged = true;
                        break;
                    }
                    if gx == 0.0 {
                        return Err(NumError::Domain(
                            "implicit elimination: ∂g/∂x₁ vanished during Newton".into(),
                        ));
                    }
                    let next = x - g / gx;
                    if !next.is_finite() {
                        return Err(NumError::NonFinite("implicit elimination".into()));
                    }
                    x = next;
                }
                if !converged {
                    let (g, _) = self.g_and_gx1(&x, &vals)?;
                    if g.abs() > tol * (1.0 + x.abs()) {
                        return Err(NumError::Domain(format!(
                            "implicit elimination diverged: |g| = {:.3e} after 50 \
                             Newton iterations (seed {seed})",
                            g.abs()
                        )));
                    }
                }
                warm.set(x);
                // Stage 2: a few Newton steps in jet arithmetic to propagate
                // derivative information exactly (each step doubles the
                // order of contact; 4 steps are ample for order-2 jets).
                let mut xc = C::from_f64(x);
                for _ in 0..4 {
                    let mut seeds = Vec::with_capacity(chart.len() + 1);
                    seeds.push(Jet2::variable(1, 0, xc.clone()));
                    for c in chart {
                        seeds.push(Jet2::constant(1, c.clone()));
                    }
                    let gj = self.g_c.eval(&seeds)?;
                    let (g, gx) = (gj.val().clone(), gj.grad(0).clone());
                    xc = xc.sub(&g.div(&gx)?);
                }
                Ok(xc)
            }
        }
    }

    fn g_and_gx1(&self, x1: &f64, chart: &[f64]) -> Result<(f64, f64), NumError> {
        let mut seeds = Vec::with_capacity(chart.len() + 1);
        seeds.push(Jet2::variable(1, 0, *x1));
        for c in chart {
            seeds.push(Jet2::constant(1, *c));
        }
        let gj = self.g_c.eval(&seeds)?;
        Ok((*gj.val(), *gj.grad(0)))
    }
}

impl VectorField for ReducedField {
    fn dim(&self) -> usize {
        self.p
    }

    fn eval_generic<C: JetScalar>(&self, chart: &[C]) -> Result<Vec<C>, NumError> {
        let p = self.p;
        if chart.len() != p {
            return Err(NumError::Shape(format!(
                "reduced field expects {p} chart coordinates, got {}",
                chart.len()
            )));
        }
        let x1 = self.eliminate_generic(chart)?;
        let n = p + 1;
        let mut full = Vec::with_capacity(n);
        full.push(x1);
        full.extend_from_slice(chart);
        // Partials of g with respect to the *full* coordinates, as C-valued
        // functions of the chart point (nested-jet chain rule).
        let seeds: Vec<Jet2<C>> = (0..n)
            .map(|i| Jet2::variable(n, i, full[i].clone()))
            .collect();
        let gj = self.g_c.eval(&seeds)?;
        let zero = C::from_f64(0.0);
        let g_partial = |i: usize| -> C {
            if gj.dim() == n {
                gj.grad(i).clone()
            } else {
                zero.clone()
            }
        };
        let fvals: Vec<C> = self
            .f_c
            .iter()
            .map(|f| f.eval(&full))
            .collect::<Result<_, _>>()?;
        let g_y = g_partial(n - 1);
        let mut out = Vec::with_capacity(p);
        for fv in fvals.iter().take(p).skip(1) {
            out.push(fv.mul(&g_y).neg());
        }
        let mut last = g_partial(0).mul(&fvals[0]);
        for i in 1..p {
            last = last.add(&g_partial(i).mul(&fvals[i]));
        }
        out.push(last);
        Ok(out)
    }
}

/// The full-space field (f₁, …, f_p, g/ε).
#[derive(Debug, Clone)]
pub struct FullField {
    f_c: Vec<CompiledExpr>,
    g_c: CompiledExpr,
    inv_eps: f64,
}

impl VectorField for FullField {
    fn dim(&self) -> usize {
        self.f_c.len() + 1
    }

    fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<Vec<C>, NumError> {
        if x.len() != self.dim() {
            return Err(NumError::Shape(format!(
                "full field expects {} coordinates, got {}",
                self.dim(),
                x.len()
            )));
        }
        let mut out = Vec::with_capacity(self.dim());
        for f in &self.f_c {
            out.push(f.eval(x)?);
        }
        out.push(self.g_c.eval(x)?.scale(self.inv_eps));
        Ok(out)
    }
}

/// The full-space normalized slow field
/// (−∂g/∂y₁·f₁, …, −∂g/∂y₁·f_p, Σᵢ ∂g/∂xᵢ·fᵢ).
#[derive(Debug, Clone)]
pub struct NormalizedSlowField {
    f_c: Vec<CompiledExpr>,
    g_c: CompiledExpr,
    p: usize,
}

impl VectorField for NormalizedSlowField {
    fn dim(&self) -> usize {
        self.p + 1
    }

    fn eval_generic<C: JetScalar>(&self, x: &[C]) -> Result<Vec<C>, NumError> {
        let n = self.p + 1;
        if x.len() != n {
            return Err(NumError::Shape(format!(
                "normalized slow field expects {n} coordinates, got {}",
                x.len()
            )));
        }
        let seeds: Vec<Jet2<C>> = (0..n)
            .map(|i| Jet2::variable(n, i, x[i].clone()))
            .collect();
        let gj = self.g_c.eval(&seeds)?;
        let zero = C::from_f64(0.0);
        let g_partial = |i: usize| -> C {
            if gj.dim() == n {
                gj.grad(i).clone()
            } else {
                zero.clone()
            }
        };
        let fvals: Vec<C> = self
            .f_c
            .iter()
            .map(|f| f.eval(x))
            .collect::<Result<_, _>>()?;
        let g_y = g_partial(n - 1);
        let mut out = Vec::with_capacity(n);
        for fv in &fvals {
            out.push(fv.mul(&g_y).neg());
        }
        let mut last = g_partial(0).mul(&fvals[0]);
        for i in 1..self.p {
            last = last.add(&g_partial(i).mul(&fvals[i]));
        }
        out.push(last);
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

impl SlowFastSystem {
    /// Load a model from TOML text. Schema:
    ///
    /// ```toml
    /// name = "my-model"            # optional
    /// slow_vars = ["x", "y"]
    /// fast_var = "z"
    /// f = ["z - y", "alpha*(x + y)"]
    /// g = "-x - (z^3/3 - z)"
    /// epsilon = 0.05
    /// eliminate_x1 = "z - z^3/3"   # optional; omit for implicit Newton
    ///
    /// [params]
    /// alpha = 0.2571389636
    /// ```
    pub fn from_toml_str(text: &str) -> Result<SlowFastSystem> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Model(format!("model file: {e}")))?;
        let get = |key: &str| -> Result<&toml::Value> {
            table
                .get(key)
                .ok_or_else(|| Error::Model(format!("model file: missing field `{key}`")))
        };
        let as_str = |v: &toml::Value, key: &str| -> Result<String> {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::Model(format!("model file: `{key}` must be a string")))
        };
        let name = match table.get("name") {
            Some(v) => as_str(v, "name")?,
            None => "custom".to_string(),
        };
        let slow_vars: Vec<String> = get("slow_vars")?
            .as_array()
            .ok_or_else(|| Error::Model("model file: `slow_vars` must be an array".into()))?
            .iter()
            .map(|v| as_str(v, "slow_vars"))
            .collect::<Result<_>>()?;
        let fast_var = as_str(get("fast_var")?, "fast_var")?;
        let f: Vec<Expr> = get("f")?
            .as_array()
            .ok_or_else(|| Error::Model("model file: `f` must be an array".into()))?
            .iter()
            .map(|v| Expr::parse(&as_str(v, "f")?))
            .collect::<Result<_>>()?;
        let g = Expr::parse(&as_str(get("g")?, "g")?)?;
        let epsilon = get("epsilon")?
            .as_float()
            .or_else(|| get("epsilon").ok()?.as_integer().map(|i| i as f64))
            .ok_or_else(|| Error::Model("model file: `epsilon` must be a number".into()))?;
        let elimination = match table.get("eliminate_x1") {
            Some(v) => EliminationRule::Explicit(Expr::parse(&as_str(v, "eliminate_x1")?)?),
            None => EliminationRule::Implicit {
                seed: 0.0,
                tol: 1e-12,
            },
        };
        let params: BTreeMap<String, f64> = match table.get("params") {
            Some(v) => {
                let t = v.as_table().ok_or_else(|| {
                    Error::Model("model file: `params` must be a table".into())
                })?;
                t.iter()
                    .map(|(k, v)| {
                        let num = v
                            .as_float()
                            .or_else(|| v.as_integer().map(|i| i as f64))
                            .ok_or_else(|| {
                                Error::Model(format!(
                                    "model file: parameter `{k}` must be a number"
                                ))
                            })?;
                        Ok((k.clone(), num))
                    })
                    .collect::<Result<_>>()?
            }
            None => BTreeMap::new(),
        };
        SlowFastSystem::new(name, slow_vars, fast_var, f, g, epsilon, elimination, params)
    }
}
