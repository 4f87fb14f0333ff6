//! Truncated Taylor objects ("jets") and the scalar trait they share.
//!
//! Two jet families cover every derivative the crate needs:
//!
//! * [`TimeJet`] — univariate truncated Taylor series in the time variable.
//!   Coefficient `j` stores the *Taylor* coefficient `x⁽ʲ⁾(0)/j!` (the
//!   halved-coefficient convention at order two and beyond);
//!   [`TimeJet::derivative`] returns the plain derivative `cⱼ · j!`.
//! * [`Jet2`] — multivariate second-order jet over `d` directions, storing
//!   the value, the `d` first partials, and the `d(d+1)/2` *raw* (unhalved)
//!   second partials `∂²f/∂xᵢ∂xⱼ` packed as the upper triangle.
//!
//! Both are generic over any [`JetScalar`] coefficient type, and both
//! implement [`JetScalar`] themselves, so they nest: `TimeJet<Jet2<f64>>`
//! propagates spatial second derivatives through a time-Taylor recurrence,
//! which is exactly what the flow-curvature Hessian needs. All propagation
//! is exact to machine precision in each retained coefficient — there is no
//! finite-difference truncation anywhere in this module.

use crate::error::NumError;
use arrayvec::ArrayVec;

/// Maximum number of univariate coefficients (supports time derivatives up
/// to order 7; trajectory jets are capped at order 6).
pub const TIME_JET_MAX_COEFFS: usize = 8;
/// Maximum number of directions in a multivariate jet (systems here have at
/// most 4 variables; 6 leaves headroom for tests).
pub const JET2_MAX_DIM: usize = 6;
const JET2_MAX_HESS: usize = JET2_MAX_DIM * (JET2_MAX_DIM + 1) / 2;

/// Scalar interface shared by `f64` and by jets of jets.
///
/// Fallible operations return [`NumError`] for data-dependent failures
/// (domain violations); mixing jets of different shapes in one operation is
/// a programming error and panics. Public evaluation boundaries
/// ([`crate::expr::eval_jet`]) validate shapes up front so user input can
/// never trigger those panics.
pub trait JetScalar: Clone + std::fmt::Debug {
    fn from_f64(v: f64) -> Self;
    /// The underlying point value: recursively the order-zero coefficient.
    fn value(&self) -> f64;
    /// True when every retained coefficient is finite.
    fn is_finite(&self) -> bool;
    /// Largest absolute value among all retained raw `f64` coefficients.
    fn max_abs_coeff(&self) -> f64;
    /// True when `self` and `other` have identical order/mode/dimension.
    fn same_shape(&self, other: &Self) -> bool;

    fn neg(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Result<Self, NumError>;

    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self, NumError>;
    fn sqrt(&self) -> Result<Self, NumError>;
    fn tanh(&self) -> Self;
    /// Absolute value. Errors when the point value is zero but the jet is
    /// not identically zero (the kink of `|·|` has no derivative).
    fn abs(&self) -> Result<Self, NumError>;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn scale(&self, s: f64) -> Self {
        self.mul(&Self::from_f64(s))
    }
    fn recip(&self) -> Result<Self, NumError> {
        Self::one().div(self)
    }

    /// Integer power by repeated (binary) multiplication — exact for
    /// polynomials, no exp/ln round trip. `x.powi(0)` is `1` by convention;
    /// negative exponents take the reciprocal of the positive power.
    fn powi(&self, n: i64) -> Result<Self, NumError> {
        if n == 0 {
            return Ok(Self::one());
        }
        let mut k = n.unsigned_abs();
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    Some(a) => a.mul(&base),
                    None => base.clone(),
                });
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        let p = acc.expect("n != 0");
        if n < 0 {
            p.recip()
        } else {
            Ok(p)
        }
    }

    /// Real power through the exp/ln path; requires a positive base.
    fn powf(&self, exponent: &Self) -> Result<Self, NumError> {
        Ok(exponent.mul(&self.ln()?).exp())
    }
}

impl JetScalar for f64 {
    fn from_f64(v: f64) -> f64 {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn max_abs_coeff(&self) -> f64 {
        f64::abs(*self)
    }
    fn same_shape(&self, _other: &f64) -> bool {
        true
    }
    fn neg(&self) -> f64 {
        -*self
    }
    fn add(&self, other: &f64) -> f64 {
        *self + *other
    }
    fn sub(&self, other: &f64) -> f64 {
        *self - *other
    }
    fn mul(&self, other: &f64) -> f64 {
        *self * *other
    }
    fn div(&self, other: &f64) -> Result<f64, NumError> {
        if *other == 0.0 {
            return Err(NumError::Domain("division by zero".into()));
        }
        Ok(*self / *other)
    }
    fn sin(&self) -> f64 {
        f64::sin(*self)
    }
    fn cos(&self) -> f64 {
        f64::cos(*self)
    }
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn ln(&self) -> Result<f64, NumError> {
        if *self <= 0.0 {
            return Err(NumError::Domain(format!("ln of non-positive value {self}")));
        }
        Ok(f64::ln(*self))
    }
    fn sqrt(&self) -> Result<f64, NumError> {
        if *self < 0.0 {
            return Err(NumError::Domain(format!("sqrt of negative value {self}")));
        }
        Ok(f64::sqrt(*self))
    }
    fn tanh(&self) -> f64 {
        f64::tanh(*self)
    }
    fn abs(&self) -> Result<f64, NumError> {
        Ok(f64::abs(*self))
    }
}

/// Univariate truncated Taylor series: `coeffs[j] = x⁽ʲ⁾(0)/j!`.
///
/// Storage is heap-backed: time jets appear as *coefficients of other jets*
/// in the nested flow-curvature computations, and inline storage there would
/// multiply into oversized stack temporaries.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeJet<C: JetScalar> {
    coeffs: Vec<C>,
}

impl<C: JetScalar> TimeJet<C> {
    /// Constant series of the given order (all derivative coefficients zero).
    pub fn constant(order: usize, v: C) -> Self {
        assert!(
            order + 1 <= TIME_JET_MAX_COEFFS,
            "TimeJet order {order} exceeds supported maximum {}",
            TIME_JET_MAX_COEFFS - 1
        );
        let mut coeffs = Vec::with_capacity(order + 1);
        coeffs.push(v);
        for _ in 0..order {
            coeffs.push(C::zero());
        }
        TimeJet { coeffs }
    }

    /// Series from explicit Taylor coefficients `c₀..c_k`.
    pub fn from_coeffs(cs: &[C]) -> Self {
        assert!(
            !cs.is_empty() && cs.len() <= TIME_JET_MAX_COEFFS,
            "TimeJet needs 1..={TIME_JET_MAX_COEFFS} coefficients, got {}",
            cs.len()
        );
        TimeJet {
            coeffs: cs.iter().cloned().collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Taylor coefficient `cⱼ = x⁽ʲ⁾/j!`.
    pub fn coeff(&self, j: usize) -> &C {
        &self.coeffs[j]
    }

    /// Append the next Taylor coefficient, raising the order by one.
    pub fn push_coeff(&mut self, c: C) {
        assert!(
            self.coeffs.len() < TIME_JET_MAX_COEFFS,
            "TimeJet order overflow (max order {})",
            TIME_JET_MAX_COEFFS - 1
        );
        self.coeffs.push(c);
    }

    /// Plain derivative `x⁽ʲ⁾ = cⱼ · j!`.
    pub fn derivative(&self, j: usize) -> C {
        let mut fact = 1.0;
        for m in 2..=j {
            fact *= m as f64;
        }
        self.coeffs[j].scale(fact)
    }

    fn map2(&self, other: &Self, f: impl Fn(&C, &C) -> C) -> Self {
        let (a, b) = lift_pair_tj(self, other);
        TimeJet {
            coeffs: a
                .coeffs
                .iter()
                .zip(b.coeffs.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// Shared skeleton for the first-order ODE recurrences w(t) with
    /// `w' = rhs(a', state)`: given closures producing coefficient `k` from
    /// the already-known lower coefficients, fills orders `1..=order`.
    fn convolve_up(
        order: usize,
        init: Vec<C>,
        step: impl Fn(&[Vec<C>], usize) -> Vec<C>,
    ) -> Vec<Vec<C>> {
        // `series[s][k]` is coefficient k of auxiliary series s.
        let mut series: Vec<Vec<C>> = init.into_iter().map(|c| vec![c]).collect();
        for k in 1..=order {
            let next = step(&series, k);
            for (s, c) in next.into_iter().enumerate() {
                series[s].push(c);
            }
        }
        series
    }
}

impl<C: JetScalar> JetScalar for TimeJet<C> {
    fn from_f64(v: f64) -> Self {
        // A shapeless constant: order 0. Binary operations lift it to the
        // partner's order on demand via `lift_to`.
        TimeJet::constant(0, C::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.coeffs[0].value()
    }

    fn is_finite(&self) -> bool {
        self.coeffs.iter().all(C::is_finite)
    }

    fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .map(C::max_abs_coeff)
            .fold(0.0, f64::max)
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.coeffs.len() == other.coeffs.len() && self.coeffs[0].same_shape(&other.coeffs[0])
    }

    fn neg(&self) -> Self {
        TimeJet {
            coeffs: self.coeffs.iter().map(C::neg).collect(),
        }
    }

    fn add(&self, other: &Self) -> Self {
        self.map2(other, C::add)
    }

    fn sub(&self, other: &Self) -> Self {
        self.map2(other, C::sub)
    }

    fn mul(&self, other: &Self) -> Self {
        let (a, b) = lift_pair_tj(self, other);
        let n = a.coeffs.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = C::zero();
            for j in 0..=k {
                acc = acc.add(&a.coeffs[j].mul(&b.coeffs[k - j]));
            }
            out.push(acc);
        }
        TimeJet { coeffs: out }
    }

    fn div(&self, other: &Self) -> Result<Self, NumError> {
        let (a, b) = lift_pair_tj(self, other);
        let n = a.coeffs.len();
        let b0 = &b.coeffs[0];
        let mut q: Vec<C> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = a.coeffs[k].clone();
            for j in 0..k {
                acc = acc.sub(&q[j].mul(&b.coeffs[k - j]));
            }
            q.push(acc.div(b0)?);
        }
        Ok(TimeJet { coeffs: q })
    }

    fn sin(&self) -> Self {
        let order = self.order();
        let series = Self::convolve_up(
            order,
            vec![self.coeffs[0].sin(), self.coeffs[0].cos()],
            |s, k| {
                // s' = a'·c, c' = −a'·s  (coefficient form, divided by k)
                let mut sk = C::zero();
                let mut ck = C::zero();
                for j in 1..=k {
                    let ja = self.coeffs[j].scale(j as f64);
                    sk = sk.add(&ja.mul(&s[1][k - j]));
                    ck = ck.sub(&ja.mul(&s[0][k - j]));
                }
                let inv_k = 1.0 / k as f64;
                vec![sk.scale(inv_k), ck.scale(inv_k)]
            },
        );
        TimeJet {
            coeffs: series[0].iter().cloned().collect(),
        }
    }

    fn cos(&self) -> Self {
        let order = self.order();
        let series = Self::convolve_up(
            order,
            vec![self.coeffs[0].sin(), self.coeffs[0].cos()],
            |s, k| {
                let mut sk = C::zero();
                let mut ck = C::zero();
                for j in 1..=k {
                    let ja = self.coeffs[j].scale(j as f64);
                    sk = sk.add(&ja.mul(&s[1][k - j]));
                    ck = ck.sub(&ja.mul(&s[0][k - j]));
                }
                let inv_k = 1.0 / k as f64;
                vec![sk.scale(inv_k), ck.scale(inv_k)]
            },
        );
        TimeJet {
            coeffs: series[1].iter().cloned().collect(),
        }
    }

    fn exp(&self) -> Self {
        let order = self.order();
        let series = Self::convolve_up(order, vec![self.coeffs[0].exp()], |s, k| {
            // e' = a'·e
            let mut ek = C::zero();
            for j in 1..=k {
                ek = ek.add(&self.coeffs[j].scale(j as f64).mul(&s[0][k - j]));
            }
            vec![ek.scale(1.0 / k as f64)]
        });
        TimeJet {
            coeffs: series[0].iter().cloned().collect(),
        }
    }

    fn ln(&self) -> Result<Self, NumError> {
        let n = self.coeffs.len();
        let a0 = &self.coeffs[0];
        let mut l: Vec<C> = Vec::with_capacity(n);
        l.push(a0.ln()?);
        for k in 1..n {
            // k·a_k = Σ_{j=1..k} j·l_j·a_{k−j}  ⇒  solve for l_k
            let mut acc = self.coeffs[k].scale(k as f64);
            for j in 1..k {
                acc = acc.sub(&l[j].scale(j as f64).mul(&self.coeffs[k - j]));
            }
            l.push(acc.scale(1.0 / k as f64).div(a0)?);
        }
        Ok(TimeJet { coeffs: l })
    }

    fn sqrt(&self) -> Result<Self, NumError> {
        let n = self.coeffs.len();
        let mut r: Vec<C> = Vec::with_capacity(n);
        r.push(self.coeffs[0].sqrt()?);
        let two_r0 = r[0].scale(2.0);
        for k in 1..n {
            // a_k = 2·r₀·r_k + Σ_{j=1..k−1} r_j·r_{k−j}
            let mut acc = self.coeffs[k].clone();
            for j in 1..k {
                acc = acc.sub(&r[j].mul(&r[k - j]));
            }
            r.push(acc.div(&two_r0)?);
        }
        Ok(TimeJet { coeffs: r })
    }

    fn tanh(&self) -> Self {
        let order = self.order();
        let u0 = self.coeffs[0].tanh();
        let v0 = C::one().sub(&u0.mul(&u0)); // sech² = 1 − tanh²
        let series = Self::convolve_up(order, vec![u0, v0], |s, k| {
            // u' = a'·v, v' = −2·u·u'
            let mut uk = C::zero();
            for j in 1..=k {
                uk = uk.add(&self.coeffs[j].scale(j as f64).mul(&s[1][k - j]));
            }
            let uk = uk.scale(1.0 / k as f64);
            let mut vk = C::zero();
            for j in 1..k {
                vk = vk.add(&s[0][j].scale(j as f64).mul(&s[0][k - j]));
            }
            // include the just-computed u_k term (j = k pairs with u₀)
            vk = vk.add(&uk.scale(k as f64).mul(&s[0][0]));
            vec![uk, vk.scale(-2.0 / k as f64)]
        });
        TimeJet {
            coeffs: series[0].iter().cloned().collect(),
        }
    }

    fn abs(&self) -> Result<Self, NumError> {
        let v = self.value();
        if v > 0.0 {
            Ok(self.clone())
        } else if v < 0.0 {
            Ok(self.neg())
        } else if self.max_abs_coeff() == 0.0 {
            Ok(self.clone())
        } else {
            Err(NumError::Domain(
                "abs is not differentiable at 0 (jet has nonzero derivative part)".into(),
            ))
        }
    }
}

/// Lift order-0 constants (`TimeJet::from_f64`, `scale`) to the partner's
/// order by zero-padding: an order-0 jet is a genuine constant in time, so
/// its higher coefficients are exactly zero. Jets that are both longer than
/// one coefficient must already agree in length.
fn lift_pair_tj<C: JetScalar>(a: &TimeJet<C>, b: &TimeJet<C>) -> (TimeJet<C>, TimeJet<C>) {
    let (la, lb) = (a.coeffs.len(), b.coeffs.len());
    if la == lb {
        return (a.clone(), b.clone());
    }
    if la == 1 {
        (TimeJet::constant(lb - 1, a.coeffs[0].clone()), b.clone())
    } else if lb == 1 {
        (a.clone(), TimeJet::constant(la - 1, b.coeffs[0].clone()))
    } else {
        panic!("TimeJet shape mismatch: order {} vs {}", la - 1, lb - 1);
    }
}

/// Multivariate second-order jet over `d` directions: value, gradient, and
/// raw second partials packed as the upper triangle (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2<C: JetScalar> {
    val: C,
    grad: ArrayVec<C, JET2_MAX_DIM>,
    hess: ArrayVec<C, JET2_MAX_HESS>,
}

/// Packed index of entry `(i, j)` with `i ≤ j` in dimension `d`.
fn hidx(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < d);
    i * d - (i * i - i) / 2 + (j - i)
}

impl<C: JetScalar> Jet2<C> {
    /// Constant jet (no dependence on any direction).
    pub fn constant(dim: usize, v: C) -> Self {
        assert!(
            dim >= 1 && dim <= JET2_MAX_DIM,
            "Jet2 dimension {dim} outside supported range 1..={JET2_MAX_DIM}"
        );
        let mut grad = ArrayVec::new();
        let mut hess = ArrayVec::new();
        for _ in 0..dim {
            grad.push(C::zero());
        }
        for _ in 0..dim * (dim + 1) / 2 {
            hess.push(C::zero());
        }
        Jet2 {
            val: v,
            grad,
            hess,
        }
    }

    /// The jet of coordinate `i` at value `v` (unit gradient in direction `i`).
    pub fn variable(dim: usize, i: usize, v: C) -> Self {
        assert!(i < dim, "variable index {i} out of range for dimension {dim}");
        let mut j = Self::constant(dim, v);
        j.grad[i] = C::one();
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn val(&self) -> &C {
        &self.val
    }

    pub fn grad(&self, i: usize) -> &C {
        &self.grad[i]
    }

    /// Raw second partial `∂²f/∂xᵢ∂xⱼ` (symmetric access).
    pub fn hess(&self, i: usize, j: usize) -> &C {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.hess[hidx(self.dim(), i, j)]
    }

    fn check_shape(&self, other: &Self) {
        // Dimension check only: coefficient-level shape issues are handled
        // (lifted or rejected) by the inner scalar operations themselves.
        assert!(
            self.dim() == other.dim(),
            "Jet2 shape mismatch: dim {} vs {}",
            self.dim(),
            other.dim()
        );
    }

    fn map2(&self, other: &Self, f: impl Fn(&C, &C) -> C) -> Self {
        self.check_shape(other);
        Jet2 {
            val: f(&self.val, &other.val),
            grad: self
                .grad
                .iter()
                .zip(other.grad.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
            hess: self
                .hess
                .iter()
                .zip(other.hess.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// Chain rule for a unary function with value `f0 = f(v)`,
    /// `f1 = f′(v)`, `f2 = f″(v)`.
    fn compose1(&self, f0: C, f1: C, f2: C) -> Self {
        let d = self.dim();
        let mut grad = ArrayVec::new();
        for i in 0..d {
            grad.push(f1.mul(&self.grad[i]));
        }
        let mut hess = ArrayVec::new();
        for i in 0..d {
            for j in i..d {
                let h = &self.hess[hidx(d, i, j)];
                hess.push(f1.mul(h).add(&f2.mul(&self.grad[i]).mul(&self.grad[j])));
            }
        }
        Jet2 {
            val: f0,
            grad,
            hess,
        }
    }
}

impl<C: JetScalar> JetScalar for Jet2<C> {
    fn from_f64(v: f64) -> Self {
        // A shapeless constant: dimension is fixed lazily by the first
        // binary operation via `lift_to`. We use dim 1 as the canonical
        // placeholder; see `lift_to`.
        Jet2::constant(1, C::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.val.value()
    }

    fn is_finite(&self) -> bool {
        self.val.is_finite()
            && self.grad.iter().all(C::is_finite)
            && self.hess.iter().all(C::is_finite)
    }

    fn max_abs_coeff(&self) -> f64 {
        let g = self.grad.iter().map(C::max_abs_coeff).fold(0.0, f64::max);
        let h = self.hess.iter().map(C::max_abs_coeff).fold(0.0, f64::max);
        self.val.max_abs_coeff().max(g).max(h)
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.val.same_shape(&other.val)
    }

    fn neg(&self) -> Self {
        Jet2 {
            val: self.val.neg(),
            grad: self.grad.iter().map(C::neg).collect(),
            hess: self.hess.iter().map(C::neg).collect(),
        }
    }

    fn add(&self, other: &Self) -> Self {
        let (a, b) = lift_pair(self, other);
        a.map2(&b, C::add)
    }

    fn sub(&self, other: &Self) -> Self {
        let (a, b) = lift_pair(self, other);
        a.map2(&b, C::sub)
    }

    fn mul(&self, other: &Self) -> Self {
        let (a, b) = lift_pair(self, other);
        a.check_shape(&b);
        let d = a.dim();
        let val = a.val.mul(&b.val);
        let mut grad = ArrayVec::new();
        for i in 0..d {
            grad.push(a.val.mul(&b.grad[i]).add(&a.grad[i].mul(&b.val)));
        }
        let mut hess = ArrayVec::new();
        for i in 0..d {
            for j in i..d {
                let idx = hidx(d, i, j);
                let t = a
                    .val
                    .mul(&b.hess[idx])
                    .add(&a.grad[i].mul(&b.grad[j]))
                    .add(&a.grad[j].mul(&b.grad[i]))
                    .add(&a.hess[idx].mul(&b.val));
                hess.push(t);
            }
        }
        Jet2 {
            val,
            grad,
            hess,
        }
    }

    fn div(&self, other: &Self) -> Result<Self, NumError> {
        let (a, b) = lift_pair(self, other);
        // 1/v with f′ = −1/v², f″ = 2/v³, then multiply.
        let inv = b.val.recip()?;
        let inv2 = inv.mul(&inv);
        let rec = b.compose1(inv.clone(), inv2.neg(), inv2.mul(&inv).scale(2.0));
        Ok(a.mul(&rec))
    }

    fn sin(&self) -> Self {
        let s = self.val.sin();
        let c = self.val.cos();
        self.compose1(s.clone(), c, s.neg())
    }

    fn cos(&self) -> Self {
        let s = self.val.sin();
        let c = self.val.cos();
        self.compose1(c.clone(), s.neg(), c.neg())
    }

    fn exp(&self) -> Self {
        let e = self.val.exp();
        self.compose1(e.clone(), e.clone(), e)
    }

    fn ln(&self) -> Result<Self, NumError> {
        let f0 = self.val.ln()?;
        let f1 = self.val.recip()?;
        let f2 = f1.mul(&f1).neg();
        Ok(self.compose1(f0, f1, f2))
    }

    fn sqrt(&self) -> Result<Self, NumError> {
        let s = self.val.sqrt()?;
        let f1 = s.scale(2.0).recip()?; // 1/(2√v)
        let f2 = f1.div(&self.val.scale(2.0))?.neg(); // −1/(4v^{3/2})
        Ok(self.compose1(s, f1, f2))
    }

    fn tanh(&self) -> Self {
        let t = self.val.tanh();
        let sech2 = C::one().sub(&t.mul(&t));
        let f2 = t.mul(&sech2).scale(-2.0);
        self.compose1(t.clone(), sech2, f2)
    }

    fn abs(&self) -> Result<Self, NumError> {
        let v = self.value();
        if v > 0.0 {
            Ok(self.clone())
        } else if v < 0.0 {
            Ok(self.neg())
        } else if self.max_abs_coeff() == 0.0 {
            Ok(self.clone())
        } else {
            Err(NumError::Domain(
                "abs is not differentiable at 0 (jet has nonzero derivative part)".into(),
            ))
        }
    }
}

/// Lift dimension-agnostic constants (`Jet2::from_f64`, which uses the
/// placeholder dimension 1 with zero derivative parts) to the partner's
/// dimension so mixed-arity expressions like `2 * x` work regardless of `x`'s
/// dimension. Jets with a genuine derivative part are never reshaped.
fn lift_pair<C: JetScalar>(a: &Jet2<C>, b: &Jet2<C>) -> (Jet2<C>, Jet2<C>) {
    if a.dim() == b.dim() {
        return (a.clone(), b.clone());
    }
    let is_const = |j: &Jet2<C>| j.grad.iter().chain(j.hess.iter()).all(|c| c.max_abs_coeff() == 0.0);
    if a.dim() == 1 && is_const(a) {
        (Jet2::constant(b.dim(), a.val.clone()), b.clone())
    } else if b.dim() == 1 && is_const(b) {
        (a.clone(), Jet2::constant(a.dim(), b.val.clone()))
    } else {
        panic!(
            "Jet2 shape mismatch: dim {} vs {} (non-constant)",
            a.dim(),
            b.dim()
        );
    }
}
