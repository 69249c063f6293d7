//! Vector-field models and their desingularized counterparts.
//!
//! A model supplies three polynomial evaluations of one underlying field f:
//! the raw field itself, the rescaled field f̃ used by the quasi-parabolic
//! chart, and the rescaled field f̂ used by directional charts. All three
//! are generic over a [`Scalar`] so the same formulas drive plain float
//! estimates, interval enclosures, derivative duals, and Taylor series.
//!
//! [`desing_para`] and [`desing_dir`] assemble the chart vector fields whose
//! trajectories stay bounded while the original solution blows up; the
//! factor [`DesingularizedField::dt_dtau`] converts chart time τ back to
//! original time t.

use crate::compact::{CompactChart, CompactError, QHType, Sign};
use crate::interval::{Interval, IntervalMatrix, IntervalVector};
use std::ops::{Add, Mul, Neg, Sub};

/// Arithmetic carrier for polynomial field evaluation.
///
/// Implementations: `f64` (fast approximation), [`Interval`] (verified
/// enclosure), [`DualV`] (forward-mode derivative), and the integrator's
/// Taylor series. Fields are polynomial, so ring operations plus constant
/// injection suffice.
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Injects an interval constant (problem parameters are intervals).
    fn from_interval(v: Interval) -> Self;

    /// Injects the exact rational num/den. Carriers that track exact values
    /// override this to avoid the rounding inherent in `from_interval`.
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_interval(Interval::point(num as f64) / Interval::point(den as f64))
    }

    fn zero() -> Self;

    fn one() -> Self;

    /// Nonnegative integer power; overridden where a tighter evaluation
    /// than repeated multiplication exists.
    fn powu(&self, n: u32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let mut base = self.clone();
        let mut n = n;
        let mut acc: Option<Self> = None;
        loop {
            if n & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a * base.clone(),
                });
            }
            n >>= 1;
            if n == 0 {
                break;
            }
            base = base.clone() * base.clone();
        }
        acc.expect("n >= 1")
    }
}

impl Scalar for f64 {
    fn from_interval(v: Interval) -> Self {
        v.mid()
    }

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn powu(&self, n: u32) -> Self {
        self.powi(n as i32)
    }
}

impl Scalar for Interval {
    fn from_interval(v: Interval) -> Self {
        v
    }

    fn zero() -> Self {
        Interval::zero()
    }

    fn one() -> Self {
        Interval::one()
    }

    fn powu(&self, n: u32) -> Self {
        // Sign-aware power: tight for even n on mixed-sign intervals.
        self.powi(n)
    }
}

/// The exact rational num/den as a `Scalar` constant (outward where the
/// quotient is not representable).
pub fn rat<S: Scalar>(num: i64, den: i64) -> S {
    S::from_ratio(num, den)
}

/// Exact rational carrier for residual evaluation at a point.
///
/// Every float is a dyadic rational, so a polynomial field evaluated here
/// incurs no rounding at all. Constants that are genuine intervals (width
/// greater than zero) have no exact value; they poison the evaluation to
/// `Wide`, telling the caller to fall back to interval arithmetic. That
/// keeps the carrier sound: a `Val` result certifies every input entered
/// exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactScalar {
    Val(num::BigRational),
    Wide,
}

impl ExactScalar {
    /// The exact value, unless some constant was a nondegenerate interval.
    pub fn value(&self) -> Option<&num::BigRational> {
        match self {
            ExactScalar::Val(v) => Some(v),
            ExactScalar::Wide => None,
        }
    }
}

impl Add for ExactScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExactScalar::Val(a), ExactScalar::Val(b)) => ExactScalar::Val(a + b),
            _ => ExactScalar::Wide,
        }
    }
}

impl Sub for ExactScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExactScalar::Val(a), ExactScalar::Val(b)) => ExactScalar::Val(a - b),
            _ => ExactScalar::Wide,
        }
    }
}

impl Mul for ExactScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExactScalar::Val(a), ExactScalar::Val(b)) => ExactScalar::Val(a * b),
            _ => ExactScalar::Wide,
        }
    }
}

impl Neg for ExactScalar {
    type Output = Self;
    fn neg(self) -> Self {
        match self {
            ExactScalar::Val(a) => ExactScalar::Val(-a),
            ExactScalar::Wide => ExactScalar::Wide,
        }
    }
}

impl Scalar for ExactScalar {
    fn from_interval(v: Interval) -> Self {
        if v.lo() == v.hi() {
            match num::BigRational::from_float(v.lo()) {
                Some(r) => ExactScalar::Val(r),
                None => ExactScalar::Wide,
            }
        } else {
            ExactScalar::Wide
        }
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        ExactScalar::Val(num::BigRational::new(num.into(), den.into()))
    }

    fn zero() -> Self {
        ExactScalar::Val(num::Zero::zero())
    }

    fn one() -> Self {
        ExactScalar::Val(num::One::one())
    }
}

/// Float approximation of an exact rational, good to about one unit in the
/// last place.
///
/// The library conversion divides two independently rounded floats and
/// degrades to NaN once numerator and denominator both overflow, so scale
/// by a power of two first: shift until the integer quotient carries about
/// 64 significant bits, convert that, and undo the shift.
fn rational_approx(x: &num::BigRational) -> f64 {
    use num::{Signed, ToPrimitive, Zero};
    if x.is_zero() {
        return 0.0;
    }
    let neg = x.numer().is_negative();
    let n = x.numer().abs();
    let d = x.denom().clone();
    let shift = 64 - (n.bits() as i64 - d.bits() as i64);
    let q = if shift >= 0 {
        (n << (shift as usize)) / d
    } else {
        n / (d << ((-shift) as usize))
    };
    let mag = scale_pow2(q.to_f64().unwrap_or(f64::INFINITY), -shift);
    if neg { -mag } else { mag }
}

/// `x * 2^e` without over- or underflowing the scale factor itself.
fn scale_pow2(x: f64, e: i64) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 1023 {
        x *= f64::from_bits(2046 << 52);
        e -= 1023;
    }
    while e < -1022 {
        x *= f64::from_bits(1 << 52);
        e += 1022;
    }
    x * f64::from_bits(((e + 1023) as u64) << 52)
}

/// Verified enclosure of an exact rational.
///
/// Starts from the float approximation and nudges each endpoint outward
/// until an exact comparison confirms the bracket, so the result is
/// rigorous no matter how rough the approximation was.
pub fn rational_to_interval(x: &num::BigRational) -> Interval {
    let approx = rational_approx(x);
    let mut lo = if approx.is_finite() { approx } else { f64::MAX.copysign(approx) };
    let mut hi = lo;
    let exact = |f: f64| num::BigRational::from_float(f).expect("finite endpoint");
    while lo.is_finite() && exact(lo) > *x {
        lo = lo.next_down();
    }
    while hi.is_finite() && exact(hi) < *x {
        hi = hi.next_up();
    }
    Interval::new(lo, hi)
}

/// Forward-mode dual: a value paired with its gradient with respect to a
/// set of seed directions.
///
/// The gradient vector is padded lazily: an empty gradient means zero in
/// every direction, so constants cost nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct DualV<S> {
    pub v: S,
    pub d: Vec<S>,
}

impl<S: Scalar> DualV<S> {
    /// A constant (zero gradient).
    pub fn constant(v: S) -> Self {
        DualV { v, d: Vec::new() }
    }

    /// The `i`-th of `n` seed variables: gradient e_i.
    pub fn seed(v: S, i: usize, n: usize) -> Self {
        let mut d = vec![S::zero(); n];
        d[i] = S::one();
        DualV { v, d }
    }

    /// Partial derivative in direction `i` (zero if never touched).
    pub fn partial(&self, i: usize) -> S {
        self.d.get(i).cloned().unwrap_or_else(S::zero)
    }
}

fn zip_pad<S: Scalar>(a: &[S], b: &[S], f: impl Fn(S, S) -> S) -> Vec<S> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            f(
                a.get(i).cloned().unwrap_or_else(S::zero),
                b.get(i).cloned().unwrap_or_else(S::zero),
            )
        })
        .collect()
}

impl<S: Scalar> Add for DualV<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        DualV {
            v: self.v + rhs.v,
            d: zip_pad(&self.d, &rhs.d, |x, y| x + y),
        }
    }
}

impl<S: Scalar> Sub for DualV<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        DualV {
            v: self.v - rhs.v,
            d: zip_pad(&self.d, &rhs.d, |x, y| x - y),
        }
    }
}

impl<S: Scalar> Mul for DualV<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let n = self.d.len().max(rhs.d.len());
        let d = (0..n)
            .map(|i| {
                let du = self.d.get(i).cloned().unwrap_or_else(S::zero);
                let dv = rhs.d.get(i).cloned().unwrap_or_else(S::zero);
                self.v.clone() * dv + rhs.v.clone() * du
            })
            .collect();
        DualV {
            v: self.v * rhs.v,
            d,
        }
    }
}

impl<S: Scalar> Neg for DualV<S> {
    type Output = Self;
    fn neg(self) -> Self {
        DualV {
            v: -self.v,
            d: self.d.into_iter().map(|x| -x).collect(),
        }
    }
}

impl<S: Scalar> Scalar for DualV<S> {
    fn from_interval(v: Interval) -> Self {
        DualV::constant(S::from_interval(v))
    }

    fn zero() -> Self {
        DualV::constant(S::zero())
    }

    fn one() -> Self {
        DualV::constant(S::one())
    }
}

/// A vector field that is asymptotically quasi-homogeneous for its declared
/// type, given through its three polynomial evaluations.
///
/// `eval_f_tilde` receives the inverse scale q = κ⁻¹ and must be polynomial
/// in (x, q): this encodes the asymptotic quasi-homogeneity. `eval_f_hat`
/// is the directional-chart analogue in (s, x); models advertise which
/// directional charts they provide via [`VectorFieldModel::supports_dir_chart`].
pub trait VectorFieldModel {
    /// Phase-space dimension n.
    fn dim(&self) -> usize;

    /// The quasi-homogeneous type (weights and order offset k).
    fn qh_type(&self) -> &QHType;

    /// The raw field f(y).
    fn eval_f<S: Scalar>(&self, y: &[S]) -> Vec<S>;

    /// The parabolic-chart rescaling f̃(x, q), q = κ⁻¹.
    fn eval_f_tilde<S: Scalar>(&self, x: &[S], q: &S) -> Vec<S>;

    /// Whether a directional chart on `index` with `sign` is available.
    fn supports_dir_chart(&self, _index: usize, _sign: Sign) -> bool {
        false
    }

    /// The directional-chart rescaling f̂(s, x) for the given chart; `x`
    /// holds the n−1 non-chart coordinates in order, the result all n
    /// components. Only called for supported charts.
    fn eval_f_hat<S: Scalar>(&self, s: &S, x: &[S], index: usize, sign: Sign) -> Vec<S>;

    /// Jacobian enclosure of the raw field, by forward-mode duals over
    /// `eval_f` (exact differentiation evaluated outward).
    fn eval_df(&self, y: &IntervalVector) -> IntervalMatrix {
        let n = self.dim();
        let seeded: Vec<DualV<Interval>> = (0..n).map(|i| DualV::seed(y[i], i, n)).collect();
        let out = self.eval_f(&seeded);
        IntervalMatrix::from_rows(
            out.iter()
                .map(|row| (0..n).map(|j| row.partial(j)).collect())
                .collect(),
        )
    }
}

/// A chart vector field g with its time-rescale factor dt/dτ.
#[derive(Debug, Clone)]
pub struct DesingularizedField<M> {
    model: M,
    chart: CompactChart,
}

/// Builds the quasi-parabolic desingularized field
/// dx_i/dτ = F(x)·f̃_i(x) − α_i x_i G(x) with q = 1 − p(x)^{2c},
/// F = 1 − ((2c−1)/2c)·q and G = Σ_j x_j^{2β_j−1} f̃_j / α_j.
pub fn desing_para<M: VectorFieldModel>(model: M) -> DesingularizedField<M> {
    let chart = CompactChart::parabolic(model.qh_type().clone());
    DesingularizedField { model, chart }
}

/// Builds the directional desingularized field on the chart singling out
/// coordinate `index` with `sign`:
/// ds/dτ = −(σ/α_i)·s·f̂_i, dx_j/dτ = f̂_j − (σ α_j/α_i)·x_j·f̂_i.
///
/// This is the closed form of the structured linear solve whose constant
/// matrix inverts exactly; state layout is (s, x) with s first.
pub fn desing_dir<M: VectorFieldModel>(
    model: M,
    index: usize,
    sign: Sign,
) -> Result<DesingularizedField<M>, CompactError> {
    if index >= model.dim() {
        return Err(CompactError::BadIndex(index, model.dim()));
    }
    let chart = CompactChart::directional(model.qh_type().clone(), index, sign)?;
    Ok(DesingularizedField { model, chart })
}

impl<M: VectorFieldModel> DesingularizedField<M> {
    /// State dimension (n in both chart families).
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn chart(&self) -> &CompactChart {
        &self.chart
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    /// The chart velocity at `state`, generic in the scalar carrier.
    pub fn eval_g_generic<S: Scalar>(&self, state: &[S]) -> Vec<S> {
        let t = self.model.qh_type();
        match self.chart.kind() {
            crate::compact::ChartKind::QuasiParabolic => {
                let n = self.model.dim();
                assert_eq!(state.len(), n, "state dimension");
                // q = 1 - p(x)^{2c}
                let mut p2c = S::zero();
                for i in 0..n {
                    p2c = p2c + state[i].powu(2 * t.beta(i));
                }
                let q = S::one() - p2c;
                let f_tilde = self.model.eval_f_tilde(state, &q);
                let two_c = i64::from(2 * t.c());
                let big_f = S::one() - rat::<S>(two_c - 1, two_c) * q.clone();
                let mut big_g = S::zero();
                for j in 0..n {
                    big_g = big_g
                        + state[j].powu(2 * t.beta(j) - 1)
                            * f_tilde[j].clone()
                            * rat::<S>(1, i64::from(t.alpha(j)));
                }
                (0..n)
                    .map(|i| {
                        big_f.clone() * f_tilde[i].clone()
                            - rat::<S>(i64::from(t.alpha(i)), 1)
                                * state[i].clone()
                                * big_g.clone()
                    })
                    .collect()
            }
            crate::compact::ChartKind::Directional { index, sign } => {
                let n = self.model.dim();
                assert_eq!(state.len(), n, "state dimension");
                let s = &state[0];
                let x = &state[1..];
                let f_hat = self.model.eval_f_hat(s, x, index, sign);
                let ai = i64::from(t.alpha(index));
                let sgn = sign.unit();
                let pivot = f_hat[index].clone();
                let mut out = Vec::with_capacity(n);
                out.push(-(rat::<S>(sgn, ai) * s.clone() * pivot.clone()));
                let mut slot = 0;
                for j in 0..n {
                    if j == index {
                        continue;
                    }
                    out.push(
                        f_hat[j].clone()
                            - rat::<S>(sgn * i64::from(t.alpha(j)), ai)
                                * x[slot].clone()
                                * pivot.clone(),
                    );
                    slot += 1;
                }
                out
            }
        }
    }

    /// Interval enclosure of the chart velocity.
    pub fn eval_g(&self, state: &IntervalVector) -> IntervalVector {
        IntervalVector::from_vec(self.eval_g_generic(state.as_slice()))
    }

    /// Jacobian enclosure of the chart velocity, by forward-mode duals.
    pub fn eval_dg(&self, state: &IntervalVector) -> IntervalMatrix {
        let n = self.dim();
        let seeded: Vec<DualV<Interval>> =
            (0..n).map(|i| DualV::seed(state[i], i, n)).collect();
        let out = self.eval_g_generic(&seeded);
        IntervalMatrix::from_rows(
            out.iter()
                .map(|row| (0..n).map(|j| row.partial(j)).collect())
                .collect(),
        )
    }

    /// dt/dτ at `state`: q^k·F in the parabolic chart, s^k in a
    /// directional chart.
    pub fn dt_dtau_generic<S: Scalar>(&self, state: &[S]) -> S {
        let t = self.model.qh_type();
        let k = t.order_k();
        match self.chart.kind() {
            crate::compact::ChartKind::QuasiParabolic => {
                let mut p2c = S::zero();
                for i in 0..self.model.dim() {
                    p2c = p2c + state[i].powu(2 * t.beta(i));
                }
                let q = S::one() - p2c;
                let two_c = i64::from(2 * t.c());
                let big_f = S::one() - rat::<S>(two_c - 1, two_c) * q.clone();
                q.powu(k) * big_f
            }
            crate::compact::ChartKind::Directional { .. } => state[0].powu(k),
        }
    }

    /// Interval enclosure of dt/dτ.
    pub fn dt_dtau(&self, state: &IntervalVector) -> Interval {
        self.dt_dtau_generic(state.as_slice())
    }
}

/// Defect of the horizon-invariance identity for a parabolic-chart field:
/// ⟨∇(1 − p^{2c}), g(x)⟩ + G(x)·(1 − p(x)^{2c}), which is identically zero
/// and must enclose 0 when evaluated outward.
///
/// Used as a test instrument and as a runtime sanity check on enclosures.
pub fn horizon_residual<M: VectorFieldModel>(
    field: &DesingularizedField<M>,
    x: &IntervalVector,
) -> Interval {
    assert!(
        matches!(
            field.chart().kind(),
            crate::compact::ChartKind::QuasiParabolic
        ),
        "horizon_residual is a parabolic-chart identity"
    );
    let t = field.model.qh_type();
    let n = field.dim();
    let g = field.eval_g(x);
    let mut p2c = Interval::zero();
    for i in 0..n {
        p2c = p2c + x[i].powi(2 * t.beta(i));
    }
    let q = Interval::one() - p2c;
    let f_tilde = field.model.eval_f_tilde(x.as_slice(), &q);
    let mut big_g = Interval::zero();
    let mut grad_dot = Interval::zero();
    for j in 0..n {
        let mono = x[j].powi(2 * t.beta(j) - 1);
        big_g = big_g + mono * f_tilde[j] * rat::<Interval>(1, i64::from(t.alpha(j)));
        let two_beta = Interval::point(f64::from(2 * t.beta(j)));
        grad_dot = grad_dot - two_beta * mono * g[j];
    }
    grad_dot + big_g * q
}
