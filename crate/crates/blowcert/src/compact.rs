//! Quasi-homogeneous type bookkeeping and the compactification charts.
//!
//! A quasi-homogeneous type assigns each coordinate a positive integer
//! weight α_i; the associated functional `p` plays the role of a radius
//! that respects the anisotropic scaling. Two chart families map the
//! unbounded phase space into bounded local coordinates:
//!
//! - the quasi-parabolic global chart, whose scale factor κ(y) is the
//!   verified root of κ^{2c} − κ^{2c−1} − p(y)^{2c};
//! - directional charts, which single out one coordinate of fixed sign
//!   and use s = (±1/y_i)^{1/α_i} as the scale.
//!
//! In both families the horizon at infinity becomes a finite boundary
//! (`p(x) = 1`, resp. `s = 0`), and all evaluations are interval-verified.

use crate::interval::krawczyk::{krawczyk_scalar, KrawczykError};
use crate::interval::{Interval, IntervalVector};

/// Why a chart construction or evaluation was rejected.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CompactError {
    #[error("weights must be positive integers")]
    InvalidWeight,
    #[error("directional chart index {0} out of range for dimension {1}")]
    BadIndex(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("p(x) enclosure touches the horizon p = 1")]
    HorizonTouched,
    #[error("coordinate {0} must be bounded away from zero with the chart's sign")]
    WrongChart(usize),
    #[error("scale enclosure touches s = 0 (the horizon is not in the chart)")]
    ZeroScale,
    #[error("scale root validation failed: {0}")]
    Root(#[from] KrawczykError),
}

/// Sign selecting which end of a coordinate axis a directional chart covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// The sign as a scalar factor.
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// The sign as an exact integer unit.
    pub fn unit(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// A quasi-homogeneous type: weights α_i, dual weights β_i, their common
/// product c = α_iβ_i = lcm(α), and the order offset k of the vector
/// fields this type is used with (fields of order k+1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QHType {
    alpha: Vec<u32>,
    beta: Vec<u32>,
    c: u32,
    order_k: u32,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Builds the type for the given weights, choosing c = lcm(α).
///
/// Rejects zero weights; `order_k` is the k of "order k+1".
pub fn make_type(alpha: &[u32], order_k: u32) -> Result<QHType, CompactError> {
    if alpha.is_empty() || alpha.iter().any(|&a| a == 0) || order_k == 0 {
        return Err(CompactError::InvalidWeight);
    }
    let mut c: u64 = 1;
    for &a in alpha {
        let a = a as u64;
        c = c / gcd(c, a) * a;
    }
    let c = u32::try_from(c).map_err(|_| CompactError::InvalidWeight)?;
    let beta = alpha.iter().map(|&a| c / a).collect();
    Ok(QHType {
        alpha: alpha.to_vec(),
        beta,
        c,
        order_k,
    })
}

impl QHType {
    /// Dimension n of the phase space.
    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Weight α_i.
    pub fn alpha(&self, i: usize) -> u32 {
        self.alpha[i]
    }

    /// Dual weight β_i = c / α_i.
    pub fn beta(&self, i: usize) -> u32 {
        self.beta[i]
    }

    /// All weights.
    pub fn alphas(&self) -> &[u32] {
        &self.alpha
    }

    /// All dual weights.
    pub fn betas(&self) -> &[u32] {
        &self.beta
    }

    /// The common product c = α_iβ_i = lcm(α).
    pub fn c(&self) -> u32 {
        self.c
    }

    /// Order offset k: attached vector fields have order k+1.
    pub fn order_k(&self) -> u32 {
        self.order_k
    }

    fn check_dim(&self, got: usize) -> Result<(), CompactError> {
        if got == self.dim() {
            Ok(())
        } else {
            Err(CompactError::DimensionMismatch {
                expected: self.dim(),
                got,
            })
        }
    }
}

/// One concrete chart of the compactified phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactChart {
    kind: ChartKind,
    qh_type: QHType,
}

/// Which chart family a [`CompactChart`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    /// Global quasi-parabolic chart covering all directions at once.
    QuasiParabolic,
    /// Local chart covering the half-space where coordinate `index`
    /// (0-based) keeps the given sign.
    Directional { index: usize, sign: Sign },
}

impl CompactChart {
    /// The global quasi-parabolic chart for the given type.
    pub fn parabolic(qh_type: QHType) -> Self {
        CompactChart {
            kind: ChartKind::QuasiParabolic,
            qh_type,
        }
    }

    /// The directional chart singling out coordinate `index` (0-based) on
    /// the `sign` side.
    pub fn directional(qh_type: QHType, index: usize, sign: Sign) -> Result<Self, CompactError> {
        if index >= qh_type.dim() {
            return Err(CompactError::BadIndex(index, qh_type.dim()));
        }
        Ok(CompactChart {
            kind: ChartKind::Directional { index, sign },
            qh_type,
        })
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn qh_type(&self) -> &QHType {
        &self.qh_type
    }
}

/// The 2c-th power of the radius functional: Σ_i x_i^{2β_i}.
///
/// Exposed separately because the flow equations use this power far more
/// often than `p` itself, and skipping the 2c-th root keeps enclosures
/// tight.
pub fn p_pow_2c(x: &IntervalVector, t: &QHType) -> Interval {
    assert_eq!(x.dim(), t.dim(), "p functional: dimension mismatch");
    let mut acc = Interval::zero();
    for i in 0..t.dim() {
        acc = acc + x[i].powi(2 * t.beta(i));
    }
    acc
}

/// The radius functional p(x) = (Σ_i x_i^{2β_i})^{1/2c}.
pub fn p_functional(x: &IntervalVector, t: &QHType) -> Interval {
    p_pow_2c(x, t)
        .nth_root(2 * t.c())
        .expect("even powers sum is nonnegative")
}

/// Verified root κ(y) of F_y(κ) = κ^{2c} − κ^{2c−1} − P with P = p(y)^{2c},
/// localized in {κ > max(1, p(y))}.
fn kappa_root(p2c: Interval, t: &QHType) -> Result<Interval, CompactError> {
    let two_c = 2 * t.c();
    let p = p2c.nth_root(two_c).expect("p^2c is nonnegative");
    let base = p.hi().max(1.0);
    // The root lies in (max(1,p), p+1]; κ(0) = 1 sits exactly on the lower
    // localization bound, so the candidate starts a hair below it.
    let lo = (p.lo().max(1.0)) * (1.0 - 1e-9) - 1e-12;
    let hi = 2.0 * base + 1.0;
    let f = |k: Interval| k.powi(two_c) - k.powi(two_c - 1) - p2c;
    // Factored derivative κ^{2c−2}(2cκ − (2c−1)): strictly positive on the
    // candidate, and free of the subtraction dependency of the raw form.
    let df = |k: Interval| {
        k.powi(two_c - 2)
            * (Interval::point(f64::from(two_c)) * k - Interval::point(f64::from(two_c - 1)))
    };
    Ok(krawczyk_scalar(f, df, Interval::new(lo, hi))?)
}

/// Forward quasi-parabolic transform: y ↦ (x, κ) with x_i = y_i / κ^{α_i}.
///
/// κ is the verified scale root; the returned x lies in the open unit
/// parabolic ball p(x) < 1.
pub fn para_forward(
    y: &IntervalVector,
    t: &QHType,
) -> Result<(IntervalVector, Interval), CompactError> {
    t.check_dim(y.dim())?;
    assert!(
        (0..y.dim()).all(|i| y[i].is_finite()),
        "para_forward: non-finite input"
    );
    let kappa = kappa_root(p_pow_2c(y, t), t)?;
    let mut x = IntervalVector::zeros(y.dim());
    for i in 0..y.dim() {
        x[i] = y[i] / kappa.powi(t.alpha(i));
    }
    Ok((x, kappa))
}

/// Inverse quasi-parabolic transform: x ↦ y with
/// y_i = x_i / (1 − p(x)^{2c})^{α_i}.
///
/// Rejects inputs whose p(x) enclosure touches 1: the horizon has no
/// preimage.
pub fn para_inverse(x: &IntervalVector, t: &QHType) -> Result<IntervalVector, CompactError> {
    t.check_dim(x.dim())?;
    let q = Interval::one() - p_pow_2c(x, t);
    if q.lo() <= 0.0 {
        return Err(CompactError::HorizonTouched);
    }
    let mut y = IntervalVector::zeros(x.dim());
    for i in 0..x.dim() {
        y[i] = x[i] / q.powi(t.alpha(i));
    }
    Ok(y)
}

/// Forward directional transform in the given chart: y ↦ (s, x) with
/// s = (σ/y_i)^{1/α_i} and x_j = y_j s^{α_j} for j ≠ i (n−1 entries, in
/// coordinate order with slot i removed).
pub fn dir_forward(
    y: &IntervalVector,
    chart: &CompactChart,
) -> Result<(Interval, IntervalVector), CompactError> {
    let t = chart.qh_type();
    t.check_dim(y.dim())?;
    let ChartKind::Directional { index, sign } = chart.kind() else {
        return Err(CompactError::BadIndex(usize::MAX, t.dim()));
    };
    let yi = y[index] * Interval::point(sign.factor());
    if yi.lo() <= 0.0 {
        return Err(CompactError::WrongChart(index));
    }
    let s = yi
        .recip()
        .expect("sign-checked coordinate excludes zero")
        .nth_root(t.alpha(index))
        .expect("positive base");
    let mut x = IntervalVector::zeros(t.dim() - 1);
    let mut slot = 0;
    for j in 0..t.dim() {
        if j == index {
            continue;
        }
        x[slot] = y[j] * s.powi(t.alpha(j));
        slot += 1;
    }
    Ok((s, x))
}

/// Inverse directional transform: (s, x) ↦ y with y_i = σ/s^{α_i} and
/// y_j = x_j / s^{α_j}.
///
/// Rejects s enclosures touching 0: the horizon s = 0 has no preimage.
pub fn dir_inverse(
    s: Interval,
    x: &IntervalVector,
    chart: &CompactChart,
) -> Result<IntervalVector, CompactError> {
    let t = chart.qh_type();
    let ChartKind::Directional { index, sign } = chart.kind() else {
        return Err(CompactError::BadIndex(usize::MAX, t.dim()));
    };
    if x.dim() + 1 != t.dim() {
        return Err(CompactError::DimensionMismatch {
            expected: t.dim() - 1,
            got: x.dim(),
        });
    }
    if s.lo() <= 0.0 {
        return Err(CompactError::ZeroScale);
    }
    let mut y = IntervalVector::zeros(t.dim());
    let mut slot = 0;
    for j in 0..t.dim() {
        let pow = s.powi(t.alpha(j));
        if j == index {
            y[j] = Interval::point(sign.factor()) / pow;
        } else {
            y[j] = x[slot] / pow;
            slot += 1;
        }
    }
    Ok(y)
}

#[cfg(test)]
mod unit {
    use super::*;

    fn vec_of(vals: &[f64]) -> IntervalVector {
        IntervalVector::from_points(vals)
    }

    #[test]
    fn type_construction_weights() {
        let t = make_type(&[1, 2], 1).unwrap();
        assert_eq!(t.c(), 2);
        assert_eq!(t.betas(), &[2, 1]);

        let t = make_type(&[1, 1], 1).unwrap();
        assert_eq!(t.c(), 1);
        assert_eq!(t.betas(), &[1, 1]);

        let t = make_type(&[2, 2, 1, 1], 1).unwrap();
        assert_eq!(t.c(), 2);
        assert_eq!(t.betas(), &[1, 1, 2, 2]);

        assert!(make_type(&[0, 1], 1).is_err());
        assert!(make_type(&[], 1).is_err());
    }

    #[test]
    fn p_functional_values() {
        let t = make_type(&[1, 2], 1).unwrap();
        let p0 = p_functional(&vec_of(&[0.0, 0.0]), &t);
        assert!(p0.contains(0.0) && p0.width() == 0.0);

        let p1 = p_functional(&vec_of(&[1.0, 0.0]), &t);
        assert!(p1.contains(1.0) && p1.width() < 1e-15);

        // 0.5^4 + 0.25^2 = 0.125 exactly in binary.
        let q = p_pow_2c(&vec_of(&[0.5, 0.25]), &t);
        assert!(q.contains(0.125) && q.width() < 1e-16);
    }

    #[test]
    fn para_forward_at_origin_and_homogeneous_closed_form() {
        let t = make_type(&[1, 2], 1).unwrap();
        let (x, kappa) = para_forward(&vec_of(&[0.0, 0.0]), &t).unwrap();
        assert!(kappa.contains(1.0), "{kappa:?}");
        assert!(x[0].contains(0.0) && x[1].contains(0.0));

        // Homogeneous n=1: closed form κ = (1 + sqrt(1 + 4y²))/2.
        let t1 = make_type(&[1], 1).unwrap();
        let (x, kappa) = para_forward(&vec_of(&[2.0]), &t1).unwrap();
        let expected = 0.5 * (1.0 + 17.0f64.sqrt());
        assert!(kappa.contains(expected), "{kappa:?} vs {expected}");
        assert!(x[0].contains(2.0 / expected));
    }

    #[test]
    fn para_round_trip_example_one_seed() {
        let t = make_type(&[1, 2], 1).unwrap();
        let y = vec_of(&[-0.1, 0.0001]);
        let (x, kappa) = para_forward(&y, &t).unwrap();
        // Residual check: F_y(κ) must contain zero.
        let p2c = p_pow_2c(&y, &t);
        let res = kappa.powi(4) - kappa.powi(3) - p2c;
        assert!(res.contains(0.0), "{res:?}");
        let p_x = p_functional(&x, &t);
        assert!(p_x.hi() < 1.0);
        let back = para_inverse(&x, &t).unwrap();
        for i in 0..2 {
            assert!(back[i].contains(y[i].mid()), "{:?} vs {:?}", back[i], y[i]);
        }
    }

    #[test]
    fn para_inverse_direct_value_and_horizon_rejection() {
        let t = make_type(&[1, 2], 1).unwrap();
        // p^4 = 0.0625, y = (0.5/0.9375, 0).
        let y = para_inverse(&vec_of(&[0.5, 0.0]), &t).unwrap();
        assert!(y[0].contains(0.5 / 0.9375), "{:?}", y[0]);
        assert!(y[1].contains(0.0));

        assert_eq!(
            para_inverse(&vec_of(&[1.0, 0.0]), &t),
            Err(CompactError::HorizonTouched)
        );
    }

    #[test]
    fn directional_chart_values_and_round_trip() {
        let t = make_type(&[1, 2], 1).unwrap();
        let chart = CompactChart::directional(t.clone(), 0, Sign::Plus).unwrap();

        let (s, x) = dir_forward(&vec_of(&[1.0, 3.0]), &chart).unwrap();
        assert!(s.contains(1.0) && x[0].contains(3.0));

        let (s, x) = dir_forward(&vec_of(&[4.0, 32.0]), &chart).unwrap();
        assert!(s.contains(0.25), "{s:?}");
        assert!(x[0].contains(2.0), "{:?}", x[0]);

        let y = dir_inverse(s, &x, &chart).unwrap();
        assert!(y[0].contains(4.0) && y[1].contains(32.0));

        // Wrong-sign and through-zero inputs are rejected.
        assert!(dir_forward(&vec_of(&[-1.0, 3.0]), &chart).is_err());
        let straddling = IntervalVector::from_vec(vec![
            Interval::new(-0.5, 0.5),
            Interval::point(1.0),
        ]);
        assert!(dir_forward(&straddling, &chart).is_err());
        assert!(dir_inverse(Interval::new(0.0, 0.5), &x, &chart).is_err());
    }

    #[test]
    fn fvks_scale_seed() {
        // Weights (2,2,1,1): chart on coordinate 0, initial value 200
        // gives s = 1/sqrt(200).
        let t = make_type(&[2, 2, 1, 1], 1).unwrap();
        let chart = CompactChart::directional(t, 0, Sign::Plus).unwrap();
        let (s, _) = dir_forward(&vec_of(&[200.0, 1.0, 0.5, 0.25]), &chart).unwrap();
        assert!(s.contains(1.0 / 200.0f64.sqrt()), "{s:?}");
    }
}
