//! Interval arithmetic kernel with directed rounding.
//!
//! Rounding strategy (documented per the containment contract):
//! * `+`, `-`, `*` use error-free transforms (2Sum, FMA residual) to decide
//!   the rounding direction exactly; bounds are optimal (tightest
//!   representable) whenever the FMA residual is itself exact, which holds
//!   for all normal-range results. Results in the subnormal range fall back
//!   to a one-ulp outward nudge, which the half-ulp error bound of
//!   round-to-nearest always covers.
//! * `/`, `sqrt`, and `nth_root` use a one-ulp outward nudge of the
//!   round-to-nearest result, again covered by the half-ulp bound.
//!
//! Division by an interval containing zero is an error by design: no formula
//! in this crate requires extended division.

mod decimal;
pub mod krawczyk;
pub mod linalg;

pub use decimal::{fmt_outward, parse_outward, Direction};
pub use krawczyk::{krawczyk_scalar, krawczyk_system, KrawczykError};
pub use linalg::{sym_eig_bounds, verify_negative_definite, IntervalMatrix, IntervalVector};

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Closed real interval `[lo, hi]` with outward-rounded arithmetic.
///
/// Invariant: `lo <= hi` and both bounds are non-NaN. The exact real result
/// of an operation on member points is contained in the result interval.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// Violations of interval preconditions.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("invalid interval bounds: lo={lo}, hi={hi}")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("even root of an interval with negative lower bound {lo}")]
    NegativeRoot { lo: f64 },
}

// Directed-rounding scalar kernels.

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    // Knuth 2Sum residual; exact for all finite inputs when s is finite.
    let ap = s - b;
    let bp = s - ap;
    (a - ap) + (b - bp)
}

#[inline]
pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s == f64::INFINITY {
        return f64::MAX;
    }
    if s == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let e = two_sum_err(a, b, s);
    if e < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s == f64::INFINITY {
        return f64::INFINITY;
    }
    if s == f64::NEG_INFINITY {
        return f64::MIN;
    }
    let e = two_sum_err(a, b, s);
    if e > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub(crate) fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

// Below this magnitude the FMA residual of a product may be inexact
// (subnormal); treat a zero residual as "direction unknown" there.
const MUL_EXACT_FLOOR: f64 = 1e-290;

#[inline]
pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p == f64::INFINITY {
        return f64::MAX;
    }
    if p == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let e = a.mul_add(b, -p);
    if e < 0.0 || (e == 0.0 && p.abs() < MUL_EXACT_FLOOR) {
        p.next_down()
    } else {
        p
    }
}

#[inline]
pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p == f64::INFINITY {
        return f64::INFINITY;
    }
    if p == f64::NEG_INFINITY {
        return f64::MIN;
    }
    let e = a.mul_add(b, -p);
    if e > 0.0 || (e == 0.0 && p.abs() < MUL_EXACT_FLOOR) {
        p.next_up()
    } else {
        p
    }
}

#[inline]
pub(crate) fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q == f64::INFINITY {
        return f64::MAX;
    }
    if q == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if a.abs() < MUL_EXACT_FLOOR || q.abs() < MUL_EXACT_FLOOR {
        return q.next_down();
    }
    // Residual qb − a is exactly representable in the guarded range; its
    // sign against b locates the true quotient relative to q.
    let e = q.mul_add(b, -a);
    if e == 0.0 || (e > 0.0) != (b > 0.0) {
        q
    } else {
        q.next_down()
    }
}

#[inline]
pub(crate) fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q == f64::INFINITY {
        return f64::INFINITY;
    }
    if q == f64::NEG_INFINITY {
        return f64::MIN;
    }
    if a.abs() < MUL_EXACT_FLOOR || q.abs() < MUL_EXACT_FLOOR {
        return q.next_up();
    }
    let e = q.mul_add(b, -a);
    if e == 0.0 || (e > 0.0) == (b > 0.0) {
        q
    } else {
        q.next_up()
    }
}

#[inline]
fn sqrt_down(a: f64) -> f64 {
    debug_assert!(a >= 0.0);
    if a == 0.0 {
        return 0.0;
    }
    let s = a.sqrt();
    // sqrt is correctly rounded; residual sign recovers exactness.
    let e = s.mul_add(s, -a);
    if e > 0.0 || (e == 0.0 && a < MUL_EXACT_FLOOR) {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn sqrt_up(a: f64) -> f64 {
    debug_assert!(a >= 0.0);
    if a == 0.0 {
        return 0.0;
    }
    let s = a.sqrt();
    let e = s.mul_add(s, -a);
    if e < 0.0 || (e == 0.0 && a < MUL_EXACT_FLOOR) {
        s.next_up()
    } else {
        s
    }
}

/// `v^n` rounded toward -inf, for `v >= 0`.
fn pow_nn_down(v: f64, n: u32) -> f64 {
    debug_assert!(v >= 0.0);
    let mut acc = 1.0;
    for _ in 0..n {
        acc = mul_down(acc, v);
    }
    acc
}

/// `v^n` rounded toward +inf, for `v >= 0`.
fn pow_nn_up(v: f64, n: u32) -> f64 {
    debug_assert!(v >= 0.0);
    let mut acc = 1.0;
    for _ in 0..n {
        acc = mul_up(acc, v);
    }
    acc
}

impl Interval {
    /// Constructs `[lo, hi]`; panics on `lo > hi` or NaN.
    #[inline]
    pub fn new(lo: f64, hi: f64) -> Self {
        Self::try_new(lo, hi).expect("interval bounds")
    }

    /// Fallible constructor.
    #[inline]
    pub fn try_new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(IntervalError::InvalidBounds { lo, hi })
        }
    }

    /// Point interval `[v, v]`.
    #[inline]
    pub fn point(v: f64) -> Self {
        Self::new(v, v)
    }

    #[inline]
    pub fn zero() -> Self {
        Self { lo: 0.0, hi: 0.0 }
    }

    #[inline]
    pub fn one() -> Self {
        Self { lo: 1.0, hi: 1.0 }
    }

    /// Enclosure of the whole finite line (used as an a-priori fallback).
    #[inline]
    pub fn entire() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        // Midpoint clamped into the interval; safe against overflow and
        // opposite-infinity bounds.
        let m = 0.5 * self.lo + 0.5 * self.hi;
        if m.is_nan() {
            return 0.0;
        }
        m.clamp(self.lo, self.hi)
    }

    #[inline]
    pub fn width(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// Radius: half-width, rounded up.
    #[inline]
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        sub_up(self.hi, m).max(sub_up(m, self.lo))
    }

    /// Magnitude: max |v| over members.
    #[inline]
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Mignitude: min |v| over members (0 if the interval contains 0).
    #[inline]
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    #[inline]
    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Strict interior containment (both inequalities strict).
    #[inline]
    pub fn contains_in_interior(&self, other: &Interval) -> bool {
        self.lo < other.lo && other.hi < self.hi
    }

    #[inline]
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    #[inline]
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Outward one-ulp widening.
    #[inline]
    pub fn widen_ulp(&self) -> Interval {
        Interval {
            lo: self.lo.next_down(),
            hi: self.hi.next_up(),
        }
    }

    /// Symmetric absolute inflation by `r >= 0`.
    #[inline]
    pub fn inflate(&self, r: f64) -> Interval {
        debug_assert!(r >= 0.0);
        Interval {
            lo: sub_down(self.lo, r),
            hi: add_up(self.hi, r),
        }
    }

    /// `self^n` with tight even-power handling: even powers of
    /// sign-spanning intervals have lower bound 0.
    pub fn powi(&self, n: u32) -> Interval {
        match n {
            0 => Interval::one(),
            1 => *self,
            _ => {
                let even = n % 2 == 0;
                if self.lo >= 0.0 {
                    Interval {
                        lo: pow_nn_down(self.lo, n),
                        hi: pow_nn_up(self.hi, n),
                    }
                } else if self.hi <= 0.0 {
                    let (al, ah) = (-self.hi, -self.lo);
                    if even {
                        Interval {
                            lo: pow_nn_down(al, n),
                            hi: pow_nn_up(ah, n),
                        }
                    } else {
                        Interval {
                            lo: -pow_nn_up(ah, n),
                            hi: -pow_nn_down(al, n),
                        }
                    }
                } else if even {
                    Interval {
                        lo: 0.0,
                        hi: pow_nn_up(self.mag(), n),
                    }
                } else {
                    Interval {
                        lo: -pow_nn_up(-self.lo, n),
                        hi: pow_nn_up(self.hi, n),
                    }
                }
            }
        }
    }

    /// Square root; requires `lo >= 0`.
    pub fn sqrt(&self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::NegativeRoot { lo: self.lo });
        }
        Ok(Interval {
            lo: sqrt_down(self.lo),
            hi: sqrt_up(self.hi),
        })
    }

    /// `n`-th root. Even `n` requires `lo >= 0`; odd `n` is defined on the
    /// whole line. Bounds are verified by directed powers of the candidate.
    pub fn nth_root(&self, n: u32) -> Result<Interval, IntervalError> {
        assert!(n >= 1, "root order must be >= 1");
        if n == 1 {
            return Ok(*self);
        }
        if n == 2 {
            return self.sqrt();
        }
        let even = n % 2 == 0;
        if even && self.lo < 0.0 {
            return Err(IntervalError::NegativeRoot { lo: self.lo });
        }
        Ok(Interval {
            lo: nth_root_scalar(self.lo, n, false),
            hi: nth_root_scalar(self.hi, n, true),
        })
    }

    /// Checked division; `None` when `rhs` contains zero.
    pub fn checked_div(&self, rhs: &Interval) -> Option<Interval> {
        if rhs.contains(0.0) {
            return None;
        }
        let (a, b) = (self, rhs);
        let lo;
        let hi;
        if b.lo > 0.0 {
            lo = if a.lo >= 0.0 {
                div_down(a.lo, b.hi)
            } else {
                div_down(a.lo, b.lo)
            };
            hi = if a.hi >= 0.0 {
                div_up(a.hi, b.lo)
            } else {
                div_up(a.hi, b.hi)
            };
        } else {
            lo = if a.hi >= 0.0 {
                div_down(a.hi, b.hi)
            } else {
                div_down(a.hi, b.lo)
            };
            hi = if a.lo >= 0.0 {
                div_up(a.lo, b.lo)
            } else {
                div_up(a.lo, b.hi)
            };
        }
        Some(Interval { lo, hi })
    }

    /// Reciprocal; `None` when the interval contains zero.
    pub fn recip(&self) -> Option<Interval> {
        Interval::one().checked_div(self)
    }
}

/// Verified scalar n-th root: round-to-nearest guess nudged until the
/// directed power brackets `v` from the requested side.
fn nth_root_scalar(v: f64, n: u32, upper: bool) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let neg = v < 0.0;
    debug_assert!(!neg || n % 2 == 1);
    let a = v.abs();
    let mut r = a.powf(1.0 / n as f64);
    if !r.is_finite() {
        r = a.ln().mul_add(1.0 / n as f64, 0.0).exp();
    }
    // For |v|: lower bound needs r^n <= a certified by upward power;
    // upper bound needs r^n >= a certified by downward power.
    let want_lower = upper == neg;
    if want_lower {
        let mut k = 0;
        while pow_nn_up(r, n) > a {
            r = r.next_down();
            k += 1;
            assert!(k < 64, "nth_root bracket failure");
        }
    } else {
        let mut k = 0;
        while pow_nn_down(r, n) < a {
            r = r.next_up();
            k += 1;
            assert!(k < 64, "nth_root bracket failure");
        }
    }
    if neg {
        -r
    } else {
        r
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: sub_down(self.lo, rhs.hi),
            hi: sub_up(self.hi, rhs.lo),
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b) = (self, rhs);
        // Sign-class split; the mixed/mixed case needs two candidates per bound.
        if a.lo >= 0.0 {
            if b.lo >= 0.0 {
                Interval {
                    lo: mul_down(a.lo, b.lo),
                    hi: mul_up(a.hi, b.hi),
                }
            } else if b.hi <= 0.0 {
                Interval {
                    lo: mul_down(a.hi, b.lo),
                    hi: mul_up(a.lo, b.hi),
                }
            } else {
                Interval {
                    lo: mul_down(a.hi, b.lo),
                    hi: mul_up(a.hi, b.hi),
                }
            }
        } else if a.hi <= 0.0 {
            if b.lo >= 0.0 {
                Interval {
                    lo: mul_down(a.lo, b.hi),
                    hi: mul_up(a.hi, b.lo),
                }
            } else if b.hi <= 0.0 {
                Interval {
                    lo: mul_down(a.hi, b.hi),
                    hi: mul_up(a.lo, b.lo),
                }
            } else {
                Interval {
                    lo: mul_down(a.lo, b.hi),
                    hi: mul_up(a.lo, b.lo),
                }
            }
        } else if b.lo >= 0.0 {
            Interval {
                lo: mul_down(a.lo, b.hi),
                hi: mul_up(a.hi, b.hi),
            }
        } else if b.hi <= 0.0 {
            Interval {
                lo: mul_down(a.hi, b.lo),
                hi: mul_up(a.lo, b.lo),
            }
        } else {
            Interval {
                lo: mul_down(a.lo, b.hi).min(mul_down(a.hi, b.lo)),
                hi: mul_up(a.lo, b.lo).max(mul_up(a.hi, b.hi)),
            }
        }
    }
}

impl Div for Interval {
    type Output = Interval;
    /// Panics when `rhs` contains zero; use [`Interval::checked_div`] where
    /// the divisor is data-dependent.
    fn div(self, rhs: Interval) -> Interval {
        self.checked_div(&rhs)
            .unwrap_or_else(|| panic!("{}", IntervalError::DivisionByZero))
    }
}

impl From<f64> for Interval {
    fn from(v: f64) -> Self {
        Interval::point(v)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Integer power as a free function, mirroring the operation catalog.
pub fn pow_int(x: Interval, n: u32) -> Interval {
    x.powi(n)
}

#[cfg(test)]
mod unit {
    use super::*;

    #[test]
    fn directed_add_brackets_exact_sum() {
        let a = 0.1;
        let b = 0.2;
        let lo = add_down(a, b);
        let hi = add_up(a, b);
        assert!(lo <= 0.1 + 0.2 && 0.1 + 0.2 <= hi);
        assert!(hi - lo <= f64::EPSILON);
    }

    #[test]
    fn even_power_of_mixed_sign_is_nonnegative() {
        let x = Interval::new(-1.0, 2.0);
        let p = x.powi(2);
        assert_eq!(p.lo(), 0.0);
        assert!(p.hi() >= 4.0);
        assert!(p.hi() <= 4.0 + 1e-14);
    }

    #[test]
    fn construction_rejects_inverted_bounds() {
        assert!(Interval::try_new(1.0, 0.0).is_err());
        assert!(Interval::try_new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn division_by_zero_containing_is_error() {
        let a = Interval::new(1.0, 2.0);
        assert!(a.checked_div(&Interval::new(-1.0, 1.0)).is_none());
        assert!(a.checked_div(&Interval::new(0.0, 1.0)).is_none());
        assert!(a.checked_div(&Interval::new(1.0, 2.0)).is_some());
    }
}
