//! Krawczyk interval-Newton verification for scalar equations and small
//! systems: proves existence and uniqueness of a zero inside a candidate
//! enclosure, then squeezes the enclosure tight.

use super::linalg::{IntervalMatrix, IntervalVector};
use super::Interval;

/// Why a Krawczyk verification gave up.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum KrawczykError {
    #[error("no contraction after {0} refinement rounds")]
    NoContraction(usize),
    #[error("derivative enclosure contains zero; candidate too wide")]
    SingularDerivative,
    #[error("Krawczyk image disjoint from candidate: no zero inside")]
    Disjoint,
}

const MAX_ROUNDS: usize = 50;
const TARGET_REL_WIDTH: f64 = 1e-16;

/// Verifies a unique zero of `f` inside (an inflation of) `x0`.
///
/// On success the returned interval contains exactly one zero of `f`, and
/// has been refined to relative width `<= 1e-14` where contraction allows.
/// The budget is 50 inflation/refinement rounds.
pub fn krawczyk_scalar(
    f: impl Fn(Interval) -> Interval,
    df: impl Fn(Interval) -> Interval,
    x0: Interval,
) -> Result<Interval, KrawczykError> {
    let mut x = x0;
    let mut proven = false;
    let mut shrunk = false;
    for _ in 0..MAX_ROUNDS {
        let m = Interval::point(x.mid());
        let d = df(x);
        // Precondition with the midpoint derivative, not the enclosure
        // midpoint: tighter when the enclosure is wide.
        let dm = df(m).mid();
        if dm == 0.0 {
            return Err(KrawczykError::SingularDerivative);
        }
        let r = Interval::point(1.0 / dm);
        // K = m - r*f(m) + (1 - r*d)*(x - m)
        let k = m - r * f(m) + (Interval::one() - r * d) * (x - m);
        if x.contains_in_interior(&k) {
            proven = true;
            let next = k.intersect(&x).expect("interior image intersects");
            let done = next.width() <= TARGET_REL_WIDTH * next.mag().max(1.0);
            let stalled = next.width() >= x.width();
            x = next;
            if done || stalled {
                return Ok(x);
            }
        } else if proven {
            // Already proven on an earlier round; return the last enclosure.
            return Ok(x);
        } else {
            match k.intersect(&x) {
                Some(cap) if cap.width() < 0.9 * x.width() => {
                    // Genuine contraction even without interior containment;
                    // the zero (if any) stays inside the intersection.
                    x = cap;
                }
                Some(cap) => {
                    // Stall: the derivative enclosure is too loose on this
                    // width. Re-center on a float Newton estimate and retry
                    // on a half-width candidate. The eventual success claim
                    // is unaffected: a contraction proof on the shrunk
                    // candidate still certifies its unique zero.
                    x = recenter_shrink(&f, &df, cap);
                    shrunk = true;
                }
                None if shrunk => return Err(KrawczykError::NoContraction(MAX_ROUNDS)),
                None => return Err(KrawczykError::Disjoint),
            }
        }
    }
    if proven {
        Ok(x)
    } else {
        Err(KrawczykError::NoContraction(MAX_ROUNDS))
    }
}

/// Halves a stalled candidate around a float Newton estimate of the zero.
fn recenter_shrink(
    f: &impl Fn(Interval) -> Interval,
    df: &impl Fn(Interval) -> Interval,
    cap: Interval,
) -> Interval {
    let mut c = cap.mid();
    for _ in 0..20 {
        let fv = f(Interval::point(c)).mid();
        let dv = df(Interval::point(c)).mid();
        if dv == 0.0 || !fv.is_finite() {
            break;
        }
        let next = c - fv / dv;
        if !next.is_finite() || (next - c).abs() <= 1e-16 * c.abs().max(1.0) {
            break;
        }
        c = next;
    }
    if !cap.contains(c) {
        c = cap.mid();
    }
    let h = 0.25 * cap.width();
    Interval::new(c - h, c + h)
        .intersect(&cap)
        .unwrap_or(cap)
        .widen_ulp()
}

/// System Krawczyk: verifies a unique zero of `g` inside (a refinement of)
/// the candidate box `x0`.
///
/// `g` evaluates the map on an interval box; `jac` evaluates its Jacobian
/// enclosure on a box. Progress mirrors the scalar operator with the
/// preconditioner R = mid(J)⁻¹.
pub fn krawczyk_system(
    g: impl Fn(&IntervalVector) -> IntervalVector,
    jac: impl Fn(&IntervalVector) -> IntervalMatrix,
    x0: &IntervalVector,
) -> Result<IntervalVector, KrawczykError> {
    let n = x0.dim();
    let mut x = x0.clone();
    let mut proven = false;
    for _ in 0..MAX_ROUNDS {
        let mid = IntervalVector::from_points(&x.mid());
        let j = jac(&x);
        let r = match j.mid_dmatrix().lu().try_inverse() {
            Some(r) => IntervalMatrix::from_dmatrix(&r),
            None => return Err(KrawczykError::SingularDerivative),
        };
        // K = mid - R g(mid) + (I - R J)(x - mid)
        let lin = IntervalMatrix::identity(n).sub(&r.mul_mat(&j));
        let k = mid
            .sub(&r.mul_vec(&g(&mid)))
            .add(&lin.mul_vec(&x.sub(&mid)));
        if x.contains_in_interior(&k) {
            proven = true;
            let mut next = IntervalVector::zeros(n);
            for i in 0..n {
                next[i] = k[i].intersect(&x[i]).expect("interior image intersects");
            }
            let done = next.max_width() <= TARGET_REL_WIDTH;
            let stalled = next.max_width() >= x.max_width();
            x = next;
            if done || stalled {
                return Ok(x);
            }
        } else if proven {
            return Ok(x);
        } else {
            let mut cap = IntervalVector::zeros(n);
            for i in 0..n {
                match k[i].intersect(&x[i]) {
                    Some(c) => cap[i] = c,
                    None => return Err(KrawczykError::Disjoint),
                }
            }
            x = cap.inflate(1e-3 * cap.max_width() + 1e-300).widen_ulp();
        }
    }
    if proven {
        Ok(x)
    } else {
        Err(KrawczykError::NoContraction(MAX_ROUNDS))
    }
}

#[cfg(test)]
mod unit {
    use super::*;

    #[test]
    fn shifted_identity_root() {
        let r = krawczyk_scalar(
            |x| x - Interval::one(),
            |_| Interval::one(),
            Interval::new(0.5, 1.5),
        )
        .unwrap();
        assert!(r.contains(1.0));
        assert!(r.width() < 1e-12);
    }

    #[test]
    fn homogeneous_kappa_quadratic() {
        // kappa^2 - kappa - 4 = 0 in [2,3]: root (1+sqrt(17))/2.
        let root = 0.5 * (1.0 + 17.0f64.sqrt());
        let r = krawczyk_scalar(
            |x| x.powi(2) - x - Interval::point(4.0),
            |x| Interval::point(2.0) * x - Interval::one(),
            Interval::new(2.0, 3.0),
        )
        .unwrap();
        assert!(r.contains(root), "{r:?} vs {root}");
        assert!(r.width() < 1e-12);
    }

    #[test]
    fn quartic_horizon_identity_root() {
        // kappa^4 - kappa^3 - p^4 with p = 0: root 1.
        let r = krawczyk_scalar(
            |x| x.powi(4) - x.powi(3),
            |x| Interval::point(4.0) * x.powi(3) - Interval::point(3.0) * x.powi(2),
            Interval::new(0.9, 1.1),
        )
        .unwrap();
        assert!(r.contains(1.0));
    }

    #[test]
    fn two_dim_system_root() {
        // g(x, y) = (x^2 + y - 3, x - y) has a zero at the golden-ratio-like
        // point x = y, x^2 + x - 3 = 0.
        let root = 0.5 * (-1.0 + 13.0f64.sqrt());
        let g = |v: &IntervalVector| {
            IntervalVector::from_vec(vec![
                v[0].powi(2) + v[1] - Interval::point(3.0),
                v[0] - v[1],
            ])
        };
        let jac = |v: &IntervalVector| {
            IntervalMatrix::from_rows(vec![
                vec![Interval::point(2.0) * v[0], Interval::one()],
                vec![Interval::one(), -Interval::one()],
            ])
        };
        let x0 = IntervalVector::from_vec(vec![
            Interval::new(1.0, 1.8),
            Interval::new(1.0, 1.8),
        ]);
        let r = krawczyk_system(g, jac, &x0).unwrap();
        assert!(r[0].contains(root) && r[1].contains(root));
        assert!(r.max_width() < 1e-12);
    }
}
