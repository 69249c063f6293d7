//! Equilibrium validation and quadratic Lyapunov certificates.
//!
//! A certificate pins an equilibrium enclosure x*, a positive definite
//! matrix Y, and a box domain on which A(x) = Dg(x)ᵀY + Y Dg(x) is
//! verified negative definite. The derived constants bound the decay of
//! L(x) = (x-x*)ᵀY(x-x*) along the flow and feed the blow-up tail bounds.

use crate::field::{
    rational_to_interval, DesingularizedField, ExactScalar, Scalar, VectorFieldModel,
};
use crate::interval::krawczyk::{krawczyk_system, KrawczykError};
use crate::interval::{
    sym_eig_bounds, verify_negative_definite, Interval, IntervalMatrix, IntervalVector,
};
use nalgebra::{Complex, DMatrix, DVector};

/// Eigenmatrix condition estimate beyond which Y falls back to identity.
const COND_LIMIT: f64 = 1e8;

/// Validation failures around equilibria and their certificates.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LyapunovError {
    /// The root verification did not contract.
    #[error(transparent)]
    Root(#[from] KrawczykError),
    /// The verified enclosure lies strictly beyond the horizon.
    #[error("equilibrium enclosure lies beyond the horizon")]
    BeyondHorizon,
    /// A numerical eigenvalue of the Jacobian has nonnegative real part.
    #[error("numerical spectrum is not stable")]
    SpectrumUnstable,
    /// Candidate Y could not be verified positive definite.
    #[error("Lyapunov matrix is not verifiably positive definite")]
    NotPositiveDefinite,
    /// Every radius in the schedule failed the negative-definiteness check.
    #[error("no radius in the schedule certifies the domain")]
    NoCertifiableRadius,
}

/// A certified Lyapunov domain around a validated equilibrium.
///
/// On the box of half-width `domain_radius` around the enclosure center,
/// every Jacobian member satisfies A(x) ≼ -c_a·I, and the sublevel set
/// {L ≤ eps} fits inside that box.
#[derive(Debug, Clone)]
pub struct LyapunovCert {
    pub x_star: IntervalVector,
    pub y: DMatrix<f64>,
    pub domain_radius: f64,
    pub c_a: Interval,
    pub lam_min_y: Interval,
    pub lam_max_y: Interval,
    /// Enclosure of 1/λ_min(Y): ‖x-x*‖² ≤ c1·L(x) everywhere.
    pub c1: Interval,
    /// Enclosure of c_a·λ_min(Y)/λ_max(Y): dL/dτ ≤ -c_tilde_n·c1·L on the
    /// certified box.
    pub c_tilde_n: Interval,
    /// Largest certified sublevel threshold.
    pub eps: f64,
}

impl LyapunovCert {
    /// Enclosure of L(x) = (x-x*)ᵀY(x-x*).
    pub fn lyap_value(&self, x: &IntervalVector) -> Interval {
        let yi = IntervalMatrix::from_dmatrix(&self.y);
        let d = x.sub(&self.x_star);
        let yd = yi.mul_vec(&d);
        let mut acc = Interval::zero();
        for i in 0..d.dim() {
            acc = acc + d[i] * yd[i];
        }
        acc
    }

    /// Whether the whole box provably sits inside {L ≤ eps}.
    pub fn in_sublevel(&self, x: &IntervalVector) -> bool {
        self.lyap_value(x).hi() <= self.eps
    }
}

/// Verifies a zero of the chart field near `x_approx`: Newton-polishes the
/// seed, then runs the interval verification on a ladder of candidate
/// boxes. In a parabolic chart the result is rejected if it lies strictly
/// beyond the horizon; an enclosure containing a horizon equilibrium
/// always straddles p = 1 and passes.
pub fn validate_equilibrium<M: VectorFieldModel>(
    field: &DesingularizedField<M>,
    x_approx: &[f64],
) -> Result<IntervalVector, LyapunovError> {
    let n = field.dim();
    assert_eq!(x_approx.len(), n, "seed dimension");
    let mut x = DVector::<f64>::from_column_slice(x_approx);
    for _ in 0..60 {
        let xi = IntervalVector::from_points(x.as_slice());
        let g = field.eval_g(&xi);
        let gv = DVector::from_iterator(n, (0..n).map(|i| g[i].mid()));
        let j = field.eval_dg(&xi).mid_dmatrix();
        let Some(step) = j.lu().solve(&gv) else {
            break;
        };
        x -= &step;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(LyapunovError::Root(KrawczykError::Disjoint));
        }
        if step.amax() <= 1e-15 * (1.0 + x.amax()) {
            break;
        }
    }

    let mut last = KrawczykError::NoContraction(0);
    for exp in [-9i32, -7, -5, -3] {
        let r = 10f64.powi(exp);
        let cand = IntervalVector::from_vec(
            x.iter().map(|&c| Interval::point(c) + Interval::new(-r, r)).collect(),
        );
        match krawczyk_system(|v| field.eval_g(v), |v| field.eval_dg(v), &cand) {
            Ok(enc) => {
                let enc = refine_root(field, enc);
                if let crate::compact::ChartKind::QuasiParabolic = field.chart().kind() {
                    let p = crate::compact::p_pow_2c(&enc, field.model().qh_type());
                    if p.lo() > 1.0 {
                        return Err(LyapunovError::BeyondHorizon);
                    }
                }
                return Ok(enc);
            }
            Err(e) => last = e,
        }
    }
    Err(LyapunovError::Root(last))
}

/// Squeezes a verified enclosure toward the few-ulp floor with extra
/// Krawczyk steps. Existence is already proven, and any zero of g in x
/// also lies in K(x) for an arbitrary fixed preconditioner, so pure
/// intersection refinement stays rigorous without a fresh interior test.
///
/// Plain interval evaluation of g(mid) carries rounding of order the
/// enclosure width itself, which stalls the iteration well above one ulp.
/// When every model constant is a point, the residual is instead computed
/// in exact rational arithmetic (floats are dyadic rationals), and the
/// small terms are grouped before the single addition to mid so the final
/// outward rounding strikes once per component.
fn refine_root<M: VectorFieldModel>(
    field: &DesingularizedField<M>,
    enc: IntervalVector,
) -> IntervalVector {
    let n = enc.dim();
    let mut x = enc;
    for _ in 0..3 {
        let mids = x.mid();
        let mid = IntervalVector::from_points(&mids);
        let exact: Vec<ExactScalar> = mids
            .iter()
            .map(|&m| ExactScalar::from_interval(Interval::point(m)))
            .collect();
        let gm_exact = field.eval_g_generic(&exact);
        let gm = if gm_exact.iter().all(|c| c.value().is_some()) {
            IntervalVector::from_vec(
                gm_exact
                    .iter()
                    .map(|c| rational_to_interval(c.value().expect("checked")))
                    .collect(),
            )
        } else {
            field.eval_g(&mid)
        };
        let j = field.eval_dg(&x);
        let Some(rm) = j.mid_dmatrix().lu().try_inverse() else {
            return x;
        };
        let r = IntervalMatrix::from_dmatrix(&rm);
        let lin = IntervalMatrix::identity(n).sub(&r.mul_mat(&j));
        let small = lin.mul_vec(&x.sub(&mid)).sub(&r.mul_vec(&gm));
        let k = mid.add(&small);
        let mut next = x.clone();
        let mut shrunk = false;
        for i in 0..n {
            let Some(cap) = k[i].intersect(&x[i]) else {
                return x;
            };
            if cap.width() < next[i].width() {
                shrunk = true;
            }
            next[i] = cap;
        }
        if !shrunk {
            return x;
        }
        x = next;
    }
    x
}

/// Builds the Lyapunov matrix Y = Re(X⁻ᴴX⁻¹) from an approximate complex
/// eigenmatrix X of `j`, falling back to the identity when X is too ill
/// conditioned to invert meaningfully (a rotation to Schur form would make
/// the same choice, since Q Qᵀ = I).
///
/// Errors when the numerical spectrum has an eigenvalue with nonnegative
/// real part: no quadratic Lyapunov function exists then.
pub fn build_y(j: &DMatrix<f64>) -> Result<DMatrix<f64>, LyapunovError> {
    let n = j.nrows();
    assert_eq!(n, j.ncols(), "square Jacobian");
    let eigs = j.complex_eigenvalues();
    if eigs.iter().any(|l| l.re >= 0.0) {
        return Err(LyapunovError::SpectrumUnstable);
    }
    let jc: DMatrix<Complex<f64>> = j.map(|v| Complex::new(v, 0.0));
    let scale = j.amax().max(1.0);

    let mut x = DMatrix::<Complex<f64>>::zeros(n, n);
    'columns: for (k, lam) in eigs.iter().enumerate() {
        // Inverse iteration with a slightly off-axis shift; enlarging the
        // jitter retires exactly singular shifts.
        let mut jitter = 1e-12 * scale;
        for _ in 0..6 {
            let shift = lam + Complex::new(jitter, jitter);
            let shifted = &jc - DMatrix::from_diagonal_element(n, n, shift);
            let lu = shifted.lu();
            let mut v = DVector::<Complex<f64>>::zeros(n);
            v[k] = Complex::new(1.0, 0.0);
            let mut ok = true;
            for _ in 0..4 {
                match lu.solve(&v) {
                    Some(w) => {
                        let norm = w.norm();
                        if !(norm.is_finite() && norm > 0.0) {
                            ok = false;
                            break;
                        }
                        v = w / Complex::new(norm, 0.0);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                x.set_column(k, &v);
                continue 'columns;
            }
            jitter *= 100.0;
        }
        return Ok(DMatrix::identity(n, n));
    }

    let Some(xi) = x.clone().lu().try_inverse() else {
        return Ok(DMatrix::identity(n, n));
    };
    let row_sum = |m: &DMatrix<Complex<f64>>| {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j2| m[(i, j2)].norm()).sum::<f64>())
            .fold(0.0f64, f64::max)
    };
    let cond = row_sum(&x) * row_sum(&xi);
    if !cond.is_finite() || cond > COND_LIMIT {
        return Ok(DMatrix::identity(n, n));
    }
    let y_c = xi.adjoint() * &xi;
    let y_re = y_c.map(|c| c.re);
    let y = 0.5 * (&y_re + y_re.transpose());
    if y.iter().all(|v| v.is_finite()) {
        Ok(y)
    } else {
        Ok(DMatrix::identity(n, n))
    }
}

/// The geometric radius ladder 0.1·2⁻ᵐ, m = 0..40, largest first.
pub fn default_radius_schedule() -> Vec<f64> {
    (0..=40).map(|m| 0.1 * 2f64.powi(-m)).collect()
}

/// Certifies the largest box in the schedule on which A(x) is negative
/// definite, and derives every constant the tail bounds consume. The
/// schedule is tried in order; the first certifying radius wins.
pub fn certify_domain<M: VectorFieldModel>(
    field: &DesingularizedField<M>,
    x_star: &IntervalVector,
    y: &DMatrix<f64>,
    schedule: &[f64],
) -> Result<LyapunovCert, LyapunovError> {
    let n = field.dim();
    assert_eq!(x_star.dim(), n, "equilibrium dimension");
    assert_eq!(y.nrows(), n, "Y dimension");
    let y_sym = 0.5 * (y + y.transpose());
    let yi = IntervalMatrix::from_dmatrix(&y_sym);
    let (lam_min_y, lam_max_y) = sym_eig_bounds(&yi);
    if !(lam_min_y.lo() > 0.0) {
        return Err(LyapunovError::NotPositiveDefinite);
    }
    let c1 = lam_min_y.recip().expect("positive lower eigenvalue");
    let center = x_star.mid();
    let delta = (0..n).map(|i| x_star[i].rad()).fold(0.0f64, f64::max);

    for &r in schedule {
        if !(r.is_finite() && r > delta) {
            continue;
        }
        // Outward box: a superset of the nominal radius-r box, so the
        // negative-definiteness verdict covers it.
        let nbox = IntervalVector::from_vec(
            center
                .iter()
                .map(|&c| Interval::point(c) + Interval::new(-r, r))
                .collect(),
        );
        let dg = field.eval_dg(&nbox);
        let a = dg.transpose().mul_mat(&yi).add(&yi.mul_mat(&dg));
        let (ok, c_a) = verify_negative_definite(&a);
        if !ok {
            continue;
        }
        let c_tilde_n = c_a * lam_min_y / lam_max_y;
        // Sublevel fit: ‖x-x*‖ ≤ sqrt(eps/λ_min) ≤ r - delta keeps
        // {L ≤ eps} inside the box despite the enclosure offset.
        let eps = (lam_min_y.lo() * (r - delta) * (r - delta)).next_down();
        return Ok(LyapunovCert {
            x_star: x_star.clone(),
            y: y_sym,
            domain_radius: r,
            c_a,
            lam_min_y,
            lam_max_y,
            c1,
            c_tilde_n,
            eps,
        });
    }
    Err(LyapunovError::NoCertifiableRadius)
}
