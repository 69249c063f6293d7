//! Validated integration of chart flows in τ-time.
//!
//! The integrator is an interval Taylor method: per step it
//!
//! 1. finds an a-priori enclosure of the flow over the whole step by a
//!    Picard contraction test,
//! 2. expands the solution to fixed order at the set's midpoint, with the
//!    Lagrange remainder coefficient evaluated on the a-priori enclosure,
//! 3. transports the set's deviation through the step with a mean-value
//!    Jacobian enclosure, re-orthogonalizing the deviation frame by QR to
//!    keep wrapping in check.
//!
//! The physical time t = ∫ dt/dτ dτ rides along as one extra state
//! coordinate of [`WithTime`], so it enjoys the same high-order enclosure
//! as the state; [`accumulate_time`] provides the coarser per-step
//! rectangle bound used as an independent cross-check.

use crate::field::{DesingularizedField, DualV, Scalar, VectorFieldModel};
use crate::interval::linalg::verified_inverse;
use crate::interval::{Interval, IntervalMatrix, IntervalVector};
use nalgebra::DMatrix;
use std::ops::{Add, Mul, Neg, Sub};

/// Taylor expansion order: terms 0..ORDER−1 from the midpoint, Lagrange
/// remainder at index ORDER from the a-priori enclosure.
const ORDER: usize = 14;
/// Smallest accepted step; falling below aborts the trajectory.
const H_MIN: f64 = 1e-12;
/// Largest step attempted by the drivers.
const H_MAX: f64 = 0.75;

/// Why an integration could not be completed.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("step size underflow at tau = {tau:.6}: enclosure cannot be continued")]
    StepUnderflow { tau: f64 },
    #[error("stop predicate not reached by tau_max = {tau_max}")]
    TauMaxExceeded { tau_max: f64 },
}

/// Right-hand side evaluatable over any [`Scalar`] carrier.
///
/// [`DesingularizedField`] implements this; test systems implement it
/// directly.
pub trait OdeRhs {
    fn dim(&self) -> usize;

    fn eval_rhs<S: Scalar>(&self, z: &[S]) -> Vec<S>;

    /// Index of the accumulated-time coordinate, if the system carries one.
    fn time_coordinate(&self) -> Option<usize> {
        None
    }
}

impl<M: VectorFieldModel> OdeRhs for DesingularizedField<M> {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn eval_rhs<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        self.eval_g_generic(z)
    }
}

/// A chart field augmented with the time integrand: state (x, t),
/// velocity (g(x), dt/dτ(x)).
pub struct WithTime<'a, M>(pub &'a DesingularizedField<M>);

impl<M: VectorFieldModel> OdeRhs for WithTime<'_, M> {
    fn dim(&self) -> usize {
        self.0.dim() + 1
    }

    fn eval_rhs<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        let x = &z[..self.0.dim()];
        let mut v = self.0.eval_g_generic(x);
        v.push(self.0.dt_dtau_generic(x));
        v
    }

    fn time_coordinate(&self) -> Option<usize> {
        Some(self.0.dim())
    }
}

/// One accepted integration step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// τ span [τ_k, τ_k + h] of the step.
    pub tau: Interval,
    /// A-priori enclosure of the flow over the whole span (time coordinate
    /// stripped).
    pub state_box: IntervalVector,
    /// Tightened enclosure at the right endpoint (time coordinate
    /// stripped).
    pub tight_endpoint: IntervalVector,
    /// Enclosure of accumulated t at the right endpoint (zero width zero
    /// for systems without a time coordinate).
    pub t_at_end: Interval,
    /// Accepted step size.
    pub h: f64,
}

/// A completed validated trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryEnclosure {
    pub steps: Vec<StepRecord>,
    /// Enclosure of ∫₀^{τ_end} dt/dτ dτ (zero for systems without a time
    /// coordinate).
    pub t_elapsed: Interval,
    pub tau_end: f64,
    /// Final tightened state (time coordinate stripped).
    pub endpoint: IntervalVector,
}

// ---------------------------------------------------------------------------
// Taylor series scalar

/// Truncated τ-power series with interval coefficients; the carrier that
/// turns a polynomial right-hand side into solution jets.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorSeries {
    c: Vec<Interval>,
    /// Maximum retained coefficient count; constants carry no cap.
    cap: usize,
}

impl TaylorSeries {
    /// Seed series (single coefficient) retaining `cap` coefficients.
    pub fn seed(v: Interval, cap: usize) -> Self {
        TaylorSeries { c: vec![v], cap }
    }

    pub fn coeff(&self, j: usize) -> Interval {
        self.c.get(j).copied().unwrap_or_else(Interval::zero)
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    fn push(&mut self, v: Interval) {
        debug_assert!(self.c.len() < self.cap, "series overflows its cap");
        self.c.push(v);
    }

    /// Polynomial value at `h` by Horner evaluation over intervals, using
    /// coefficients 0..limit.
    pub fn eval_poly(&self, h: Interval, limit: usize) -> Interval {
        let top = limit.min(self.c.len());
        if top == 0 {
            return Interval::zero();
        }
        let mut acc = self.c[top - 1];
        for j in (0..top - 1).rev() {
            acc = acc * h + self.c[j];
        }
        acc
    }
}

impl Add for TaylorSeries {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let cap = self.cap.min(rhs.cap);
        let n = self.c.len().max(rhs.c.len()).min(cap);
        let c = (0..n).map(|j| self.coeff(j) + rhs.coeff(j)).collect();
        TaylorSeries { c, cap }
    }
}

impl Sub for TaylorSeries {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let cap = self.cap.min(rhs.cap);
        let n = self.c.len().max(rhs.c.len()).min(cap);
        let c = (0..n).map(|j| self.coeff(j) - rhs.coeff(j)).collect();
        TaylorSeries { c, cap }
    }
}

impl Mul for TaylorSeries {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let cap = self.cap.min(rhs.cap);
        if self.c.is_empty() || rhs.c.is_empty() {
            return TaylorSeries { c: Vec::new(), cap };
        }
        let n = (self.c.len() + rhs.c.len() - 1).min(cap);
        let mut c = vec![Interval::zero(); n];
        for (i, a) in self.c.iter().enumerate() {
            if i >= n {
                break;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                c[i + j] = c[i + j] + *a * *b;
            }
        }
        TaylorSeries { c, cap }
    }
}

impl Neg for TaylorSeries {
    type Output = Self;
    fn neg(self) -> Self {
        TaylorSeries {
            c: self.c.into_iter().map(|v| -v).collect(),
            cap: self.cap,
        }
    }
}

impl Scalar for TaylorSeries {
    fn from_interval(v: Interval) -> Self {
        TaylorSeries {
            c: vec![v],
            cap: usize::MAX,
        }
    }

    fn zero() -> Self {
        TaylorSeries {
            c: Vec::new(),
            cap: usize::MAX,
        }
    }

    fn one() -> Self {
        Self::from_interval(Interval::one())
    }
}

// ---------------------------------------------------------------------------
// Solution jets

fn inv_factor(j: usize) -> Interval {
    Interval::one() / Interval::point((j + 1) as f64)
}

/// Solution Taylor coefficients through `x0` (componentwise series with
/// coefficients 0..=order).
fn point_jet<R: OdeRhs>(rhs: &R, x0: &[Interval], order: usize) -> Vec<TaylorSeries> {
    let n = rhs.dim();
    let mut s: Vec<TaylorSeries> = x0
        .iter()
        .map(|&v| TaylorSeries::seed(v, order + 1))
        .collect();
    for j in 0..order {
        let gs = rhs.eval_rhs(&s);
        let inv = inv_factor(j);
        for i in 0..n {
            let c = gs[i].coeff(j) * inv;
            s[i].push(c);
        }
    }
    s
}

/// Solution jets seeded on a box, with first-variation jets alongside:
/// value series give the Lagrange coefficient over the box, gradient
/// series the Jacobian coefficient matrices.
fn dual_jet<R: OdeRhs>(rhs: &R, x0: &IntervalVector, order: usize) -> Vec<DualV<TaylorSeries>> {
    let n = rhs.dim();
    let mut s: Vec<DualV<TaylorSeries>> = (0..n)
        .map(|i| {
            let mut d = vec![TaylorSeries::seed(Interval::zero(), order + 1); n];
            for (k, dk) in d.iter_mut().enumerate() {
                *dk = TaylorSeries::seed(
                    if k == i { Interval::one() } else { Interval::zero() },
                    order + 1,
                );
            }
            DualV {
                v: TaylorSeries::seed(x0[i], order + 1),
                d,
            }
        })
        .collect();
    for j in 0..order {
        let gs = rhs.eval_rhs(&s);
        let inv = inv_factor(j);
        for i in 0..n {
            let cv = gs[i].v.coeff(j) * inv;
            s[i].v.push(cv);
            for k in 0..n {
                let cd = gs[i].partial(k).coeff(j) * inv;
                s[i].d[k].push(cd);
            }
        }
    }
    s
}

/// Jacobian enclosure of the right-hand side on a box, by forward duals.
fn rhs_jacobian<R: OdeRhs>(rhs: &R, x: &IntervalVector) -> IntervalMatrix {
    let n = rhs.dim();
    let seeded: Vec<DualV<Interval>> = (0..n).map(|i| DualV::seed(x[i], i, n)).collect();
    let out = rhs.eval_rhs(&seeded);
    IntervalMatrix::from_rows(
        out.iter()
            .map(|row| (0..n).map(|j| row.partial(j)).collect())
            .collect(),
    )
}

fn inf_norm_upper_mat(m: &IntervalMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        let mut row = Interval::zero();
        for j in 0..m.ncols() {
            row = row + Interval::point(m[(i, j)].mag());
        }
        worst = worst.max(row.hi());
    }
    worst
}

/// A-priori enclosure of the flow of `hull` over [0, h] by Picard
/// iteration with geometric inflation. The returned box C satisfies
/// hull + [0,h]·g(C) ⊆ C.
fn picard_coarse<R: OdeRhs>(rhs: &R, hull: &IntervalVector, h: f64) -> Option<IntervalVector> {
    let n = rhs.dim();
    let zh = Interval::new(0.0, h);
    let scaled = |v: &IntervalVector| {
        let mut out = IntervalVector::zeros(n);
        let g = rhs.eval_rhs(v.as_slice());
        for i in 0..n {
            out[i] = hull[i] + zh * g[i];
        }
        out
    };
    let mut cand = scaled(hull);
    let mut puff = 0.1;
    for _ in 0..8 {
        let grown = cand.inflate(puff * cand.max_width() + 1e-14).widen_ulp();
        let img = scaled(&grown);
        if grown.contains(&img) {
            // One refinement pass; the refined box still passes the test.
            let tighter = scaled(&img);
            return if img.contains(&tighter) {
                Some(img)
            } else {
                Some(grown)
            };
        }
        cand = cand.hull(&img);
        puff *= 2.0;
    }
    None
}

// ---------------------------------------------------------------------------
// Lohner stepping

/// Set representation x̂ + A·r: point center, deviation frame, deviation
/// box. The frame absorbs the flow's local rotation so the box does not
/// wrap.
#[derive(Debug, Clone)]
struct LohnerSet {
    xhat: Vec<f64>,
    frame: DMatrix<f64>,
    dev: IntervalVector,
}

impl LohnerSet {
    fn from_box(x: &IntervalVector) -> Self {
        let n = x.dim();
        let xhat = x.mid();
        let mut dev = IntervalVector::zeros(n);
        for i in 0..n {
            dev[i] = x[i] - Interval::point(xhat[i]);
        }
        LohnerSet {
            xhat,
            frame: DMatrix::identity(n, n),
            dev,
        }
    }

    fn hull(&self) -> IntervalVector {
        let n = self.xhat.len();
        let frame = IntervalMatrix::from_dmatrix(&self.frame);
        let spread = frame.mul_vec(&self.dev);
        let mut out = IntervalVector::zeros(n);
        for i in 0..n {
            out[i] = Interval::point(self.xhat[i]) + spread[i];
        }
        out
    }
}

struct StepOutcome {
    h: f64,
    coarse: IntervalVector,
    next: LohnerSet,
    tight: IntervalVector,
}

/// One validated step from `set`, shrinking h until the Picard test and
/// the remainder tolerance both pass.
fn step_from_set<R: OdeRhs>(
    rhs: &R,
    set: &LohnerSet,
    h_target: f64,
    tol: f64,
) -> Result<StepOutcome, ()> {
    let n = rhs.dim();
    let mut h = h_target.clamp(H_MIN, H_MAX);
    let hull = set.hull();
    loop {
        let attempt = (|| {
            let coarse = picard_coarse(rhs, &hull, h)?;
            // Variational coarse bound: ‖V(σ) − I‖∞ ≤ e^{hM} − 1 ≤ 2hM for
            // hM ≤ 1, with M an upper bound on ‖Dg‖∞ over the enclosure.
            let m_norm = inf_norm_upper_mat(&rhs_jacobian(rhs, &coarse));
            if !(h * m_norm <= 1.0) {
                return None;
            }
            Some((coarse, m_norm))
        })();
        if let Some((coarse, m_norm)) = attempt {
            let hi = Interval::point(h);
            let pts: Vec<Interval> = set.xhat.iter().map(|&v| Interval::point(v)).collect();
            let center_jet = point_jet(rhs, &pts, ORDER);
            let box_jet = dual_jet(rhs, &coarse, ORDER);

            // Value: center polynomial plus Lagrange remainder over the
            // a-priori enclosure.
            let h_pow_top = hi.powi(ORDER as u32);
            let mut u = IntervalVector::zeros(n);
            let mut z = IntervalVector::zeros(n);
            for i in 0..n {
                u[i] = center_jet[i].eval_poly(hi, ORDER);
                z[i] = box_jet[i].v.coeff(ORDER) * h_pow_top;
            }

            let allowance = tol * (1.0 + hull.norm_inf_upper());
            if z.max_width() > allowance {
                if h * 0.5 < H_MIN {
                    return Err(());
                }
                h *= 0.5;
                continue;
            }

            // Mean-value transport matrix S = Σ_{j<ORDER} J_j h^j +
            // J_ORDER·V_c·h^ORDER.
            let jmat = |j: usize| {
                IntervalMatrix::from_rows(
                    (0..n)
                        .map(|i| (0..n).map(|k| box_jet[i].partial(k).coeff(j)).collect())
                        .collect(),
                )
            };
            let vc = {
                let b = (Interval::point(2.0) * hi * Interval::point(m_norm)).hi();
                let slack = Interval::new(-b, b);
                let mut m = IntervalMatrix::zeros(n, n);
                for i in 0..n {
                    for k in 0..n {
                        m[(i, k)] = slack + if i == k { Interval::one() } else { Interval::zero() };
                    }
                }
                m
            };
            let mut s_mat = jmat(ORDER).mul_mat(&vc);
            for j in (0..ORDER).rev() {
                s_mat = s_mat.scale(hi).add(&jmat(j));
            }

            // Direct enclosure and re-framed representation.
            let frame_int = IntervalMatrix::from_dmatrix(&set.frame);
            let s_frame = s_mat.mul_mat(&frame_int);
            let transported = s_frame.mul_vec(&set.dev);
            let mut direct = IntervalVector::zeros(n);
            for i in 0..n {
                direct[i] = u[i] + z[i] + transported[i];
            }

            let mut xhat_next = vec![0.0; n];
            for i in 0..n {
                xhat_next[i] = (u[i] + z[i]).mid();
            }
            let b_mat = s_mat.mid_dmatrix() * &set.frame;
            let q = b_mat.qr().q();
            let (frame_next, dev_next) = match verified_inverse(&q) {
                Some(q_inv) => {
                    // Compose the frame change with the transport as one
                    // matrix before touching the deviation box: collapsing
                    // S·A·r to an axis-aligned box first would wrap twice
                    // per step.
                    let t_mat = q_inv.mul_mat(&s_frame);
                    let mut resid = IntervalVector::zeros(n);
                    for i in 0..n {
                        resid[i] = u[i] + z[i] - Interval::point(xhat_next[i]);
                    }
                    let dev = t_mat.mul_vec(&set.dev).add(&q_inv.mul_vec(&resid));
                    (q.clone(), dev)
                }
                None => {
                    // Degenerate frame; fall back to the axis-aligned box.
                    let mut rho = IntervalVector::zeros(n);
                    for i in 0..n {
                        rho[i] = direct[i] - Interval::point(xhat_next[i]);
                    }
                    (DMatrix::identity(n, n), rho)
                }
            };
            let next = LohnerSet {
                xhat: xhat_next,
                frame: frame_next,
                dev: dev_next,
            };
            let rep_hull = next.hull();
            let mut tight = IntervalVector::zeros(n);
            for i in 0..n {
                tight[i] = direct[i]
                    .intersect(&rep_hull[i])
                    .expect("two enclosures of one nonempty set overlap");
            }
            return Ok(StepOutcome {
                h,
                coarse,
                next,
                tight,
            });
        }
        if h * 0.5 < H_MIN {
            return Err(());
        }
        h *= 0.5;
    }
}

/// One validated Taylor step from the box `x`.
///
/// Returns the accepted step size, the a-priori enclosure over the whole
/// step, and the tightened endpoint enclosure. The step size is halved
/// from `h_target` until validation passes; below the hard minimum the
/// step fails.
pub fn step<R: OdeRhs>(
    rhs: &R,
    x: &IntervalVector,
    h_target: f64,
    tol: f64,
) -> Result<(f64, IntervalVector, IntervalVector), IntegrateError> {
    let set = LohnerSet::from_box(x);
    let out = step_from_set(rhs, &set, h_target, tol)
        .map_err(|()| IntegrateError::StepUnderflow { tau: 0.0 })?;
    Ok((out.h, out.coarse, out.tight))
}

fn strip_time(v: &IntervalVector, tc: Option<usize>) -> (IntervalVector, Interval) {
    match tc {
        None => (v.clone(), Interval::zero()),
        Some(idx) => {
            let mut out = IntervalVector::zeros(v.dim() - 1);
            let mut slot = 0;
            for i in 0..v.dim() {
                if i == idx {
                    continue;
                }
                out[slot] = v[i];
                slot += 1;
            }
            (out, v[idx])
        }
    }
}

fn drive<R: OdeRhs>(
    rhs: &R,
    x0: &IntervalVector,
    mut stop: impl FnMut(&IntervalVector, f64) -> bool,
    tau_max: f64,
    tol: f64,
    clip_to_tau_max: bool,
) -> Result<TrajectoryEnclosure, IntegrateError> {
    let tc = rhs.time_coordinate();
    let (x0_stripped, t0) = strip_time(x0, tc);
    if stop(&x0_stripped, 0.0) {
        return Ok(TrajectoryEnclosure {
            steps: Vec::new(),
            t_elapsed: t0,
            tau_end: 0.0,
            endpoint: x0_stripped,
        });
    }
    let mut set = LohnerSet::from_box(x0);
    let mut tau = 0.0f64;
    let mut h_next = 0.02f64;
    let mut steps = Vec::new();
    let mut last_t = t0;
    let mut last_state = x0_stripped;
    while tau < tau_max {
        let mut h_try = h_next;
        if clip_to_tau_max {
            h_try = h_try.min(tau_max - tau);
        }
        let out = step_from_set(rhs, &set, h_try, tol)
            .map_err(|()| IntegrateError::StepUnderflow { tau })?;
        let (state, t_end) = strip_time(&out.tight, tc);
        let (coarse_state, _) = strip_time(&out.coarse, tc);
        let tau_next = tau + out.h;
        steps.push(StepRecord {
            tau: Interval::new(tau, tau_next),
            state_box: coarse_state,
            tight_endpoint: state.clone(),
            t_at_end: t_end,
            h: out.h,
        });
        set = out.next;
        tau = tau_next;
        last_t = t_end;
        last_state = state;
        if stop(&last_state, tau) {
            return Ok(TrajectoryEnclosure {
                steps,
                t_elapsed: last_t,
                tau_end: tau,
                endpoint: last_state,
            });
        }
        // Grow when the step was comfortable, i.e. accepted untrimmed.
        h_next = if out.h >= h_try {
            (out.h * 1.4).min(H_MAX)
        } else {
            out.h
        };
    }
    if clip_to_tau_max {
        Ok(TrajectoryEnclosure {
            steps,
            t_elapsed: last_t,
            tau_end: tau,
            endpoint: last_state,
        })
    } else {
        Err(IntegrateError::TauMaxExceeded { tau_max })
    }
}

/// Integrates from `x0` until the stop predicate holds on a tightened
/// endpoint enclosure (checked after every step, and once at τ = 0).
///
/// The predicate sees the state with any time coordinate stripped; it must
/// encode its own strictness (e.g. an upper bound strictly below a
/// threshold). Exceeding `tau_max` without a stop is an error.
pub fn integrate_until<R: OdeRhs>(
    rhs: &R,
    x0: &IntervalVector,
    stop: impl FnMut(&IntervalVector) -> bool,
    tau_max: f64,
    tol: f64,
) -> Result<TrajectoryEnclosure, IntegrateError> {
    let mut stop = stop;
    drive(rhs, x0, |x, _| stop(x), tau_max, tol, false)
}

/// Like [`integrate_until`], but exhausting `tau_cap` without a stop is a
/// normal return, not an error. The stop predicate additionally sees the
/// elapsed chart time.
pub fn integrate_until_capped<R: OdeRhs>(
    rhs: &R,
    x0: &IntervalVector,
    stop: impl FnMut(&IntervalVector, f64) -> bool,
    tau_cap: f64,
    tol: f64,
) -> Result<TrajectoryEnclosure, IntegrateError> {
    drive(rhs, x0, stop, tau_cap, tol, true)
}

/// Integrates from `x0` for exactly `tau_total` (the final step is
/// clipped to land on it).
pub fn integrate_for<R: OdeRhs>(
    rhs: &R,
    x0: &IntervalVector,
    tau_total: f64,
    tol: f64,
) -> Result<TrajectoryEnclosure, IntegrateError> {
    drive(rhs, x0, |_, _| false, tau_total, tol, true)
}

/// Coarse per-step bound on the step's contribution to t:
/// dt/dτ evaluated on the a-priori enclosure times the step width.
///
/// Summed over a trajectory this must contain (and is generally wider
/// than) the [`WithTime`] coordinate enclosure; the pair forms a
/// cross-check.
pub fn accumulate_time<M: VectorFieldModel>(
    field: &DesingularizedField<M>,
    step: &StepRecord,
) -> Interval {
    field.dt_dtau(&step.state_box) * Interval::point(step.h)
}
