//! Blow-up time enclosures assembled from the other layers.
//!
//! A validation run walks four stages: verify the target equilibrium on
//! the horizon, certify a Lyapunov domain N around it, integrate the
//! compactified initial value rigorously until the flow enters int N, and
//! close with an analytic tail bound on the remaining original time. The
//! result is an enclosure of the blow-up time t_max together with every
//! certified ingredient; failures record the stage that broke instead of
//! panicking.

use crate::compact::{
    dir_forward, para_forward, ChartKind, CompactChart, QHType,
};
use crate::field::{desing_dir, desing_para, DesingularizedField, VectorFieldModel};
use crate::integrate::{integrate_until_capped, WithTime};
use crate::interval::{Interval, IntervalVector};
use crate::lyapunov::{
    build_y, certify_domain, default_radius_schedule, validate_equilibrium, LyapunovCert,
};
use crate::problems::{ProblemModel, ProblemSpec, ReferenceRun, ReferenceStart};

/// Steps without a visible tail-bound improvement before the integration
/// hands over to the analytic tail.
const TAIL_STALL_STEPS: u32 = 60;

/// The stage of a validation run that failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    EquilibriumValidation,
    DomainCertification,
    Integration,
    TailBound,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::EquilibriumValidation => "equilibrium-validation",
            Stage::DomainCertification => "domain-certification",
            Stage::Integration => "integration",
            Stage::TailBound => "tail-bound",
        };
        f.write_str(name)
    }
}

/// Outcome of a validation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Succeeded,
    Failed(Stage),
}

impl RunStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, RunStatus::Succeeded)
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunStatus::Succeeded => f.write_str("succeeded"),
            RunStatus::Failed(stage) => write!(f, "failed({stage})"),
        }
    }
}

/// Everything a finished (or abandoned) validation run produced.
///
/// Stage outputs are present exactly when their stage completed, so a
/// failed certificate still shows how far the run got.
#[derive(Debug, Clone)]
pub struct BlowUpCertificate {
    pub problem_id: String,
    pub chart: CompactChart,
    /// Compactified initial state in chart coordinates.
    pub x0: Option<IntervalVector>,
    /// The certified Lyapunov domain around the target equilibrium.
    pub cert: Option<LyapunovCert>,
    /// Chart time at which the flow provably entered int N.
    pub tau_n: Option<f64>,
    /// Enclosure of the original time elapsed up to tau_n.
    pub t_n: Option<Interval>,
    /// Upper bound on the original time spent after tau_n.
    pub tail_bound: Option<Interval>,
    /// Blow-up time enclosure [t_n.lo, t_n.hi + tail.hi].
    pub t_max: Option<Interval>,
    pub status: RunStatus,
    pub wall_seconds: f64,
}

/// Tunables for [`validate_blowup`]; the defaults reproduce the reference
/// runs.
#[derive(Debug, Clone)]
pub struct BlowUpOptions {
    /// Integrator tolerance per accepted step.
    pub tol: f64,
    /// Chart-time budget for reaching the certified domain.
    pub tau_max: f64,
    /// Candidate domain radii, tried in order.
    pub schedule: Vec<f64>,
    /// Equilibrium seed in chart coordinates; when absent, a relaxation
    /// run from the initial state finds one.
    pub equilibrium_seed: Option<Vec<f64>>,
    /// Keep integrating inside the certified domain until the tail bound
    /// drops below this, the improvement stalls, or the budget runs out.
    pub tail_target: f64,
    /// Caps the certified sublevel threshold from above. Shrinking eps is
    /// always sound; a cap above the certified value has no effect.
    pub eps_override: Option<f64>,
}

impl Default for BlowUpOptions {
    fn default() -> Self {
        BlowUpOptions {
            tol: 1e-10,
            tau_max: 1000.0,
            schedule: default_radius_schedule(),
            equilibrium_seed: None,
            tail_target: 1e-6,
            eps_override: None,
        }
    }
}

/// Failures of the standalone bound operations.
#[derive(Debug, thiserror::Error, Clone, Copy, PartialEq, Eq)]
pub enum BlowUpError {
    /// Order zero never blows up in finite time; the tail integral
    /// diverges.
    #[error("blow-up order k = 0 is out of scope")]
    ZeroOrder,
    /// The certificate constants must be strictly positive intervals.
    #[error("certificate constants must be strictly positive")]
    DegenerateCertificate,
}

// ---------------------------------------------------------------------------
// Horizon-distance bound coefficients

/// Coefficients of the polynomial bounding |1 - p(x)^{2c}| near a horizon
/// equilibrium x*.
///
/// Expanding Σ_i x_i^{2β_i} around x* kills the constant term (x* sits on
/// the horizon) and leaves, for each offset power j, the coefficient
/// vector v_j with rows C(2β_i, j)·(x*_i)^{2β_i - j}, zero once j exceeds
/// 2β_i. The j = 1 block enters through Cauchy-Schwarz, so its Euclidean
/// norm matters; higher blocks enter through the sup norm.
#[derive(Debug, Clone)]
pub struct BoundCoefficients {
    /// v_j for j = 1..=j_max (entry j - 1).
    pub v: Vec<IntervalVector>,
    /// Euclidean norm enclosure of v_1.
    pub norm_v1: Interval,
    /// Sup-norm enclosures of v_j for j >= 2 (entry j - 2).
    pub norms_inf: Vec<Interval>,
}

impl BoundCoefficients {
    /// Largest offset power with a nonzero coefficient vector.
    pub fn j_max(&self) -> usize {
        self.v.len()
    }

    /// The norm entering the bound at offset power `j`.
    pub fn amplitude(&self, j: usize) -> Interval {
        assert!(j >= 1 && j <= self.j_max(), "offset power out of range");
        if j == 1 {
            self.norm_v1
        } else {
            self.norms_inf[j - 2]
        }
    }
}

/// Exact small binomial coefficient.
fn binomial(n: u32, j: u32) -> f64 {
    debug_assert!(j <= n);
    let mut acc = 1u128;
    for i in 0..u128::from(j.min(n - j)) {
        acc = acc * (u128::from(n) - i) / (i + 1);
    }
    acc as f64
}

/// Restricts an enclosure to the nonnegative axis it mathematically lives
/// on, guarding roots against outward rounding below zero.
fn nonneg(v: Interval) -> Interval {
    v.intersect(&Interval::new(0.0, f64::INFINITY))
        .unwrap_or_else(Interval::zero)
}

/// Absolute-value enclosure.
fn abs_iv(v: Interval) -> Interval {
    Interval::new(v.mig(), v.mag())
}

/// Elementwise max of two enclosures.
fn max_iv(a: Interval, b: Interval) -> Interval {
    Interval::new(a.lo().max(b.lo()), a.hi().max(b.hi()))
}

/// Computes the bound coefficients at a horizon equilibrium enclosure.
pub fn bound_coefficients(x_star: &IntervalVector, t: &QHType) -> BoundCoefficients {
    let n = t.dim();
    assert_eq!(x_star.dim(), n, "equilibrium dimension");
    let j_max = (0..n).map(|i| 2 * t.beta(i)).max().expect("nonempty type") as usize;
    let mut v = Vec::with_capacity(j_max);
    for j in 1..=j_max as u32 {
        let mut row = IntervalVector::zeros(n);
        for i in 0..n {
            let tb = 2 * t.beta(i);
            if j <= tb {
                row[i] = Interval::point(binomial(tb, j)) * x_star[i].powi(tb - j);
            }
        }
        v.push(row);
    }
    let norm_v1 = v[0].norm2();
    let norms_inf = v[1..]
        .iter()
        .map(|vj| {
            let mut m = Interval::zero();
            for i in 0..n {
                m = max_iv(m, abs_iv(vj[i]));
            }
            m
        })
        .collect();
    BoundCoefficients {
        v,
        norm_v1,
        norms_inf,
    }
}

/// Upper bound on |1 - p(x)^{2c}| over the sublevel set {L <= l}:
/// ‖v₁‖(c₁l)^{1/2} + Σ_{j≥2} ‖v_j‖_∞ (c₁l)^{j/2}.
pub fn c_bound(l: Interval, coeffs: &BoundCoefficients, c1: Interval) -> Interval {
    assert!(l.lo() >= 0.0, "sublevel threshold must be nonnegative");
    let w = nonneg(c1 * l).sqrt().expect("nonnegative radicand");
    let mut acc = coeffs.norm_v1 * w;
    let mut wp = w;
    for j in 2..=coeffs.j_max() {
        wp = wp * w;
        acc = acc + coeffs.amplitude(j) * wp;
    }
    acc
}

/// `base_sqrt^m` for a signed exponent, where `base_sqrt` is a strictly
/// positive square root enclosure.
fn half_pow(base_sqrt: Interval, m: i32) -> Interval {
    if m >= 0 {
        base_sqrt.powi(m as u32)
    } else {
        base_sqrt
            .powi((-m) as u32)
            .recip()
            .expect("strictly positive base")
    }
}

/// Positive-part guard the tail formulas share: c1 and c_tilde_n must be
/// strictly positive for the bounds to mean anything.
fn tail_constants(cert: &LyapunovCert) -> Result<(Interval, Interval, Interval), BlowUpError> {
    if !(cert.c1.lo() > 0.0) || !(cert.c_tilde_n.lo() > 0.0) || !(cert.eps >= 0.0) {
        return Err(BlowUpError::DegenerateCertificate);
    }
    let inv_ct = cert
        .c_tilde_n
        .recip()
        .ok_or(BlowUpError::DegenerateCertificate)?;
    let sc = cert.c1.sqrt().expect("positive");
    let se = Interval::point(cert.eps)
        .sqrt()
        .expect("nonnegative threshold");
    Ok((inv_ct, sc, se))
}

/// Upper bound on the original time spent after entering {L <= eps} in a
/// quasi-parabolic chart: (1/(c̃·c₁))·∫₀^ε C(L)^k / L dL.
///
/// For k = 1 the integral has the closed form
/// Σ_j (2/j)·a_j·c₁^{j/2-1}·ε^{j/2} with a_1 = ‖v₁‖ and a_j = ‖v_j‖_∞.
/// For k >= 2 the integrand expands multinomially in w = (c₁L)^{1/2};
/// every term is L^{m/2-1} with m >= k >= 2, so term-by-term integration
/// stays finite.
pub fn tmax_tail_para(
    cert: &LyapunovCert,
    coeffs: &BoundCoefficients,
    k: u32,
) -> Result<Interval, BlowUpError> {
    if k == 0 {
        return Err(BlowUpError::ZeroOrder);
    }
    let (inv_ct, sc, se) = tail_constants(cert)?;
    if k == 1 {
        let mut acc = Interval::zero();
        for j in 1..=coeffs.j_max() {
            let frac = Interval::point(2.0) / Interval::point(j as f64);
            acc = acc
                + frac
                    * coeffs.amplitude(j)
                    * half_pow(sc, j as i32 - 2)
                    * se.powi(j as u32);
        }
        return Ok(acc * inv_ct);
    }
    // C as a polynomial in w, raised to the k-th power by convolution.
    let jm = coeffs.j_max();
    let mut base = vec![Interval::zero(); jm + 1];
    for j in 1..=jm {
        base[j] = coeffs.amplitude(j);
    }
    let mut power = vec![Interval::one()];
    for _ in 0..k {
        let mut next = vec![Interval::zero(); power.len() + jm];
        for (i, a) in power.iter().enumerate() {
            for (j, b) in base.iter().enumerate() {
                next[i + j] = next[i + j] + *a * *b;
            }
        }
        power = next;
    }
    // ∫₀^ε w(L)^m / L dL = (2/m)·W^m with W = (c₁ε)^{1/2}.
    let w_top = sc * se;
    let mut acc = Interval::zero();
    let mut wp = Interval::one();
    for (m, b) in power.iter().enumerate().skip(1) {
        wp = wp * w_top;
        if b.lo() != 0.0 || b.hi() != 0.0 {
            acc = acc + *b * (Interval::point(2.0) / Interval::point(m as f64)) * wp;
        }
    }
    let inv_c1 = cert.c1.recip().ok_or(BlowUpError::DegenerateCertificate)?;
    Ok(acc * inv_ct * inv_c1)
}

/// Upper bound on the original time spent after entering {L <= eps} in a
/// directional chart: (2/(k·c̃))·c₁^{k/2-1}·ε^{k/2}, the closed form of
/// (1/(c̃·c₁))·∫₀^ε (c₁L)^{k/2} / L dL.
pub fn tmax_tail_dir(cert: &LyapunovCert, k: u32) -> Result<Interval, BlowUpError> {
    if k == 0 {
        return Err(BlowUpError::ZeroOrder);
    }
    let (inv_ct, sc, se) = tail_constants(cert)?;
    let frac = Interval::point(2.0) / Interval::point(f64::from(k));
    Ok(frac * inv_ct * half_pow(sc, k as i32 - 2) * se.powi(k))
}

// ---------------------------------------------------------------------------
// Validation runs

/// Fixed-step fourth-order advance shared by the non-rigorous helpers;
/// returns false when the state leaves the representable range.
fn rk4_advance(y: &mut [f64], h: f64, f: impl Fn(&[f64]) -> Vec<f64>) -> bool {
    let n = y.len();
    let k1 = f(y);
    let mut tmp = vec![0.0; n];
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = f(&tmp);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = f(&tmp);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    let k4 = f(&tmp);
    let mut ok = true;
    for i in 0..n {
        y[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        ok &= y[i].is_finite();
    }
    ok
}

/// Relaxes the chart flow from `start` toward its attracting equilibrium
/// and returns the best state seen; step size backs off when the residual
/// explodes (stiff grids) instead of failing.
fn equilibrium_seed<M: VectorFieldModel>(
    field: &DesingularizedField<M>,
    start: &[f64],
) -> Vec<f64> {
    let mut best = start.to_vec();
    let mut best_res = f64::INFINITY;
    let mut h = 5e-3;
    for _ in 0..8 {
        let mut y = best.clone();
        let mut diverged = false;
        for _ in 0..400_000 {
            let res = field
                .eval_g_generic::<f64>(&y)
                .iter()
                .fold(0.0f64, |a, v| a.max(v.abs()));
            if !res.is_finite() {
                diverged = true;
                break;
            }
            if res < best_res {
                best_res = res;
                best = y.clone();
            }
            if res <= 1e-12 {
                return best;
            }
            if res > 1e3 * (1.0 + best_res) {
                diverged = true;
                break;
            }
            if !rk4_advance(&mut y, h, |z| field.eval_g_generic::<f64>(z)) {
                diverged = true;
                break;
            }
        }
        if !diverged {
            break;
        }
        h *= 0.25;
    }
    best
}

/// Compactifies a raw-space enclosure into the chart's coordinates: the
/// chart state for a parabolic chart, [s, x..] for a directional one.
pub fn compactify_start(
    y0: &IntervalVector,
    chart: &CompactChart,
) -> Result<IntervalVector, crate::compact::CompactError> {
    match chart.kind() {
        ChartKind::QuasiParabolic => para_forward(y0, chart.qh_type()).map(|(x, _)| x),
        ChartKind::Directional { .. } => dir_forward(y0, chart).map(|(s, x)| {
            let mut out = IntervalVector::zeros(x.dim() + 1);
            out[0] = s;
            for i in 0..x.dim() {
                out[i + 1] = x[i];
            }
            out
        }),
    }
}

/// Runs the four-stage validation of a blow-up solution from the raw
/// initial enclosure `y0`.
///
/// Point data embeds via `IntervalVector::from_points`; genuinely fat
/// input enclosures (transcendental initial profiles) are integrated as
/// such. Mathematical failures land in `status`; only caller errors
/// (dimension mismatch, unsupported chart) panic.
pub fn validate_blowup(
    problem: &ProblemSpec,
    chart: ChartKind,
    y0: &IntervalVector,
    options: &BlowUpOptions,
) -> BlowUpCertificate {
    let started = std::time::Instant::now();
    let model = problem.model.clone();
    let t = model.qh_type().clone();
    assert_eq!(y0.dim(), t.dim(), "initial state dimension");
    assert!(
        (0..y0.dim()).all(|i| y0[i].is_finite()),
        "initial state must be finite"
    );
    let compact_chart = match chart {
        ChartKind::QuasiParabolic => CompactChart::parabolic(t.clone()),
        ChartKind::Directional { index, sign } => {
            assert!(
                model.supports_dir_chart(index, sign),
                "model does not expose this directional chart"
            );
            CompactChart::directional(t.clone(), index, sign).expect("chart index checked")
        }
    };
    let mut out = BlowUpCertificate {
        problem_id: problem.id.clone(),
        chart: compact_chart.clone(),
        x0: None,
        cert: None,
        tau_n: None,
        t_n: None,
        tail_bound: None,
        t_max: None,
        status: RunStatus::Succeeded,
        wall_seconds: 0.0,
    };
    let fail = |mut c: BlowUpCertificate, stage: Stage| {
        c.status = RunStatus::Failed(stage);
        c.wall_seconds = started.elapsed().as_secs_f64();
        c
    };

    let field = match chart {
        ChartKind::QuasiParabolic => desing_para(model.clone()),
        ChartKind::Directional { index, sign } => {
            desing_dir(model.clone(), index, sign).expect("chart support checked")
        }
    };

    // Compactified initial state; a sign-condition violation surfaces here
    // and counts against the integration leg it would have started.
    let x0 = match compactify_start(y0, &compact_chart) {
        Ok(x) => x,
        Err(_) => return fail(out, Stage::Integration),
    };
    out.x0 = Some(x0.clone());

    // Stage 1: equilibrium validation.
    let seed = options
        .equilibrium_seed
        .clone()
        .unwrap_or_else(|| equilibrium_seed(&field, &x0.mid()));
    let x_star = match validate_equilibrium(&field, &seed) {
        Ok(x) => x,
        Err(_) => return fail(out, Stage::EquilibriumValidation),
    };

    // Stage 2: Lyapunov domain certification.
    let jac_mid = field.eval_dg(&x_star).mid_dmatrix();
    let y_mat = match build_y(&jac_mid) {
        Ok(y) => y,
        Err(_) => return fail(out, Stage::DomainCertification),
    };
    let mut cert = match certify_domain(&field, &x_star, &y_mat, &options.schedule) {
        Ok(c) => c,
        Err(_) => return fail(out, Stage::DomainCertification),
    };
    if let Some(cap) = options.eps_override {
        if !(cap > 0.0) {
            return fail(out, Stage::DomainCertification);
        }
        cert.eps = cert.eps.min(cap);
    }
    out.cert = Some(cert.clone());

    // Tail bound at a given sublevel threshold; shared between the
    // handover heuristic below and the final bound.
    let k = t.order_k();
    let coeffs = match compact_chart.kind() {
        ChartKind::QuasiParabolic => Some(bound_coefficients(&cert.x_star, &t)),
        ChartKind::Directional { .. } => None,
    };
    let tail_at = |threshold: f64| -> Result<Interval, BlowUpError> {
        let mut c = cert.clone();
        if threshold.is_finite() && threshold >= 0.0 {
            c.eps = c.eps.min(threshold);
        }
        match &coeffs {
            Some(cf) => tmax_tail_para(&c, cf, k),
            None => tmax_tail_dir(&c, k),
        }
    };

    // Stage 3: rigorous integration. The run must strictly enter int N;
    // once inside it keeps going while that visibly tightens the tail
    // bound, since the sublevel value actually reached replaces eps there.
    let rhs = WithTime(&field);
    let n = field.dim();
    let mut z0 = IntervalVector::zeros(n + 1);
    for i in 0..n {
        z0[i] = x0[i];
    }
    let mut best_tail = f64::INFINITY;
    let mut stalled = 0u32;
    let traj = match integrate_until_capped(
        &rhs,
        &z0,
        |x, _| {
            let reached = cert.lyap_value(x).hi();
            if !(reached < cert.eps) {
                return false;
            }
            let Ok(tail) = tail_at(reached) else {
                return true;
            };
            if tail.hi() <= options.tail_target {
                return true;
            }
            if tail.hi() < best_tail * (1.0 - 1e-3) {
                best_tail = tail.hi();
                stalled = 0;
            } else {
                stalled += 1;
            }
            stalled >= TAIL_STALL_STEPS
        },
        options.tau_max,
        options.tol,
    ) {
        Ok(tr) => tr,
        Err(_) => return fail(out, Stage::Integration),
    };
    if !(cert.lyap_value(&traj.endpoint).hi() < cert.eps) {
        return fail(out, Stage::Integration);
    }
    out.tau_n = Some(traj.tau_end);
    out.t_n = Some(traj.t_elapsed);

    // Stage 4: tail bound on the remaining original time, at the
    // sublevel value the integration actually reached.
    let reached = cert.lyap_value(&traj.endpoint).hi();
    let tail = match tail_at(reached) {
        Ok(v) if v.hi().is_finite() => v,
        _ => return fail(out, Stage::TailBound),
    };
    out.tail_bound = Some(tail);
    let t_n = traj.t_elapsed;
    let upper = (t_n + Interval::new(0.0, tail.hi())).hi();
    out.t_max = Some(Interval::new(t_n.lo(), upper));
    out.wall_seconds = started.elapsed().as_secs_f64();
    out
}

/// Pulls a chart-coordinate start back to a raw-space enclosure. For a
/// directional chart the first component is the scale s, the rest the
/// chart coordinates in slot order.
pub fn chart_start_to_raw(
    t: &QHType,
    chart: ChartKind,
    point: &[f64],
) -> Result<IntervalVector, crate::compact::CompactError> {
    let x = IntervalVector::from_points(point);
    match chart {
        ChartKind::QuasiParabolic => crate::compact::para_inverse(&x, t),
        ChartKind::Directional { index, sign } => {
            let chart = CompactChart::directional(t.clone(), index, sign)?;
            let mut rest = IntervalVector::zeros(x.dim() - 1);
            for i in 1..x.dim() {
                rest[i - 1] = x[i];
            }
            crate::compact::dir_inverse(x[0], &rest, &chart)
        }
    }
}

/// The raw-space initial enclosure a reference run starts from.
///
/// Published chart-coordinate starts are pulled back through the chart
/// inverse; the run then compactifies the result again, so the true chart
/// start stays inside the integrated enclosure.
pub fn reference_initial(problem: &ProblemSpec, run: &ReferenceRun) -> IntervalVector {
    match &run.start {
        ReferenceStart::ChartPoint(v) => {
            chart_start_to_raw(problem.model.qh_type(), run.chart, v)
                .expect("interior chart start")
        }
        ReferenceStart::DefaultData => match &problem.model {
            ProblemModel::Fvks(m) => m.default_initial(),
            _ => panic!("problem has no default initial data"),
        },
    }
}

/// Non-rigorous blow-up probe: integrates the original field from `y0`
/// with a step proportional to the local time scale and reports the time
/// at which the radius functional p(y) first exceeds `threshold` (or the
/// state overflows), None if that never happens before `t_cap`.
pub fn float_blowup_probe<M: VectorFieldModel>(
    model: &M,
    y0: &[f64],
    threshold: f64,
    t_cap: f64,
) -> Option<f64> {
    let t = model.qh_type();
    let n = t.dim();
    assert_eq!(y0.len(), n, "state dimension");
    let mut y = y0.to_vec();
    let mut time = 0.0f64;
    for _ in 0..20_000_000u64 {
        if time >= t_cap {
            return None;
        }
        let mut p2c = 0.0f64;
        for i in 0..n {
            p2c += y[i].abs().powi(2 * t.beta(i) as i32);
        }
        let p = p2c.powf(1.0 / f64::from(2 * t.c()));
        if !p.is_finite() || p > threshold {
            return Some(time);
        }
        let speed = model
            .eval_f::<f64>(&y)
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let scale = y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let h = (2.5e-4 * scale / speed.max(1e-300)).min(0.02);
        if !rk4_advance(&mut y, h, |z| model.eval_f::<f64>(z)) {
            return Some(time);
        }
        time += h;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compact::{make_type, Sign};
    use crate::problems::make_kk_simple;
    use nalgebra::DMatrix;

    fn dummy_cert(c1: f64, c_tilde_n: f64, eps: f64) -> LyapunovCert {
        LyapunovCert {
            x_star: IntervalVector::from_points(&[0.0]),
            y: DMatrix::identity(1, 1),
            domain_radius: 1.0,
            c_a: Interval::point(1.0),
            lam_min_y: Interval::point(1.0),
            lam_max_y: Interval::point(1.0),
            c1: Interval::point(c1),
            c_tilde_n: Interval::point(c_tilde_n),
            eps,
        }
    }

    #[test]
    fn coefficients_match_the_planar_type() {
        let t = make_type(&[1, 2], 1).unwrap();
        let x_star = IntervalVector::from_points(&[1.0, 0.0]);
        let c = bound_coefficients(&x_star, &t);
        assert_eq!(c.j_max(), 4);
        let expect = [[4.0, 0.0], [6.0, 1.0], [4.0, 0.0], [1.0, 0.0]];
        for (j, row) in expect.iter().enumerate() {
            for i in 0..2 {
                assert!(
                    c.v[j][i].contains(row[i]) && c.v[j][i].width() == 0.0,
                    "v_{} [{}] = {:?}",
                    j + 1,
                    i,
                    c.v[j][i]
                );
            }
        }
        assert!(c.norm_v1.contains(4.0));
        assert!(c.norm_v1.width() < 1e-14);
        for (idx, want) in [(2usize, 6.0), (3, 4.0), (4, 1.0)] {
            let a = c.amplitude(idx);
            assert!(a.contains(want) && a.width() == 0.0, "a_{idx} = {a:?}");
        }
    }

    #[test]
    fn horizon_distance_bound_hand_value() {
        let t = make_type(&[1, 2], 1).unwrap();
        let coeffs = bound_coefficients(&IntervalVector::from_points(&[1.0, 0.0]), &t);
        let one = Interval::one();
        let b = c_bound(Interval::point(0.01), &coeffs, one);
        assert!(b.contains(0.4641), "{b:?}");
        assert!(b.width() < 1e-12, "{b:?}");
        // Zero threshold kills every term exactly.
        let z = c_bound(Interval::zero(), &coeffs, one);
        assert_eq!((z.lo(), z.hi()), (0.0, 0.0));
        // Strictly increasing in the threshold.
        let small = c_bound(Interval::point(1e-6), &coeffs, one);
        let big = c_bound(Interval::point(2e-6), &coeffs, one);
        assert!(big.lo() > small.hi());
    }

    #[test]
    fn directional_tail_closed_form() {
        let cert = dummy_cert(1.0, 1.0, 0.04);
        let tail = tmax_tail_dir(&cert, 1).unwrap();
        assert!(tail.contains(0.4), "{tail:?}");
        assert!(tail.width() < 1e-15);
        assert_eq!(tmax_tail_dir(&cert, 0), Err(BlowUpError::ZeroOrder));
        // eps = 0 collapses the bound to zero.
        let zero = tmax_tail_dir(&dummy_cert(1.0, 1.0, 0.0), 3).unwrap();
        assert_eq!((zero.lo(), zero.hi()), (0.0, 0.0));
        // k = 2: (2/2)·c1^0·eps = eps.
        let k2 = tmax_tail_dir(&dummy_cert(9.0, 1.0, 0.25), 2).unwrap();
        assert!(k2.contains(0.25) && k2.width() < 1e-15, "{k2:?}");
    }

    #[test]
    fn parabolic_tail_single_term_reduction() {
        // C(L) = 2(c1 L)^{1/2} only: tail = (2·2/c̃)·(eps/c1)^{1/2}.
        let coeffs = BoundCoefficients {
            v: vec![
                IntervalVector::from_points(&[2.0]),
                IntervalVector::from_points(&[0.0]),
            ],
            norm_v1: Interval::point(2.0),
            norms_inf: vec![Interval::zero()],
        };
        let cert = dummy_cert(4.0, 1.0, 0.09);
        let tail = tmax_tail_para(&cert, &coeffs, 1).unwrap();
        assert!(tail.contains(0.6), "{tail:?}");
        assert!(tail.width() < 1e-14);
        // k = 2 multinomial: C² = 4 c1 L, integral 4 c1 eps, over c̃ c1.
        let tail2 = tmax_tail_para(&cert, &coeffs, 2).unwrap();
        assert!(tail2.contains(0.36), "{tail2:?}");
        assert!(tail2.width() < 1e-14);
        assert_eq!(
            tmax_tail_para(&cert, &coeffs, 0),
            Err(BlowUpError::ZeroOrder)
        );
        let zero = tmax_tail_para(&dummy_cert(4.0, 1.0, 0.0), &coeffs, 1).unwrap();
        assert_eq!((zero.lo(), zero.hi()), (0.0, 0.0));
    }

    #[test]
    fn tails_grow_with_threshold_and_norms() {
        let t = make_type(&[1, 2], 1).unwrap();
        let coeffs = bound_coefficients(&IntervalVector::from_points(&[1.0, 0.0]), &t);
        let lo = tmax_tail_para(&dummy_cert(1.0, 2.0, 1e-4), &coeffs, 1).unwrap();
        let hi = tmax_tail_para(&dummy_cert(1.0, 2.0, 2e-4), &coeffs, 1).unwrap();
        assert!(hi.lo() > lo.hi());
        let mut bigger = coeffs.clone();
        bigger.norm_v1 = bigger.norm_v1 * Interval::point(2.0);
        let scaled = tmax_tail_para(&dummy_cert(1.0, 2.0, 1e-4), &bigger, 1).unwrap();
        assert!(scaled.hi() > lo.hi());
        let dl = tmax_tail_dir(&dummy_cert(1.0, 2.0, 1e-4), 1).unwrap();
        let dh = tmax_tail_dir(&dummy_cert(1.0, 2.0, 2e-4), 1).unwrap();
        assert!(dh.lo() > dl.hi());
    }

    #[test]
    fn planar_run_reproduces_reference_enclosure() {
        let problem = make_kk_simple();
        let run = &problem.reference_runs[1];
        let y0 = reference_initial(&problem, run);
        let cert = validate_blowup(&problem, run.chart, &y0, &BlowUpOptions::default());
        assert!(cert.status.is_success(), "{:?}", cert.status);
        let t_max = cert.t_max.expect("succeeded");
        let expected = run.expected_t_max;
        assert!(
            t_max.intersect(&expected).is_some(),
            "{t_max:?} vs {expected:?}"
        );
        // The enclosure endpoints obey the assembly identity.
        let t_n = cert.t_n.expect("succeeded");
        let tail = cert.tail_bound.expect("succeeded");
        assert_eq!(t_max.lo(), t_n.lo());
        assert!(t_max.hi() >= t_n.hi() + tail.hi() - 1e-12);
        assert!(tail.hi().is_finite() && tail.hi() >= 0.0);
        assert!(cert.tau_n.expect("succeeded") > 0.0);
    }

    #[test]
    fn wrong_sign_chart_fails_in_integration_stage() {
        let problem = make_kk_simple();
        // u(0) < 0 contradicts the positive-u directional chart.
        let y0 = IntervalVector::from_points(&[-0.1, -0.1]);
        let chart = ChartKind::Directional {
            index: 0,
            sign: Sign::Plus,
        };
        let cert = validate_blowup(&problem, chart, &y0, &BlowUpOptions::default());
        assert_eq!(cert.status, RunStatus::Failed(Stage::Integration));
        assert!(cert.x0.is_none());
        assert!(cert.t_max.is_none());
    }

    #[test]
    fn probe_agrees_with_certified_enclosure() {
        let problem = make_kk_simple();
        let run = &problem.reference_runs[1];
        let t = problem.model.qh_type().clone();
        let y0 = reference_initial(&problem, run);
        let hit = float_blowup_probe(&problem.model, &y0.mid(), 1e8, 20.0)
            .expect("blows up");
        let expected = run.expected_t_max;
        assert!(
            hit > expected.lo() - 1e-2 && hit < expected.hi() + 1e-2,
            "probe {hit} vs {expected:?}"
        );
        assert_eq!(t.order_k(), 1);
        // The origin is stationary for the principal field: no blow-up.
        let none = float_blowup_probe(&problem.model, &[0.0, 0.0], 1e8, 0.5);
        assert_eq!(none, None);
    }
}
