//! Built-in problem library: two planar shock-profile systems and a
//! finite-volume discretization of the radial chemotaxis system, packaged
//! as [`VectorFieldModel`]s with frozen reference enclosures.
//!
//! Every factory returns a [`ProblemSpec`] whose model carries its
//! quasi-homogeneous type and analytic chart rescalings; the attached
//! [`ReferenceRun`]s record published enclosures for cross-checking.

use crate::compact::{make_type, ChartKind, CompactError, QHType, Sign};
use crate::field::{rat, Scalar, VectorFieldModel};
use crate::interval::krawczyk::krawczyk_scalar;
use crate::interval::{Interval, IntervalVector};

/// Construction failures for problem factories.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ProblemError {
    /// A supplied constant was not a finite number.
    #[error("parameter `{0}` must be finite")]
    NonFinite(&'static str),
    /// Grid shape outside the supported range.
    #[error("grid d={d}, N={n} rejected: need d >= 1 and N >= 2")]
    BadGrid { d: u32, n: usize },
    /// Underlying type construction failed.
    #[error(transparent)]
    Type(#[from] CompactError),
}

/// Where a reference run starts.
#[derive(Debug, Clone)]
pub enum ReferenceStart {
    /// An explicit state in chart coordinates; the raw initial data is its
    /// chart preimage.
    ChartPoint(Vec<f64>),
    /// The problem's default initial data, in raw coordinates.
    DefaultData,
}

/// A published validation run: chart, start state, and the enclosures the
/// run is expected to reproduce (our enclosures must overlap these).
#[derive(Debug, Clone)]
pub struct ReferenceRun {
    pub label: &'static str,
    pub chart: ChartKind,
    pub start: ReferenceStart,
    /// Certified domain size around the target equilibrium, if published.
    pub expected_eps: Option<f64>,
    /// Chart time at which integration handed over to the tail bound.
    pub expected_tau_n: Option<f64>,
    /// Blow-up time enclosure to reproduce.
    pub expected_t_max: Interval,
}

/// A ready-to-validate problem: id, model, and reference runs.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub id: String,
    pub model: ProblemModel,
    pub reference_runs: Vec<ReferenceRun>,
}

/// The built-in models behind one dispatch type, so specs stay plain data.
#[derive(Debug, Clone)]
pub enum ProblemModel {
    KkSimple(KkSimple),
    Kk(Kk),
    Fvks(Fvks),
}

impl VectorFieldModel for ProblemModel {
    fn dim(&self) -> usize {
        match self {
            ProblemModel::KkSimple(m) => m.dim(),
            ProblemModel::Kk(m) => m.dim(),
            ProblemModel::Fvks(m) => m.dim(),
        }
    }

    fn qh_type(&self) -> &QHType {
        match self {
            ProblemModel::KkSimple(m) => m.qh_type(),
            ProblemModel::Kk(m) => m.qh_type(),
            ProblemModel::Fvks(m) => m.qh_type(),
        }
    }

    fn eval_f<S: Scalar>(&self, y: &[S]) -> Vec<S> {
        match self {
            ProblemModel::KkSimple(m) => m.eval_f(y),
            ProblemModel::Kk(m) => m.eval_f(y),
            ProblemModel::Fvks(m) => m.eval_f(y),
        }
    }

    fn eval_f_tilde<S: Scalar>(&self, x: &[S], q: &S) -> Vec<S> {
        match self {
            ProblemModel::KkSimple(m) => m.eval_f_tilde(x, q),
            ProblemModel::Kk(m) => m.eval_f_tilde(x, q),
            ProblemModel::Fvks(m) => m.eval_f_tilde(x, q),
        }
    }

    fn supports_dir_chart(&self, index: usize, sign: Sign) -> bool {
        match self {
            ProblemModel::KkSimple(m) => m.supports_dir_chart(index, sign),
            ProblemModel::Kk(m) => m.supports_dir_chart(index, sign),
            ProblemModel::Fvks(m) => m.supports_dir_chart(index, sign),
        }
    }

    fn eval_f_hat<S: Scalar>(&self, s: &S, x: &[S], index: usize, sign: Sign) -> Vec<S> {
        match self {
            ProblemModel::KkSimple(m) => m.eval_f_hat(s, x, index, sign),
            ProblemModel::Kk(m) => m.eval_f_hat(s, x, index, sign),
            ProblemModel::Fvks(m) => m.eval_f_hat(s, x, index, sign),
        }
    }
}

// ---------------------------------------------------------------------------
// Planar model, principal part only: u' = u^2 - v, v' = u^3/3.

/// Exactly quasi-homogeneous planar field of type (1,2), order offset 1.
#[derive(Debug, Clone)]
pub struct KkSimple {
    qh: QHType,
}

/// `kk-simple`: the principal planar field; blow-up profiles approach the
/// horizon sink of its parabolic desingularization.
pub fn make_kk_simple() -> ProblemSpec {
    let qh = make_type(&[1, 2], 1).expect("static type");
    let runs = vec![
        ReferenceRun {
            label: "para from (-0.1, 0.0001)",
            chart: ChartKind::QuasiParabolic,
            start: ReferenceStart::ChartPoint(vec![-0.1, 0.0001]),
            expected_eps: Some(5.670_002_325_218_021_3e-5),
            expected_tau_n: Some(343.579_357_442_303_72),
            expected_t_max: Interval::new(84.083_706_663_650_346, 84.083_853_417_007_874),
        },
        ReferenceRun {
            label: "para from (-0.1, -0.1)",
            chart: ChartKind::QuasiParabolic,
            start: ReferenceStart::ChartPoint(vec![-0.1, -0.1]),
            expected_eps: Some(5.670_002_325_218_021_3e-5),
            expected_tau_n: Some(32.055_981_882_504_81),
            expected_t_max: Interval::new(6.201_076_183_523_544_3, 6.201_244_293_886_126_1),
        },
    ];
    ProblemSpec {
        id: "kk-simple".to_owned(),
        model: ProblemModel::KkSimple(KkSimple { qh }),
        reference_runs: runs,
    }
}

impl VectorFieldModel for KkSimple {
    fn dim(&self) -> usize {
        2
    }

    fn qh_type(&self) -> &QHType {
        &self.qh
    }

    fn eval_f<S: Scalar>(&self, y: &[S]) -> Vec<S> {
        assert_eq!(y.len(), 2);
        vec![
            y[0].powu(2) - y[1].clone(),
            rat::<S>(1, 3) * y[0].powu(3),
        ]
    }

    fn eval_f_tilde<S: Scalar>(&self, x: &[S], _q: &S) -> Vec<S> {
        // Exactly quasi-homogeneous: no subprincipal terms.
        self.eval_f(x)
    }

    fn supports_dir_chart(&self, index: usize, _sign: Sign) -> bool {
        index == 0
    }

    fn eval_f_hat<S: Scalar>(&self, _s: &S, x: &[S], index: usize, sign: Sign) -> Vec<S> {
        assert_eq!(index, 0);
        assert_eq!(x.len(), 1);
        vec![S::one() - x[0].clone(), rat::<S>(sign.unit(), 3)]
    }
}

// ---------------------------------------------------------------------------
// Planar model with shock parameters:
// u' = u^2 - v - s u - c1, v' = u^3/3 - u - s v - c2.

/// Shock constants for [`Kk`]; the profile connects the two equilibria
/// (u_left, v_left) and (u_right, v_right) at speed `speed`.
#[derive(Debug, Clone)]
pub struct KkParams {
    pub u_left: Interval,
    pub v_left: Interval,
    pub u_right: Interval,
    pub v_right: Interval,
    pub speed: Interval,
    pub c1: Interval,
    pub c2: Interval,
}

/// Asymptotically quasi-homogeneous planar field of type (1,2), order
/// offset 1; the subprincipal terms carry the shock constants.
#[derive(Debug, Clone)]
pub struct Kk {
    qh: QHType,
    params: KkParams,
}

impl Kk {
    pub fn params(&self) -> &KkParams {
        &self.params
    }
}

/// `kk`: the parametrized planar field. Rejects non-finite constants; the
/// jump conditions producing `speed` are upstream of this library, so the
/// constants arrive as intervals.
pub fn make_kk(params: KkParams) -> Result<ProblemSpec, ProblemError> {
    let checks: [(&'static str, &Interval); 7] = [
        ("u_left", &params.u_left),
        ("v_left", &params.v_left),
        ("u_right", &params.u_right),
        ("v_right", &params.v_right),
        ("speed", &params.speed),
        ("c1", &params.c1),
        ("c2", &params.c2),
    ];
    for (name, iv) in checks {
        if !iv.is_finite() {
            return Err(ProblemError::NonFinite(name));
        }
    }
    let qh = make_type(&[1, 2], 1).expect("static type");
    let runs = vec![ReferenceRun {
        label: "para from (-0.1, -0.8)",
        chart: ChartKind::QuasiParabolic,
        start: ReferenceStart::ChartPoint(vec![-0.1, -0.8]),
        expected_eps: Some(1.104_923_048_819_212_8e-4),
        expected_tau_n: Some(11.553_125_194_347_21),
        expected_t_max: Interval::new(0.944_239_514_010_626, 0.944_697_394_159_560_34),
    }];
    Ok(ProblemSpec {
        id: "kk".to_owned(),
        model: ProblemModel::Kk(Kk { qh, params }),
        reference_runs: runs,
    })
}

/// Decimal enclosure nudged outward one ulp per side, so the printed
/// decimal bounds stay inside the stored interval after literal rounding.
fn published(lo: f64, hi: f64) -> Interval {
    Interval::new(lo.next_down(), hi.next_up())
}

/// `kk` with the published constants. The left state and constants ship as
/// validated intervals; the right state is re-verified here as the nearby
/// root of the equilibrium cubic (the published data does not include it).
pub fn make_kk_default() -> ProblemSpec {
    let speed = published(0.448_194_675_075_054_61, 0.448_194_675_075_055_12);
    let c1 = published(1.257_794_420_461_443_5, 1.257_794_420_461_445_1);
    let c2 = published(-0.520_727_975_341_760_75, -0.520_727_975_341_759_85);
    let u_left = published(1.467_770_624_905, 1.467_770_624_915);
    let v_left = published(0.238_709_208_566, 0.238_709_208_576);
    // Equilibria solve v = u^2 - s u - c1 and the resulting cubic in u.
    let cubic = |u: Interval| {
        u.powi(3) * Interval::point(1.0 / 3.0).widen_ulp() - speed * u.powi(2)
            + (speed.powi(2) - Interval::one()) * u
            + (speed * c1 - c2)
    };
    let dcubic = |u: Interval| {
        u.powi(2) - Interval::point(2.0) * speed * u + (speed.powi(2) - Interval::one())
    };
    let seed = 1.428_490_141_407_97;
    let u_right = krawczyk_scalar(cubic, dcubic, Interval::new(seed - 1e-6, seed + 1e-6))
        .expect("right state root is simple and well separated");
    let v_right = u_right.powi(2) - speed * u_right - c1;
    make_kk(KkParams {
        u_left,
        v_left,
        u_right,
        v_right,
        speed,
        c1,
        c2,
    })
    .expect("published constants are finite")
}

impl VectorFieldModel for Kk {
    fn dim(&self) -> usize {
        2
    }

    fn qh_type(&self) -> &QHType {
        &self.qh
    }

    fn eval_f<S: Scalar>(&self, y: &[S]) -> Vec<S> {
        self.eval_f_tilde(y, &S::one())
    }

    fn eval_f_tilde<S: Scalar>(&self, x: &[S], q: &S) -> Vec<S> {
        assert_eq!(x.len(), 2);
        let s = S::from_interval(self.params.speed);
        let c1 = S::from_interval(self.params.c1);
        let c2 = S::from_interval(self.params.c2);
        // Subprincipal terms decay by one kappa power per degree deficit.
        vec![
            x[0].powu(2) - x[1].clone() - s.clone() * q.clone() * x[0].clone()
                - c1 * q.powu(2),
            rat::<S>(1, 3) * x[0].powu(3) - q.powu(2) * x[0].clone()
                - s * q.clone() * x[1].clone()
                - c2 * q.powu(3),
        ]
    }

    fn supports_dir_chart(&self, index: usize, _sign: Sign) -> bool {
        index == 0
    }

    fn eval_f_hat<S: Scalar>(&self, s: &S, x: &[S], index: usize, sign: Sign) -> Vec<S> {
        assert_eq!(index, 0);
        assert_eq!(x.len(), 1);
        let sp = S::from_interval(self.params.speed);
        let c1 = S::from_interval(self.params.c1);
        let c2 = S::from_interval(self.params.c2);
        let sg = rat::<S>(sign.unit(), 1);
        vec![
            S::one() - x[0].clone() - sp.clone() * sg.clone() * s.clone() - c1 * s.powu(2),
            rat::<S>(sign.unit(), 3) - sg.clone() * s.powu(2)
                - sp * x[0].clone() * s.clone()
                - c2 * s.powu(3),
        ]
    }
}

// ---------------------------------------------------------------------------
// Finite-volume radial chemotaxis model.
//
// 2N unknowns (u_1..u_N, v_1..v_N) on control points r_i = (i - 1/2)h,
// h = L/N, with face radii i h. Fluxes are weighted by the face area
// factor r^{d-1} and rows by r_i^{1-d}; the boundary rows keep only their
// interior face, which encodes the no-flux condition.

/// Finite-volume chemotaxis field of type (2,..,2,1,..,1), order offset 1.
#[derive(Debug, Clone)]
pub struct Fvks {
    qh: QHType,
    d: u32,
    n: usize,
    l_domain: f64,
    amplitude: f64,
    r: Vec<Interval>,
    a_plus: Vec<Interval>,
    a_minus: Vec<Interval>,
}

impl Fvks {
    /// Space dimension d of the radial Laplacian.
    pub fn space_dim(&self) -> u32 {
        self.d
    }

    /// Number of control volumes N.
    pub fn cells(&self) -> usize {
        self.n
    }

    /// Control radius r_i (0-based).
    pub fn radius(&self, i: usize) -> Interval {
        self.r[i]
    }

    /// Outer-face stencil coefficient of row i (0-based).
    pub fn coeff_plus(&self, i: usize) -> Interval {
        self.a_plus[i]
    }

    /// Inner-face stencil coefficient of row i (0-based); zero for row 0.
    pub fn coeff_minus(&self, i: usize) -> Interval {
        self.a_minus[i]
    }

    /// Default initial data in original coordinates:
    /// u_i(0) = amplitude (1 + cos(pi r_i)), v_i(0) = 0.
    pub fn default_initial(&self) -> IntervalVector {
        let pi = Interval::new(
            std::f64::consts::PI.next_down(),
            std::f64::consts::PI.next_up(),
        );
        let amp = Interval::point(self.amplitude);
        let mut y = IntervalVector::zeros(2 * self.n);
        for i in 0..self.n {
            y[i] = amp * (Interval::one() + cos_enclosure(pi * self.r[i]));
        }
        y
    }
}

/// `fvks(d,N)` with the default domain length 1 and amplitude 100.
pub fn make_fvks(d: u32, n: usize) -> Result<ProblemSpec, ProblemError> {
    make_fvks_with(d, n, 1.0, 100.0)
}

/// `fvks(d,N)` with explicit domain length and initial amplitude.
/// Rejects d < 1 and N < 2.
pub fn make_fvks_with(
    d: u32,
    n: usize,
    l_domain: f64,
    amplitude: f64,
) -> Result<ProblemSpec, ProblemError> {
    if d < 1 || n < 2 {
        return Err(ProblemError::BadGrid { d, n });
    }
    if !l_domain.is_finite() || l_domain <= 0.0 {
        return Err(ProblemError::NonFinite("l_domain"));
    }
    if !amplitude.is_finite() {
        return Err(ProblemError::NonFinite("amplitude"));
    }
    let mut weights = vec![2u32; n];
    weights.extend(std::iter::repeat(1u32).take(n));
    let qh = make_type(&weights, 1)?;

    let h = Interval::point(l_domain) / Interval::point(n as f64);
    let h2 = h.powi(2);
    // r_i = (i - 1/2) h as (2i - 1) h / 2; the halving is exact.
    let r: Vec<Interval> = (1..=n)
        .map(|i| Interval::point((2 * i - 1) as f64) * h * Interval::point(0.5))
        .collect();
    let face = |i: usize| Interval::point(i as f64) * h;
    let row_weight = |i: usize| {
        r[i].powi(d - 1)
            .recip()
            .expect("positive control radius")
    };
    let a_plus: Vec<Interval> = (0..n)
        .map(|i| row_weight(i) * face(i + 1).powi(d - 1) / h2)
        .collect();
    let mut a_minus: Vec<Interval> = (0..n)
        .map(|i| row_weight(i) * face(i).powi(d - 1) / h2)
        .collect();
    // Row 0 has no interior face: no-flux boundary.
    a_minus[0] = Interval::zero();

    let model = Fvks {
        qh,
        d,
        n,
        l_domain,
        amplitude,
        r,
        a_plus,
        a_minus,
    };
    let default_config = l_domain == 1.0 && amplitude == 100.0;
    let dir0 = ChartKind::Directional {
        index: 0,
        sign: Sign::Plus,
    };
    let mut runs = Vec::new();
    if default_config {
        match (d, n) {
            (2, 4) => runs.push(ReferenceRun {
                label: "dir chart, default data",
                chart: dir0,
                start: ReferenceStart::DefaultData,
                expected_eps: None,
                expected_tau_n: None,
                expected_t_max: Interval::new(
                    0.052_637_126_736_797_233,
                    0.052_639_096_803_538_601,
                ),
            }),
            (3, 4) => runs.push(ReferenceRun {
                label: "dir chart, default data",
                chart: dir0,
                start: ReferenceStart::DefaultData,
                expected_eps: None,
                expected_tau_n: None,
                expected_t_max: Interval::new(
                    0.044_016_343_797_319_82,
                    0.044_016_564_692_126_309,
                ),
            }),
            (3, 11) => runs.push(ReferenceRun {
                label: "dir chart, default data",
                chart: dir0,
                start: ReferenceStart::DefaultData,
                expected_eps: None,
                expected_tau_n: None,
                expected_t_max: Interval::new(
                    0.040_731_730_763_463_577,
                    0.040_731_730_868_847_683,
                ),
            }),
            (4, 4) => {
                runs.push(ReferenceRun {
                    label: "dir chart, default data",
                    chart: dir0,
                    start: ReferenceStart::DefaultData,
                    expected_eps: Some(7.778_796_406_007_118_9e-7),
                    expected_tau_n: Some(2.266_003_030_433_192_5),
                    expected_t_max: Interval::new(
                        0.041_634_995_298_971_515,
                        0.041_635_093_439_395_401,
                    ),
                });
                runs.push(ReferenceRun {
                    label: "para chart, default data",
                    chart: ChartKind::QuasiParabolic,
                    start: ReferenceStart::DefaultData,
                    expected_eps: None,
                    expected_tau_n: None,
                    expected_t_max: Interval::new(
                        0.041_635_002_136_609_429,
                        0.041_635_154_750_508_511,
                    ),
                });
            }
            _ => {}
        }
    }
    Ok(ProblemSpec {
        id: format!("fvks({d},{n})"),
        model: ProblemModel::Fvks(model),
        reference_runs: runs,
    })
}

impl VectorFieldModel for Fvks {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn qh_type(&self) -> &QHType {
        &self.qh
    }

    fn eval_f<S: Scalar>(&self, y: &[S]) -> Vec<S> {
        self.eval_f_tilde(y, &S::one())
    }

    fn eval_f_tilde<S: Scalar>(&self, w: &[S], q: &S) -> Vec<S> {
        let n = self.n;
        assert_eq!(w.len(), 2 * n);
        let (u, v) = w.split_at(n);
        let mut out = Vec::with_capacity(2 * n);
        // u rows: q-weighted diffusion minus unweighted advection.
        for i in 0..n {
            let mut dif = S::zero();
            let mut adv = S::zero();
            if i + 1 < n {
                let a = S::from_interval(self.a_plus[i]);
                dif = dif + a.clone() * (u[i + 1].clone() - u[i].clone());
                adv = adv + a * (v[i + 1].clone() - v[i].clone()) * u[i].clone();
            }
            if i > 0 {
                let a = S::from_interval(self.a_minus[i]);
                dif = dif - a.clone() * (u[i].clone() - u[i - 1].clone());
                // Upwind value from the inner side, including at the wall.
                adv = adv - a * (v[i].clone() - v[i - 1].clone()) * u[i - 1].clone();
            }
            out.push(q.clone() * dif - adv);
        }
        // v rows: q-weighted diffusion and decay, plus the source u.
        for i in 0..n {
            let mut dif = S::zero();
            if i + 1 < n {
                dif = dif + S::from_interval(self.a_plus[i]) * (v[i + 1].clone() - v[i].clone());
            }
            if i > 0 {
                dif = dif - S::from_interval(self.a_minus[i]) * (v[i].clone() - v[i - 1].clone());
            }
            out.push(q.clone() * dif - q.clone() * v[i].clone() + u[i].clone());
        }
        out
    }

    fn supports_dir_chart(&self, index: usize, sign: Sign) -> bool {
        index == 0 && sign == Sign::Plus
    }

    fn eval_f_hat<S: Scalar>(&self, s: &S, z: &[S], index: usize, _sign: Sign) -> Vec<S> {
        assert_eq!(index, 0);
        let n = self.n;
        assert_eq!(z.len(), 2 * n - 1);
        // Chart slot pinned to 1; remaining coordinates follow in order.
        let mut x: Vec<S> = Vec::with_capacity(n);
        x.push(S::one());
        x.extend_from_slice(&z[..n - 1]);
        let y = &z[n - 1..];
        let mut fu = Vec::with_capacity(n);
        let mut fv = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = S::zero();
            if i + 1 < n {
                let a = S::from_interval(self.a_plus[i]);
                acc = acc
                    + a * (s.clone() * (x[i + 1].clone() - x[i].clone())
                        - (y[i + 1].clone() - y[i].clone()) * x[i].clone());
            }
            if i > 0 {
                let a = S::from_interval(self.a_minus[i]);
                acc = acc
                    - a * (s.clone() * (x[i].clone() - x[i - 1].clone())
                        - (y[i].clone() - y[i - 1].clone()) * x[i - 1].clone());
            }
            fu.push(acc);
            let mut dif = S::zero();
            if i + 1 < n {
                dif = dif + S::from_interval(self.a_plus[i]) * (y[i + 1].clone() - y[i].clone());
            }
            if i > 0 {
                dif = dif - S::from_interval(self.a_minus[i]) * (y[i].clone() - y[i - 1].clone());
            }
            fv.push(s.clone() * dif - s.clone() * y[i].clone() + x[i].clone());
        }
        fu.extend(fv);
        fu
    }
}

// ---------------------------------------------------------------------------

/// The static registry backing the CLI: every problem with published
/// reference data, under its addressable id.
pub fn builtin_problems() -> Vec<ProblemSpec> {
    vec![
        make_kk_simple(),
        make_kk_default(),
        make_fvks(2, 4).expect("static grid"),
        make_fvks(3, 4).expect("static grid"),
        make_fvks(3, 11).expect("static grid"),
        make_fvks(4, 4).expect("static grid"),
    ]
}

/// Cosine enclosure by a degree-38 Taylor polynomial with Lagrange
/// remainder, clamped into [-1, 1]. Tight for |x| up to a few radians,
/// which covers pi times any control radius on a unit-scale domain.
fn cos_enclosure(x: Interval) -> Interval {
    const TERMS: u32 = 20;
    let z = x.powi(2);
    // Factorials as intervals: (2j)! overflows integers past j = 10.
    let mut fact = vec![Interval::one()];
    for k in 1..=(2 * TERMS) {
        let prev = *fact.last().expect("seeded");
        fact.push(prev * Interval::point(k as f64));
    }
    let mut acc = Interval::zero();
    for j in (0..TERMS).rev() {
        let coeff = fact[(2 * j) as usize].recip().expect("positive factorial");
        let signed = if j % 2 == 0 { coeff } else { -coeff };
        acc = acc * z + signed;
    }
    let tail = (z.powi(TERMS) / fact[(2 * TERMS) as usize]).mag();
    let enclosed = acc + Interval::new(-tail, tail);
    let unit = Interval::new(-1.0, 1.0);
    enclosed.intersect(&unit).unwrap_or(unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compact::{dir_forward, CompactChart};
    use crate::field::desing_para;

    fn assert_tight(iv: Interval, value: f64, tol: f64) {
        assert!(
            iv.contains(value) && iv.width() <= tol,
            "{iv:?} should tightly contain {value}"
        );
    }

    #[test]
    fn kk_simple_point_value_and_scaling_law() {
        let spec = make_kk_simple();
        let f = spec
            .model
            .eval_f(&[Interval::one(), Interval::one()]);
        assert_eq!(f[0].lo(), 0.0);
        assert_eq!(f[0].hi(), 0.0);
        assert_tight(f[1], 1.0 / 3.0, 1e-15);

        // f(r u, r^2 v) = (r^2 f1, r^3 f2) at r = 2: both routes enclose
        // the same exact values, so the enclosures must intersect.
        let scaled = spec
            .model
            .eval_f(&[Interval::point(2.0), Interval::point(4.0)]);
        let direct = [
            f[0] * Interval::point(4.0),
            f[1] * Interval::point(8.0),
        ];
        for (a, b) in scaled.iter().zip(direct.iter()) {
            assert!(a.intersect(b).is_some(), "{a:?} vs {b:?}");
            assert!(a.width() < 1e-14);
        }
    }

    #[test]
    fn kk_default_states_are_equilibria() {
        let spec = make_kk_default();
        let ProblemModel::Kk(ref m) = spec.model else {
            panic!("kk model expected");
        };
        let p = m.params();
        assert_tight(p.u_right, 1.428_490_141_407_97, 1e-9);
        assert_tight(p.v_right, 0.142_547_988_862_053_33, 1e-9);
        for (u, v) in [(p.u_left, p.v_left), (p.u_right, p.v_right)] {
            let f = spec.model.eval_f(&[u, v]);
            assert!(f[0].contains(0.0), "f1 at state: {f:?}");
            assert!(f[1].contains(0.0), "f2 at state: {f:?}");
        }
    }

    #[test]
    fn kk_principal_part_is_kk_simple() {
        let kk = make_kk_default().model;
        let simple = make_kk_simple().model;
        for (a, b) in [(0.7, -0.3), (1.2, 0.5), (-0.4, 0.9)] {
            let x = [Interval::point(a), Interval::point(b)];
            let got = kk.eval_f_tilde(&x, &Interval::zero());
            let want = simple.eval_f_tilde(&x, &Interval::zero());
            for (g, w) in got.iter().zip(want.iter()) {
                assert_eq!(g.lo(), w.lo());
                assert_eq!(g.hi(), w.hi());
            }
        }
    }

    #[test]
    fn kk_simple_has_four_horizon_equilibria() {
        let field = desing_para(make_kk_simple().model);
        // Horizon x1^4 + x2^2 = 1, parametrized once around; g is tangent
        // there, so zeros of the tangential component are equilibria.
        let point = |psi: f64| {
            let c = psi.cos();
            let x1 = c.abs().sqrt().copysign(c);
            [x1, psi.sin()]
        };
        let tangential = |psi: f64| {
            let x = point(psi);
            let g = field.eval_g_generic::<f64>(&x);
            let normal = [4.0 * x[0].powi(3), 2.0 * x[1]];
            g[0] * (-normal[1]) + g[1] * normal[0]
        };
        let samples = 4000;
        let mut zeros = Vec::new();
        for k in 0..samples {
            let a = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            let b = 2.0 * std::f64::consts::PI * (k + 1) as f64 / samples as f64;
            let (ta, tb) = (tangential(a), tangential(b));
            if ta == 0.0 || ta * tb >= 0.0 {
                continue;
            }
            let (mut lo, mut hi) = (a, b);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if tangential(lo) * tangential(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        assert_eq!(zeros.len(), 4, "zeros at {zeros:?}");

        let mut sinks = Vec::new();
        let mut sources = 0;
        let mut saddles = 0;
        for &psi in &zeros {
            let x = point(psi);
            let j = field.eval_dg(&IntervalVector::from_points(&x));
            let (a, b, c, d) = (
                j[(0, 0)].mid(),
                j[(0, 1)].mid(),
                j[(1, 0)].mid(),
                j[(1, 1)].mid(),
            );
            let trace = a + d;
            let det = a * d - b * c;
            if det < 0.0 {
                saddles += 1;
            } else if trace < 0.0 {
                sinks.push(x);
            } else {
                sources += 1;
            }
        }
        assert_eq!(saddles, 2);
        assert_eq!(sources, 1);
        assert_eq!(sinks.len(), 1);
        let sink = sinks[0];
        assert!((sink[0] - 0.989_136_995_894_977_4).abs() < 1e-9);
        assert!((sink[1] - 0.206_758_557_005_180_5).abs() < 1e-9);
    }

    #[test]
    fn kk_chart_velocities_match_frozen_samples() {
        // Frozen reference evaluations of the parabolic chart velocity,
        // computed independently in extended precision.
        let simple = desing_para(make_kk_simple().model);
        let x = IntervalVector::from_points(&[-0.1, 0.0001]);
        let g = simple.eval_g(&x);
        assert_tight(g[0], 2.474_750_907_583_334e-3, 1e-12);
        assert_tight(g[1], -8.335_635_25e-5, 1e-12);
        assert_tight(simple.dt_dtau(&x), 0.250_049_997_498_499_93, 1e-12);

        let kk = desing_para(make_kk_default().model);
        let x = IntervalVector::from_points(&[-0.1, -0.8]);
        let g = kk.eval_g(&x);
        assert_tight(g[0], 0.477_489_849_022_657, 1e-12);
        assert_tight(g[1], 0.013_885_774_958_897_02, 1e-12);
        assert_tight(kk.dt_dtau(&x), 0.262_753_992_5, 1e-12);
    }

    #[test]
    fn fvks_flat_state_reduces_to_decay_and_source() {
        let spec = make_fvks(3, 5).expect("grid");
        let big_u = 7.0;
        let big_v = 2.0;
        let mut w = vec![Interval::point(big_u); 5];
        w.extend(vec![Interval::point(big_v); 5]);
        let f = spec.model.eval_f(&w);
        for i in 0..5 {
            assert_eq!(f[i].lo(), 0.0, "u row {i}");
            assert_eq!(f[i].hi(), 0.0, "u row {i}");
            assert_eq!(f[5 + i].lo(), big_u - big_v, "v row {i}");
            assert_eq!(f[5 + i].hi(), big_u - big_v, "v row {i}");
        }
    }

    #[test]
    fn fvks_stencil_is_shared_between_components() {
        let spec = make_fvks(3, 5).expect("grid");
        let n = 5;
        let one = Interval::one();
        // u-block response with v = 0 gives the pure diffusion matrix;
        // v-block response with u = 0 gives diffusion minus identity.
        for j in 0..n {
            let mut wu = vec![Interval::zero(); 2 * n];
            wu[j] = one;
            let fu = spec.model.eval_f_tilde(&wu, &one);
            let mut wv = vec![Interval::zero(); 2 * n];
            wv[n + j] = one;
            let fv = spec.model.eval_f_tilde(&wv, &one);
            for i in 0..n {
                let vv = if i == j {
                    fv[n + i] + one
                } else {
                    fv[n + i]
                };
                assert_eq!(fu[i].lo(), vv.lo(), "col {j} row {i}");
                assert_eq!(fu[i].hi(), vv.hi(), "col {j} row {i}");
            }
        }
    }

    #[test]
    fn fvks_one_dimensional_stencil_is_exact() {
        let spec = make_fvks(1, 4).expect("d = 1 allowed");
        let ProblemModel::Fvks(ref m) = spec.model else {
            panic!("fvks model expected");
        };
        // h = 1/4 exactly, so every coefficient is exactly 16.
        for i in 0..4 {
            assert_eq!(m.coeff_plus(i).lo(), 16.0);
            assert_eq!(m.coeff_plus(i).hi(), 16.0);
            if i > 0 {
                assert_eq!(m.coeff_minus(i).lo(), 16.0);
            }
        }
        assert_eq!(m.coeff_minus(0).lo(), 0.0);
        assert_eq!(m.coeff_minus(0).hi(), 0.0);
    }

    #[test]
    fn fvks_rejects_bad_grids() {
        assert!(matches!(
            make_fvks(0, 4),
            Err(ProblemError::BadGrid { .. })
        ));
        assert!(matches!(
            make_fvks(3, 1),
            Err(ProblemError::BadGrid { .. })
        ));
        assert!(matches!(
            make_fvks_with(3, 4, f64::NAN, 100.0),
            Err(ProblemError::NonFinite("l_domain"))
        ));
    }

    #[test]
    fn fvks_small_grid_frozen_values() {
        let spec = make_fvks(2, 2).expect("grid");
        let m = &spec.model;
        // Hand-expanded two-cell stencil: a_plus = (8, 16/3),
        // a_minus = (0, 8/3).
        let ProblemModel::Fvks(ref fv) = m else {
            panic!("fvks model expected");
        };
        assert_eq!(fv.coeff_plus(0).lo(), 8.0);
        assert_eq!(fv.coeff_plus(0).hi(), 8.0);
        assert_tight(fv.coeff_minus(1), 8.0 / 3.0, 1e-14);

        let s = Interval::point(0.5);
        let z = [
            Interval::point(2.0),
            Interval::point(0.25),
            Interval::point(-0.5),
        ];
        let fhat = m.eval_f_hat(&s, &z, 0, Sign::Plus);
        assert_eq!(fhat[0].lo(), 10.0);
        assert_eq!(fhat[0].hi(), 10.0);
        assert_tight(fhat[1], -10.0 / 3.0, 1e-13);
        assert_eq!(fhat[2].lo(), -2.125);
        assert_eq!(fhat[2].hi(), -2.125);
        assert_tight(fhat[3], 3.25, 1e-13);

        let w = [
            Interval::point(1.0),
            Interval::point(3.0),
            Interval::point(0.5),
            Interval::point(-0.25),
        ];
        let q = Interval::point(0.5);
        let ft = m.eval_f_tilde(&w, &q);
        assert_eq!(ft[0].lo(), 14.0);
        assert_eq!(ft[0].hi(), 14.0);
        assert_tight(ft[1], -14.0 / 3.0, 1e-13);
        assert_eq!(ft[2].lo(), -2.25);
        assert_eq!(ft[2].hi(), -2.25);
        assert_tight(ft[3], 4.125, 1e-13);
    }

    #[test]
    fn fvks_default_data_transforms_into_dir_chart() {
        let spec = make_fvks(4, 4).expect("grid");
        let ProblemModel::Fvks(ref m) = spec.model else {
            panic!("fvks model expected");
        };
        let y0 = m.default_initial();
        let u1 = 100.0 * (1.0 + (std::f64::consts::PI / 8.0).cos());
        assert_tight(y0[0], u1, 1e-10);

        let chart = CompactChart::directional(m.qh_type().clone(), 0, Sign::Plus)
            .expect("chart");
        let (s0, x0) = dir_forward(&y0, &chart).expect("positive u_1");
        assert_tight(s0, 1.0 / u1.sqrt(), 1e-12);
        for i in 0..3 {
            let ui = 100.0 * (1.0 + (std::f64::consts::PI * (2.0 * (i + 2) as f64 - 1.0) / 8.0).cos());
            assert_tight(x0[i], ui / u1, 1e-10);
        }
        for i in 3..7 {
            assert_eq!(x0[i].lo(), 0.0);
            assert_eq!(x0[i].hi(), 0.0);
        }
    }

    #[test]
    fn cosine_enclosure_hits_reference_points() {
        let c0 = cos_enclosure(Interval::zero());
        assert_eq!(c0.lo(), 1.0);
        assert_eq!(c0.hi(), 1.0);
        let third = cos_enclosure(Interval::point(std::f64::consts::PI / 3.0));
        assert_tight(third, 0.5, 1e-14);
        let pi = Interval::new(
            std::f64::consts::PI.next_down(),
            std::f64::consts::PI.next_up(),
        );
        let cpi = cos_enclosure(pi);
        assert!(cpi.contains(-1.0));
        assert!(cpi.width() < 1e-14);
    }

    #[test]
    fn registry_ids_are_unique_and_stable() {
        let probs = builtin_problems();
        let ids: Vec<&str> = probs.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(
            ids,
            [
                "kk-simple",
                "kk",
                "fvks(2,4)",
                "fvks(3,4)",
                "fvks(3,11)",
                "fvks(4,4)"
            ]
        );
        for p in &probs {
            assert!(!p.reference_runs.is_empty(), "{} lacks references", p.id);
        }
    }
}
