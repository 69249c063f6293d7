//! Interval vectors and matrices, plus the verified linear-algebra
//! primitives behind Lyapunov certification: interval Cholesky,
//! similarity-conjugated Gershgorin eigenvalue enclosures, and
//! negative-definiteness verification with a validated margin.

use super::{add_up, sub_down, Interval};
use nalgebra::DMatrix;
use std::ops::{Index, IndexMut};

/// Vector of intervals; encloses the set of member real vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalVector {
    e: Vec<Interval>,
}

impl IntervalVector {
    pub fn from_vec(e: Vec<Interval>) -> Self {
        Self { e }
    }

    pub fn from_points(v: &[f64]) -> Self {
        Self {
            e: v.iter().map(|&x| Interval::point(x)).collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            e: vec![Interval::zero(); n],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.e.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Interval] {
        &self.e
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.e.iter()
    }

    pub fn mid(&self) -> Vec<f64> {
        self.e.iter().map(|x| x.mid()).collect()
    }

    /// Enclosure of the Euclidean norm over all member vectors.
    pub fn norm2(&self) -> Interval {
        let mut s = Interval::zero();
        for x in &self.e {
            s = s + x.powi(2);
        }
        s.sqrt().expect("sum of squares is nonnegative")
    }

    /// Upper bound on the sup-norm over all members.
    pub fn norm_inf_upper(&self) -> f64 {
        self.e.iter().map(|x| x.mag()).fold(0.0, f64::max)
    }

    pub fn hull(&self, other: &IntervalVector) -> IntervalVector {
        assert_eq!(self.dim(), other.dim());
        Self {
            e: self
                .e
                .iter()
                .zip(&other.e)
                .map(|(a, b)| a.hull(b))
                .collect(),
        }
    }

    pub fn contains(&self, other: &IntervalVector) -> bool {
        self.dim() == other.dim()
            && self
                .e
                .iter()
                .zip(&other.e)
                .all(|(a, b)| a.contains_interval(b))
    }

    pub fn contains_in_interior(&self, other: &IntervalVector) -> bool {
        self.dim() == other.dim()
            && self
                .e
                .iter()
                .zip(&other.e)
                .all(|(a, b)| a.contains_in_interior(b))
    }

    pub fn inflate(&self, r: f64) -> IntervalVector {
        Self {
            e: self.e.iter().map(|x| x.inflate(r)).collect(),
        }
    }

    pub fn widen_ulp(&self) -> IntervalVector {
        Self {
            e: self.e.iter().map(|x| x.widen_ulp()).collect(),
        }
    }

    pub fn max_width(&self) -> f64 {
        self.e.iter().map(|x| x.width()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &IntervalVector) -> IntervalVector {
        assert_eq!(self.dim(), other.dim());
        Self {
            e: self.e.iter().zip(&other.e).map(|(a, b)| *a + *b).collect(),
        }
    }

    pub fn sub(&self, other: &IntervalVector) -> IntervalVector {
        assert_eq!(self.dim(), other.dim());
        Self {
            e: self.e.iter().zip(&other.e).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl Index<usize> for IntervalVector {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.e[i]
    }
}

impl IndexMut<usize> for IntervalVector {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.e[i]
    }
}

impl From<Vec<Interval>> for IntervalVector {
    fn from(e: Vec<Interval>) -> Self {
        Self { e }
    }
}

/// Row-major matrix of intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    e: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            e: vec![Interval::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Interval::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Interval>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c));
        Self {
            rows: r,
            cols: c,
            e: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = Interval::point(m[(i, j)]);
            }
        }
        out
    }

    pub fn mid_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].mid())
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> IntervalMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn add(&self, other: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.e.iter_mut().zip(&other.e) {
            *a = *a + *b;
        }
        out
    }

    pub fn sub(&self, other: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.e.iter_mut().zip(&other.e) {
            *a = *a - *b;
        }
        out
    }

    pub fn scale(&self, s: Interval) -> IntervalMatrix {
        let mut out = self.clone();
        for a in out.e.iter_mut() {
            *a = *a * s;
        }
        out
    }

    pub fn mul_mat(&self, other: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut s = Interval::zero();
                for k in 0..self.cols {
                    s = s + self[(i, k)] * other[(k, j)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &IntervalVector) -> IntervalVector {
        assert_eq!(self.cols, v.dim());
        let mut out = IntervalVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut s = Interval::zero();
            for k in 0..self.cols {
                s = s + self[(i, k)] * v[k];
            }
            out[i] = s;
        }
        out
    }

    /// Defensive symmetrization: entrywise (M + Mᵀ)/2.
    pub fn symmetrize(&self) -> IntervalMatrix {
        assert_eq!(self.rows, self.cols);
        let half = Interval::point(0.5);
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = (self[(i, j)] + self[(j, i)]) * half;
            }
        }
        out
    }

    pub fn max_width(&self) -> f64 {
        self.e.iter().map(|x| x.width()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for IntervalMatrix {
    type Output = Interval;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Interval {
        &self.e[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntervalMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Interval {
        &mut self.e[i * self.cols + j]
    }
}

/// Interval Cholesky test: returns true iff the factorization completes with
/// strictly positive pivots, which proves every member matrix is positive
/// definite.
pub fn cholesky_posdef(m: &IntervalMatrix) -> bool {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut l = IntervalMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)].powi(2);
        }
        if !(d.lo() > 0.0) {
            return false;
        }
        let piv = match d.sqrt() {
            Ok(p) => p,
            Err(_) => return false,
        };
        l[(j, j)] = piv;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            match s.checked_div(&piv) {
                Some(q) => l[(i, j)] = q,
                None => return false,
            }
        }
    }
    true
}

/// Enclosure of `A⁻¹` for a point matrix, via the Neumann-series residual
/// bound: with R ≈ A⁻¹ and E = I − RA, if ‖E‖∞ < 1 then
/// ‖A⁻¹ − R‖∞ ≤ ‖E‖∞·‖R‖∞/(1 − ‖E‖∞).
pub fn verified_inverse(a: &DMatrix<f64>) -> Option<IntervalMatrix> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let r = a.clone().lu().try_inverse()?;
    let r_int = IntervalMatrix::from_dmatrix(&r);
    let a_int = IntervalMatrix::from_dmatrix(a);
    let e = IntervalMatrix::identity(n).sub(&r_int.mul_mat(&a_int));
    let eta = inf_norm_upper(&e);
    if !(eta < 1.0) {
        return None;
    }
    let rho = inf_norm_upper(&r_int);
    // delta >= rho*eta/(1-eta), rounded up.
    let delta = (Interval::point(rho) * Interval::point(eta)
        / Interval::point(sub_down(1.0, eta)))
    .hi();
    let mut out = r_int;
    let pad = Interval::new(-delta, delta);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = out[(i, j)] + pad;
        }
    }
    Some(out)
}

/// Upper bound on the ∞-norm (max row sum of magnitudes).
fn inf_norm_upper(m: &IntervalMatrix) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..m.nrows() {
        let mut s = 0.0;
        for j in 0..m.ncols() {
            s = add_up(s, m[(i, j)].mag());
        }
        best = best.max(s);
    }
    best
}

/// Gershgorin discs of `m` merged into connected components.
/// Each component `(lo, hi, count)` contains exactly `count` eigenvalues of
/// every member matrix.
fn gershgorin_components(m: &IntervalMatrix) -> Vec<(f64, f64, usize)> {
    let n = m.nrows();
    let mut discs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let mut r: f64 = 0.0;
            for j in 0..n {
                if j != i {
                    r = add_up(r, m[(i, j)].mag());
                }
            }
            (sub_down(m[(i, i)].lo(), r), add_up(m[(i, i)].hi(), r))
        })
        .collect();
    discs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut comps: Vec<(f64, f64, usize)> = Vec::new();
    for (lo, hi) in discs {
        match comps.last_mut() {
            Some(c) if lo <= c.1 => {
                c.1 = c.1.max(hi);
                c.2 += 1;
            }
            _ => comps.push((lo, hi, 1)),
        }
    }
    comps
}

/// Enclosures of the extreme eigenvalues of a symmetric interval matrix,
/// valid for every symmetric member.
///
/// Strategy: diagonalize the midpoint, conjugate the interval matrix by the
/// approximate eigenbasis through a verified inverse (an exact similarity
/// for each member), and read merged Gershgorin components off the result.
pub fn sym_eig_bounds(m: &IntervalMatrix) -> (Interval, Interval) {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let msym = m.symmetrize();
    if n == 1 {
        return (msym[(0, 0)], msym[(0, 0)]);
    }
    let mid = {
        let mut a = msym.mid_dmatrix();
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    };
    let eig = nalgebra::linalg::SymmetricEigen::new(mid);
    let v = eig.eigenvectors;
    let conj = verified_inverse(&v).map(|w| w.mul_mat(&msym.mul_mat(&IntervalMatrix::from_dmatrix(&v))));
    let comps = match conj {
        Some(g) => gershgorin_components(&g),
        // Fallback: raw Gershgorin on the symmetrized matrix itself.
        None => gershgorin_components(&msym),
    };
    let first = comps.first().expect("nonempty spectrum");
    let last = comps.last().expect("nonempty spectrum");
    (
        Interval::new(first.0, first.1),
        Interval::new(last.0, last.1),
    )
}

/// Verifies that every symmetric member of `m` is negative definite.
///
/// Returns `(verified, c_A)` where on success `c_A` encloses `-λ_max` over
/// all members and `c_A.lo()` is a validated positive margin: every member
/// satisfies `A ≼ -c_A.lo()·I`. Verification attempts interval Cholesky of
/// `-M` first (tight), falling back to the Gershgorin-based eigenvalue
/// bounds (robust); the margin is sharpened by a bisected diagonal shift
/// when Gershgorin alone is inconclusive.
pub fn verify_negative_definite(m: &IntervalMatrix) -> (bool, Interval) {
    let msym = m.symmetrize();
    let neg = msym.scale(Interval::point(-1.0));
    let chol_ok = cholesky_posdef(&neg);
    let (_lmin, lmax) = sym_eig_bounds(&msym);
    let gersh_ok = lmax.hi() < 0.0;
    let verified = chol_ok || gersh_ok;
    if !verified {
        return (false, Interval::zero());
    }
    // -lmax enclosure from the eigenvalue bounds.
    let mut ca_lo = -lmax.hi();
    let ca_hi = -lmax.lo();
    if ca_lo <= 0.0 && chol_ok {
        // Gershgorin couldn't separate from zero; bisect the largest shift t
        // with -M - tI still positive definite.
        let mut lo = 0.0;
        let mut hi = ca_hi.max(1.0);
        for _ in 0..40 {
            let t = 0.5 * (lo + hi);
            let mut shifted = neg.clone();
            for i in 0..shifted.nrows() {
                shifted[(i, i)] = shifted[(i, i)] - Interval::point(t);
            }
            if cholesky_posdef(&shifted) {
                lo = t;
            } else {
                hi = t;
            }
        }
        ca_lo = lo;
    }
    let ca_hi = ca_hi.max(ca_lo);
    (true, Interval::new(ca_lo, ca_hi))
}

#[cfg(test)]
mod unit {
    use super::*;

    fn point_matrix(rows: &[&[f64]]) -> IntervalMatrix {
        IntervalMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Interval::point(v)).collect())
                .collect(),
        )
    }

    #[test]
    fn negdef_one_by_one() {
        let (ok, ca) = verify_negative_definite(&point_matrix(&[&[-2.0]]));
        assert!(ok);
        assert!(ca.contains(2.0));
    }

    #[test]
    fn singular_member_is_rejected() {
        let m = point_matrix(&[&[0.0, 0.0], &[0.0, -1.0]]);
        let (ok, _) = verify_negative_definite(&m);
        assert!(!ok);
    }

    #[test]
    fn negdef_with_margin_three() {
        let m = point_matrix(&[&[-4.0, 1.0], &[1.0, -4.0]]);
        let (ok, ca) = verify_negative_definite(&m);
        assert!(ok);
        assert!(ca.contains(3.0), "c_A = {ca:?}");
        assert!(ca.lo() > 2.9);
    }

    #[test]
    fn eig_bounds_on_classic_two_by_two() {
        let m = point_matrix(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let (lmin, lmax) = sym_eig_bounds(&m);
        assert!(lmin.contains(1.0), "lmin = {lmin:?}");
        assert!(lmax.contains(3.0), "lmax = {lmax:?}");
        assert!(lmin.width() < 1e-10);
        assert!(lmax.width() < 1e-10);
    }

    #[test]
    fn eig_bounds_identity_and_diag() {
        let (lmin, lmax) = sym_eig_bounds(&IntervalMatrix::identity(2));
        assert!(lmin.contains(1.0) && lmax.contains(1.0));
        let d = point_matrix(&[&[2.0, 0.0], &[0.0, 5.0]]);
        let (lmin, lmax) = sym_eig_bounds(&d);
        assert!(lmin.contains(2.0) && lmax.contains(5.0));
    }
}
