//! Small dense helpers on top of nalgebra, all in complex double precision.

use nalgebra::{DMatrix, Dyn, Schur};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Promotes a real matrix to complex.
pub fn complexify(m: &DMatrix<f64>) -> CMat {
    m.map(|x| c64(x, 0.0))
}

pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Thin QR: `a = q * r` with `q` having orthonormal columns.
pub fn thin_qr(a: &CMat) -> (CMat, CMat) {
    let qr = a.clone().qr();
    (qr.q(), qr.r())
}

/// Full QR of a tall matrix: `q` is square unitary and `r` has the shape of `a`.
pub fn full_qr(a: &CMat) -> (CMat, CMat) {
    let (m, n) = a.shape();
    // Householder QR of [a | I] yields a complete unitary factor whose leading
    // columns reproduce the thin factorization of `a`.
    let mut aug = CMat::zeros(m, n + m);
    aug.view_mut((0, 0), (m, n)).copy_from(a);
    aug.view_mut((0, n), (m, m)).fill_with_identity();
    let qr = aug.qr();
    let q = qr.q();
    let r = q.adjoint() * a;
    (q, r)
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let s = a.clone().singular_values();
    let mut v: Vec<f64> = s.iter().copied().collect();
    v.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    v
}

pub fn sigma_min(a: &CMat) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

pub fn sigma_max(a: &CMat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Solves `a x = b` by partial-pivoting LU; `None` when a pivot vanishes or the
/// result is not finite.
pub fn solve(a: &CMat, b: &CMat) -> Option<CMat> {
    if a.nrows() < 32 {
        let x = a.clone().lu().solve(b)?;
        return is_finite(&x).then_some(x);
    }
    let lu = view(a).partial_piv_lu();
    let u = lu.U();
    if (0..u.nrows()).any(|i| u[(i, i)] == ZERO) {
        return None;
    }
    let x = from_faer(faer::linalg::solvers::Solve::solve(&lu, view(b)).as_ref());
    is_finite(&x).then_some(x)
}

fn view(m: &CMat) -> faer::MatRef<'_, C64> {
    faer::MatRef::from_column_major_slice(m.as_slice(), m.nrows(), m.ncols())
}

fn product<L, R>(a: faer::MatRef<'_, L>, b: faer::MatRef<'_, R>) -> CMat
where
    L: faer::traits::Conjugate<Canonical = C64>,
    R: faer::traits::Conjugate<Canonical = C64>,
{
    let mut out = CMat::zeros(a.nrows(), b.ncols());
    let (r, c) = out.shape();
    faer::linalg::matmul::matmul(
        faer::MatMut::from_column_major_slice_mut(out.as_mut_slice(), r, c),
        faer::Accum::Replace,
        a,
        b,
        ONE,
        faer::Par::Seq,
    );
    out
}

/// `a b`.
pub fn mul(a: &CMat, b: &CMat) -> CMat {
    product(view(a), view(b))
}

/// `a^H b`.
pub fn mul_adj(a: &CMat, b: &CMat) -> CMat {
    product(view(a).adjoint(), view(b))
}

/// `a b^H`.
pub fn mul_adj_right(a: &CMat, b: &CMat) -> CMat {
    product(view(a), view(b).adjoint())
}

/// Solves `x a = b`.
pub fn solve_right(a: &CMat, b: &CMat) -> Option<CMat> {
    solve(&a.transpose(), &b.transpose()).map(|x| x.transpose())
}

/// Complex Schur form `m = q t q^H` with `t` upper triangular.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub q: CMat,
    pub t: CMat,
}

impl SchurForm {
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Above this size the Schur basis is obtained from faer's eigenvectors.
const FAST_SCHUR_MIN: usize = 48;

/// Relative size of the discarded strictly lower part accepted from the
/// eigenvector-based Schur basis.
const FAST_SCHUR_TOL: f64 = 1e-13;

fn to_faer(m: &CMat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn upper_part(t: &mut CMat) -> f64 {
    let n = t.nrows();
    let mut low = 0.0;
    for j in 0..n {
        for i in j + 1..n {
            low += t[(i, j)].norm_sqr();
            t[(i, j)] = ZERO;
        }
    }
    low.sqrt()
}

fn schur_qr_algorithm(m: &CMat) -> Option<SchurForm> {
    let s = Schur::<C64, Dyn>::try_new(m.clone(), f64::EPSILON, 0)?;
    let (q, mut t) = s.unpack();
    upper_part(&mut t);
    Some(SchurForm { q, t })
}

/// Orthonormalized eigenvectors triangularize a diagonalizable matrix; the
/// result is accepted only when `Q^H M Q` is numerically upper triangular.
fn schur_from_eigenvectors(m: &CMat) -> Option<SchurForm> {
    let e = to_faer(m).eigen().ok()?;
    let x = from_faer(e.U());
    if !is_finite(&x) {
        return None;
    }
    let q = from_faer(view(&x).qr().compute_thin_Q().as_ref());
    let mut t = mul(&mul_adj(&q, m), &q);
    let low = upper_part(&mut t);
    (low <= FAST_SCHUR_TOL * fro(m)).then_some(SchurForm { q, t })
}

pub fn schur(m: &CMat) -> Option<SchurForm> {
    let n = m.nrows();
    if n == 0 {
        return Some(SchurForm {
            q: CMat::zeros(0, 0),
            t: CMat::zeros(0, 0),
        });
    }
    if !is_finite(m) {
        return None;
    }
    if n >= FAST_SCHUR_MIN {
        if let Some(s) = schur_from_eigenvectors(m) {
            return Some(s);
        }
    }
    schur_qr_algorithm(m)
}

pub fn eigenvalues(m: &CMat) -> Option<Vec<C64>> {
    if m.nrows() == 0 {
        return Some(Vec::new());
    }
    if !is_finite(m) {
        return None;
    }
    to_faer(m).eigenvalues().ok()
}

/// Eigenvalues and unit-norm eigenvectors (columns) of a general matrix.
pub fn eigen_decomposition(m: &CMat) -> Option<(Vec<C64>, CMat)> {
    if !is_finite(m) {
        return None;
    }
    let e = to_faer(m).eigen().ok()?;
    let vals: Vec<C64> = (0..m.nrows()).map(|i| e.S()[i]).collect();
    let mut x = from_faer(e.U());
    for k in 0..x.ncols() {
        let nrm = x.column(k).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            x.column_mut(k).iter_mut().for_each(|z| *z /= nrm);
        }
    }
    Some((vals, x))
}

/// Largest eigenpair of the Hermitian part of `h`.
pub fn hermitian_max_eigenpair(h: &CMat) -> Option<(f64, nalgebra::DVector<C64>)> {
    let n = h.nrows();
    if n == 0 || !is_finite(h) {
        return None;
    }
    let herm = (h + h.adjoint()).scale(0.5);
    let e = to_faer(&herm).self_adjoint_eigen(faer::Side::Lower).ok()?;
    let val = e.S()[n - 1].re;
    let vec = nalgebra::DVector::from_fn(n, |i, _| e.U()[(i, n - 1)]);
    Some((val, vec))
}

/// Rows `r0..r0+nr` and columns `c0..c0+nc` copied out.
pub fn sub(m: &CMat, r0: usize, c0: usize, nr: usize, nc: usize) -> CMat {
    m.view((r0, c0), (nr, nc)).into_owned()
}

/// Block identity column `e_i ⊗ I_b` of height `nblocks * b`.
pub fn block_unit(nblocks: usize, i: usize, b: usize) -> CMat {
    let mut e = CMat::zeros(nblocks * b, b);
    e.view_mut((i * b, 0), (b, b)).fill_with_identity();
    e
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}
