//! Brute-force dense references for tests. Everything here goes through
//! explicit Kronecker assembly or explicit generators with nalgebra LU/QR and
//! shares no kernels with the solver paths it checks.

use nalgebra::DMatrix;

use crate::brad::Pole;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ONE, ZERO};

pub const SYLVESTER_LIMIT: usize = 4096;
pub const KRON_LIMIT: usize = 2048;
pub const KRYLOV_LIMIT: usize = 256;

fn kron(x: &CMat, y: &CMat) -> CMat {
    let (p, q) = x.shape();
    let (r, s) = y.shape();
    let mut out = CMat::zeros(p * r, q * s);
    for i in 0..p {
        for j in 0..q {
            let xij = x[(i, j)];
            if xij != ZERO {
                out.view_mut((i * r, j * s), (r, s)).copy_from(&(y * xij));
            }
        }
    }
    out
}

fn vec_of(m: &CMat) -> CMat {
    CMat::from_column_slice(m.len(), 1, m.as_slice())
}

fn unvec(v: &CMat, r: usize, c: usize) -> CMat {
    CMat::from_column_slice(r, c, v.as_slice())
}

fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

fn lu_solve(m: CMat, rhs: &CMat) -> Option<CMat> {
    let scale = m.iter().fold(0.0f64, |s, z| s.max(z.norm()));
    let lu = m.lu();
    let u = lu.u();
    let n = u.nrows();
    if (0..n).any(|i| u[(i, i)].norm() <= 1e3 * f64::EPSILON * scale * n as f64) {
        return None;
    }
    lu.solve(rhs)
}

/// Solves `A X - X B = C` through `(I ⊗ A - B^T ⊗ I) vec(X) = vec(C)`.
pub fn dense_sylvester(a: &CMat, b: &CMat, c: &CMat) -> Result<CMat> {
    let (n, m) = (a.nrows(), b.nrows());
    if c.shape() != (n, m) || !a.is_square() || !b.is_square() {
        return Err(Error::dims("dense_sylvester", "A, B and C have inconsistent shapes"));
    }
    if n * m > SYLVESTER_LIMIT {
        return Err(Error::SizeGuard {
            op: "dense_sylvester",
            size: n * m,
            limit: SYLVESTER_LIMIT,
        });
    }
    let k = kron(&eye(m), a) - kron(&b.transpose(), &eye(n));
    let x = lu_solve(k, &vec_of(c)).ok_or(Error::SpectraOverlap)?;
    Ok(unvec(&x, n, m))
}

fn kron_operator(coeffs: &[CMat], a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let b = coeffs.first().map(|c| c.nrows()).unwrap_or(0);
    if n * b > KRON_LIMIT {
        return Err(Error::SizeGuard {
            op: "kron_operator",
            size: n * b,
            limit: KRON_LIMIT,
        });
    }
    let mut power = eye(n);
    let mut total = CMat::zeros(n * b, n * b);
    for (i, g) in coeffs.iter().enumerate() {
        if i > 0 {
            power = &power * a;
        }
        total += kron(&g.transpose(), &power);
    }
    Ok(total)
}

/// `Σ A^i V Γ_i` via `(Σ Γ_i^T ⊗ A^i) vec(V)`.
pub fn dense_apply_kron(coeffs: &[CMat], a: &CMat, v: &CMat) -> Result<CMat> {
    let k = kron_operator(coeffs, a)?;
    Ok(unvec(&(k * vec_of(v)), v.nrows(), v.ncols()))
}

/// Inverse of [`dense_apply_kron`].
pub fn dense_apply_inv_kron(coeffs: &[CMat], a: &CMat, v: &CMat) -> Result<CMat> {
    let k = kron_operator(coeffs, a)?;
    let x = lu_solve(k, &vec_of(v)).ok_or(Error::InvalidPolynomialOnSpectrum)?;
    Ok(unvec(&x, v.nrows(), v.ncols()))
}

/// `∏ (A - ξ_j I)` assembled densely.
pub fn dense_scalar_poly(a: &CMat, roots: &[C64]) -> CMat {
    let n = a.nrows();
    roots.iter().fold(eye(n), |acc, &r| acc * (a - eye(n) * r))
}

/// `Q(A)^{-1} (Σ A^i V Γ_i)`.
pub fn dense_apply_rational_kron(coeffs: &[CMat], roots: &[C64], a: &CMat, v: &CMat) -> Result<CMat> {
    let w = dense_apply_kron(coeffs, a, v)?;
    lu_solve(dense_scalar_poly(a, roots), &w).ok_or(Error::PoleOnSpectrum {
        pole: roots.first().copied().unwrap_or(ZERO),
    })
}

/// `Q(A) (Σ Γ_i^T ⊗ A^i)^{-1} vec(V)`.
pub fn dense_apply_rational_inv_kron(coeffs: &[CMat], roots: &[C64], a: &CMat, v: &CMat) -> Result<CMat> {
    let w = dense_apply_inv_kron(coeffs, a, v)?;
    Ok(dense_scalar_poly(a, roots) * w)
}

fn orthonormalize_against(q: &CMat, w: CMat) -> CMat {
    let mut w = w;
    for _ in 0..2 {
        if q.ncols() > 0 {
            let h = q.adjoint() * &w;
            w -= q * h;
        }
    }
    w
}

/// Orthonormal basis of the block rational Krylov space with poles
/// `ξ_0 = start` and `poles`, built from the generators `A^i Q(A)^{-1} V0`
/// (`Q` the product over finite poles) for `i < 1 + poles.len()`.
pub fn dense_rational_krylov_basis(a: &CMat, v0: &CMat, start: Pole, poles: &[Pole]) -> Result<CMat> {
    let n = a.nrows();
    if n > KRYLOV_LIMIT {
        return Err(Error::SizeGuard {
            op: "dense_rational_krylov_basis",
            size: n,
            limit: KRYLOV_LIMIT,
        });
    }
    let b = v0.ncols();
    let k = 1 + poles.len();
    if b * k > n {
        return Err(Error::LuckyBreakdown { order: k });
    }
    let roots: Vec<C64> = std::iter::once(start)
        .chain(poles.iter().copied())
        .filter_map(|p| p.value())
        .collect();
    let mut w = lu_solve(dense_scalar_poly(a, &roots), v0).ok_or(Error::PoleOnSpectrum {
        pole: roots.first().copied().unwrap_or(ZERO),
    })?;
    let mut q = CMat::zeros(n, 0);
    for j in 0..k {
        if j > 0 {
            w = a * &q.columns((j - 1) * b, b);
        }
        let nrm = w.norm();
        let w2 = orthonormalize_against(&q, w.clone());
        let svd = w2.clone().svd(true, false);
        let smin = svd.singular_values.iter().fold(f64::INFINITY, |m, &s| m.min(s));
        if !(smin > 1e-12 * nrm) {
            return Err(if j == 0 {
                Error::RankDeficientStart
            } else {
                Error::LuckyBreakdown { order: j }
            });
        }
        let qr = w2.qr();
        let block = qr.q();
        let mut next = CMat::zeros(n, q.ncols() + b);
        next.columns_mut(0, q.ncols()).copy_from(&q);
        next.columns_mut(q.ncols(), b).copy_from(&block);
        q = next;
    }
    Ok(q)
}

/// `‖P_X - P_Y‖_2` for orthonormal `X`, `Y`.
pub fn projector_distance(x: &CMat, y: &CMat) -> f64 {
    let d = x * x.adjoint() - y * y.adjoint();
    d.svd(false, false).singular_values.iter().fold(0.0, |m: f64, &s| m.max(s))
}

/// Converts a real matrix for oracle use.
pub fn from_real(m: &DMatrix<f64>) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Identity matrix.
pub fn identity(n: usize) -> CMat {
    CMat::from_diagonal_element(n, n, ONE)
}
