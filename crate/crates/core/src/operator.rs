//! Linear operators with shifted-solve capability.
//!
//! The Krylov machinery only needs three things from a matrix: products,
//! shifted solves `(A - sI)^{-1}` and the adjoint operator.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{is_finite, CMat, C64, ZERO};

pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// `A * x` for a block of columns.
    fn apply(&self, x: &CMat) -> CMat;

    /// `(A - shift I)^{-1} rhs`.
    fn shifted_solve(&self, shift: C64, rhs: &CMat) -> Result<CMat>;

    fn adjoint(&self) -> Arc<dyn LinearOperator>;

    /// Cheap upper estimate of the 2-norm.
    fn norm_estimate(&self) -> f64;

    fn to_dense(&self) -> Option<CMat> {
        None
    }
}

fn check_rows(op: &'static str, n: usize, x: &CMat) -> Result<()> {
    if x.nrows() != n {
        return Err(Error::dims(op, format!("expected {n} rows, got {}", x.nrows())));
    }
    Ok(())
}

/// Dense matrices act as operators; every shifted solve factors `A - sI` afresh.
impl LinearOperator for CMat {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &CMat) -> CMat {
        self * x
    }

    fn shifted_solve(&self, shift: C64, rhs: &CMat) -> Result<CMat> {
        check_rows("shifted_solve", self.nrows(), rhs)?;
        let n = self.nrows();
        let mut m = self.clone();
        for i in 0..n {
            m[(i, i)] -= shift;
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let lu = m.lu();
        let u = lu.u();
        let tiny = 16.0 * f64::EPSILON * scale;
        if (0..n).any(|i| u[(i, i)].norm() <= tiny) {
            return Err(Error::PoleOnSpectrum { pole: shift });
        }
        match lu.solve(rhs) {
            Some(x) if is_finite(&x) => Ok(x),
            _ => Err(Error::PoleOnSpectrum { pole: shift }),
        }
    }

    fn adjoint(&self) -> Arc<dyn LinearOperator> {
        Arc::new(CMat::adjoint(self))
    }

    fn norm_estimate(&self) -> f64 {
        let one = (0..self.ncols())
            .map(|j| self.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let inf = (0..self.nrows())
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        (one * inf).sqrt()
    }

    fn to_dense(&self) -> Option<CMat> {
        Some(self.clone())
    }
}

/// Tridiagonal operator with `sub[i] = A[i+1, i]`, `diag[i] = A[i, i]`,
/// `sup[i] = A[i, i+1]`.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub sub: Vec<C64>,
    pub diag: Vec<C64>,
    pub sup: Vec<C64>,
}

impl Tridiagonal {
    pub fn new(sub: Vec<C64>, diag: Vec<C64>, sup: Vec<C64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty tridiagonal matrix".into()));
        }
        if sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::dims(
                "Tridiagonal",
                format!("diag {n}, sub {}, sup {}", sub.len(), sup.len()),
            ));
        }
        Ok(Self { sub, diag, sup })
    }

    /// Real Toeplitz tridiagonal `tridiag(lo, d, up)` of size n.
    pub fn toeplitz(n: usize, lo: f64, d: f64, up: f64) -> Result<Self> {
        let c = |x: f64| C64::new(x, 0.0);
        Self::new(
            vec![c(lo); n.saturating_sub(1)],
            vec![c(d); n],
            vec![c(up); n.saturating_sub(1)],
        )
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn scale(&self, s: f64) -> Self {
        let f = |v: &Vec<C64>| v.iter().map(|z| z * s).collect();
        Self {
            sub: f(&self.sub),
            diag: f(&self.diag),
            sup: f(&self.sup),
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if o.dim() != self.dim() {
            return Err(Error::dims("Tridiagonal::add", "size mismatch"));
        }
        let f = |a: &Vec<C64>, b: &Vec<C64>| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(Self {
            sub: f(&self.sub, &o.sub),
            diag: f(&self.diag, &o.diag),
            sup: f(&self.sup, &o.sup),
        })
    }

    /// `diag(d) * self`.
    pub fn row_scale(&self, d: &[f64]) -> Self {
        let n = self.dim();
        Self {
            sub: (0..n - 1).map(|i| self.sub[i] * d[i + 1]).collect(),
            diag: (0..n).map(|i| self.diag[i] * d[i]).collect(),
            sup: (0..n - 1).map(|i| self.sup[i] * d[i]).collect(),
        }
    }

    /// `self * diag(d)`.
    pub fn col_scale(&self, d: &[f64]) -> Self {
        let n = self.dim();
        Self {
            sub: (0..n - 1).map(|i| self.sub[i] * d[i]).collect(),
            diag: (0..n).map(|i| self.diag[i] * d[i]).collect(),
            sup: (0..n - 1).map(|i| self.sup[i] * d[i + 1]).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn conj_transpose(&self) -> Self {
        Self {
            sub: self.sup.iter().map(|z| z.conj()).collect(),
            diag: self.diag.iter().map(|z| z.conj()).collect(),
            sup: self.sub.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn dense(&self) -> CMat {
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i + 1, i)] = self.sub[i];
                m[(i, i + 1)] = self.sup[i];
            }
        }
        m
    }

    /// Partial-pivoting LU of `self - shift I`.
    pub fn factor(&self, shift: C64) -> Result<TridiagonalLu> {
        let n = self.dim();
        let mut dl = self.sub.clone();
        let mut d: Vec<C64> = self.diag.iter().map(|z| z - shift).collect();
        let mut du = self.sup.clone();
        let mut du2 = vec![ZERO; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        let scale = d
            .iter()
            .chain(dl.iter())
            .chain(du.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                if d[i] != ZERO {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        let tiny = 16.0 * f64::EPSILON * scale;
        if d.iter().any(|z| z.norm() <= tiny || !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::PoleOnSpectrum { pole: shift });
        }
        Ok(TridiagonalLu {
            dl,
            d,
            du,
            du2,
            swap,
        })
    }
}

#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    dl: Vec<C64>,
    d: Vec<C64>,
    du: Vec<C64>,
    du2: Vec<C64>,
    swap: Vec<bool>,
}

impl TridiagonalLu {
    pub fn solve_in_place(&self, b: &mut CMat) {
        let n = self.d.len();
        for c in 0..b.ncols() {
            let mut x = b.column_mut(c);
            for i in 0..n.saturating_sub(1) {
                if self.swap[i] {
                    let t = x[i];
                    x[i] = x[i + 1];
                    x[i + 1] = t - self.dl[i] * x[i];
                } else {
                    let t = x[i];
                    x[i + 1] -= self.dl[i] * t;
                }
            }
            x[n - 1] /= self.d[n - 1];
            if n > 1 {
                x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
            }
            for i in (0..n.saturating_sub(2)).rev() {
                x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
            }
        }
    }
}

impl LinearOperator for Tridiagonal {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &CMat) -> CMat {
        let n = self.dim();
        let mut y = CMat::zeros(n, x.ncols());
        for c in 0..x.ncols() {
            for i in 0..n {
                let mut s = self.diag[i] * x[(i, c)];
                if i > 0 {
                    s += self.sub[i - 1] * x[(i - 1, c)];
                }
                if i + 1 < n {
                    s += self.sup[i] * x[(i + 1, c)];
                }
                y[(i, c)] = s;
            }
        }
        y
    }

    fn shifted_solve(&self, shift: C64, rhs: &CMat) -> Result<CMat> {
        check_rows("shifted_solve", self.dim(), rhs)?;
        let lu = self.factor(shift)?;
        let mut x = rhs.clone();
        lu.solve_in_place(&mut x);
        if !is_finite(&x) {
            return Err(Error::PoleOnSpectrum { pole: shift });
        }
        Ok(x)
    }

    fn adjoint(&self) -> Arc<dyn LinearOperator> {
        Arc::new(self.conj_transpose())
    }

    fn norm_estimate(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].norm();
                if i > 0 {
                    s += self.sub[i - 1].norm() + self.sup[i - 1].norm();
                }
                if i + 1 < n {
                    s += self.sup[i].norm() + self.sub[i].norm();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    fn to_dense(&self) -> Option<CMat> {
        (self.dim() <= 4096).then(|| self.dense())
    }
}

pub type ApplyFn = dyn Fn(&CMat) -> CMat + Send + Sync;
pub type SolveFn = dyn Fn(C64, &CMat) -> Result<CMat> + Send + Sync;

/// Matrix-free operator defined by closures for `A`, `A^H` and their shifted solves.
#[derive(Clone)]
pub struct FnOperator {
    n: usize,
    norm: f64,
    apply: Arc<ApplyFn>,
    solve: Arc<SolveFn>,
    apply_adj: Arc<ApplyFn>,
    solve_adj: Arc<SolveFn>,
}

impl FnOperator {
    pub fn new(
        n: usize,
        norm: f64,
        apply: Arc<ApplyFn>,
        solve: Arc<SolveFn>,
        apply_adj: Arc<ApplyFn>,
        solve_adj: Arc<SolveFn>,
    ) -> Self {
        Self {
            n,
            norm,
            apply,
            solve,
            apply_adj,
            solve_adj,
        }
    }
}

impl std::fmt::Debug for FnOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnOperator").field("n", &self.n).finish()
    }
}

impl LinearOperator for FnOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &CMat) -> CMat {
        (self.apply)(x)
    }

    fn shifted_solve(&self, shift: C64, rhs: &CMat) -> Result<CMat> {
        check_rows("shifted_solve", self.n, rhs)?;
        let x = (self.solve)(shift, rhs)?;
        if x.shape() != rhs.shape() || !is_finite(&x) {
            return Err(Error::PoleOnSpectrum { pole: shift });
        }
        Ok(x)
    }

    fn adjoint(&self) -> Arc<dyn LinearOperator> {
        Arc::new(FnOperator {
            n: self.n,
            norm: self.norm,
            apply: self.apply_adj.clone(),
            solve: self.solve_adj.clone(),
            apply_adj: self.apply.clone(),
            solve_adj: self.solve.clone(),
        })
    }

    fn norm_estimate(&self) -> f64 {
        self.norm
    }
}

/// Dense matrix of an operator, built column by column when no dense form is cached.
pub fn dense_of(op: &dyn LinearOperator) -> CMat {
    op.to_dense()
        .unwrap_or_else(|| op.apply(&CMat::identity(op.dim(), op.dim())))
}
