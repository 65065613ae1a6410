//! Block rational Arnoldi decompositions `A V K̲ = V H̲`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{fro, full_qr, mul, mul_adj, is_finite, sigma_min, singular_values, solve_right, sub, thin_qr, CMat, C64};
use crate::operator::LinearOperator;

/// Relative size of `K_{k-1,k-2}` accepted as zero by the reorder.
pub const REORDER_TOL: f64 = 1e-10;

/// Breakdown threshold on the new block's R factor relative to the candidate norm.
pub const BREAKDOWN_TOL: f64 = 16.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Pole {
    Finite(C64),
    Infinite,
}

impl Pole {
    pub fn finite(re: f64, im: f64) -> Self {
        Pole::Finite(C64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Pole::Infinite)
    }

    pub fn value(&self) -> Option<C64> {
        match self {
            Pole::Finite(z) => Some(*z),
            Pole::Infinite => None,
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            Pole::Finite(z) => Pole::Finite(z.conj()),
            Pole::Infinite => Pole::Infinite,
        }
    }
}

impl fmt::Display for Pole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pole::Finite(z) if z.im == 0.0 => write!(f, "{}", z.re),
            Pole::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            Pole::Infinite => write!(f, "inf"),
        }
    }
}

/// Orthonormal BRAD of order k: `V` is n×b(k+1), `K̲` and `H̲` are b(k+1)×bk.
#[derive(Debug, Clone)]
pub struct BradState {
    v: CMat,
    k_under: CMat,
    h_under: CMat,
    poles: Vec<Pole>,
    start_pole: Pole,
    b: usize,
    start_r: CMat,
}

fn gram_schmidt(v: &CMat, w: &mut CMat) -> CMat {
    let c1 = mul_adj(v, w);
    *w -= mul(v, &c1);
    let c2 = mul_adj(v, w);
    *w -= mul(v, &c2);
    c1 + c2
}

impl BradState {
    /// Order-0 decomposition spanning `(I - A/ξ_0)^{-1} V0`.
    pub fn init(a: &dyn LinearOperator, v0: &CMat, start_pole: Pole) -> Result<Self> {
        let n = a.dim();
        let b = v0.ncols();
        if v0.nrows() != n || b == 0 || b > n {
            return Err(Error::dims("brad::init", format!("start block is {}×{b}, operator {n}", v0.nrows())));
        }
        let w = match start_pole {
            Pole::Infinite => v0.clone(),
            Pole::Finite(xi) if xi == C64::new(0.0, 0.0) => a.shifted_solve(xi, v0)?,
            Pole::Finite(xi) => a.shifted_solve(xi, v0)? * (-xi),
        };
        let (q, r) = thin_qr(&w);
        let mut scaled = r.clone();
        for j in 0..b {
            let nrm = scaled.column(j).norm();
            if !(nrm > 0.0) || !nrm.is_finite() {
                return Err(Error::RankDeficientStart);
            }
            scaled.column_mut(j).unscale_mut(nrm);
        }
        let sv = singular_values(&scaled);
        if sv[b - 1] <= 1e-12 * sv[0] {
            return Err(Error::RankDeficientStart);
        }
        Ok(Self {
            v: q,
            k_under: CMat::zeros(b, 0),
            h_under: CMat::zeros(b, 0),
            poles: Vec::new(),
            start_pole,
            b,
            start_r: r,
        })
    }

    pub fn block_size(&self) -> usize {
        self.b
    }

    pub fn order(&self) -> usize {
        self.poles.len()
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    /// Full basis `V_{k+1}`.
    pub fn basis(&self) -> &CMat {
        &self.v
    }

    /// Leading `j` block columns of the basis.
    pub fn basis_blocks(&self, j: usize) -> CMat {
        self.v.columns(0, j * self.b).into_owned()
    }

    pub fn k_under(&self) -> &CMat {
        &self.k_under
    }

    pub fn h_under(&self) -> &CMat {
        &self.h_under
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn start_pole(&self) -> Pole {
        self.start_pole
    }

    /// R factor of the initial QR: the start block equals `V_1 R` when ξ_0 = ∞.
    pub fn start_r(&self) -> &CMat {
        &self.start_r
    }

    pub fn last_pole(&self) -> Option<Pole> {
        self.poles.last().copied()
    }

    /// Finite poles among ξ_0, ξ_1, …, ξ_k.
    pub fn finite_poles(&self) -> Vec<C64> {
        std::iter::once(self.start_pole)
            .chain(self.poles.iter().copied())
            .filter_map(|p| p.value())
            .collect()
    }

    /// Returns the decomposition extended by one block with pole `pole`.
    pub fn extend(&self, a: &dyn LinearOperator, pole: Pole) -> Result<Self> {
        let mut s = self.clone();
        s.extend_in_place(a, pole)?;
        Ok(s)
    }

    /// In-place [`BradState::extend`]; on error the state is left untouched.
    pub fn extend_in_place(&mut self, a: &dyn LinearOperator, pole: Pole) -> Result<()> {
        if a.dim() != self.dim() {
            return Err(Error::dims("brad::extend", "operator size changed"));
        }
        let b = self.b;
        let k = self.order();
        let last = self.v.columns(k * b, b).into_owned();
        let mut w = match pole {
            Pole::Infinite => a.apply(&last),
            Pole::Finite(xi) if xi == C64::new(0.0, 0.0) => a.shifted_solve(xi, &last)?,
            Pole::Finite(xi) => &last + a.shifted_solve(xi, &last)? * xi,
        };
        if !is_finite(&w) {
            return Err(Error::PoleOnSpectrum {
                pole: pole.value().unwrap_or(C64::new(f64::INFINITY, 0.0)),
            });
        }
        let wnorm = fro(&w);
        let mut coef = gram_schmidt(&self.v, &mut w);
        let (mut q, mut r) = thin_qr(&w);
        let d = gram_schmidt(&self.v, &mut q);
        let (q2, r2) = thin_qr(&q);
        coef += d * &r;
        r = r2 * r;
        q = q2;
        if wnorm == 0.0 || sigma_min(&r) < BREAKDOWN_TOL * wnorm || self.v.ncols() + b > self.dim() {
            return Err(Error::LuckyBreakdown { order: k + 1 });
        }
        let rows = b * (k + 2);
        let mut c = CMat::zeros(rows, b);
        c.view_mut((0, 0), (b * (k + 1), b)).copy_from(&coef);
        c.view_mut((b * (k + 1), 0), (b, b)).copy_from(&r);
        let mut t = CMat::zeros(rows, b);
        t.view_mut((k * b, 0), (b, b)).fill_with_identity();
        let (kc, hc) = match pole {
            Pole::Infinite => (t, c),
            Pole::Finite(xi) if xi == C64::new(0.0, 0.0) => (c, t),
            Pole::Finite(xi) => (&c - &t, &c * xi),
        };
        let mut kn = CMat::zeros(rows, b * (k + 1));
        let mut hn = CMat::zeros(rows, b * (k + 1));
        kn.view_mut((0, 0), (b * (k + 1), b * k)).copy_from(&self.k_under);
        hn.view_mut((0, 0), (b * (k + 1), b * k)).copy_from(&self.h_under);
        kn.view_mut((0, b * k), (rows, b)).copy_from(&kc);
        hn.view_mut((0, b * k), (rows, b)).copy_from(&hc);
        let mut vn = CMat::zeros(self.dim(), rows);
        vn.view_mut((0, 0), (self.dim(), b * (k + 1))).copy_from(&self.v);
        vn.view_mut((0, b * (k + 1)), (self.dim(), b)).copy_from(&q);
        self.v = vn;
        self.k_under = kn;
        self.h_under = hn;
        self.poles.push(pole);
        Ok(())
    }

    /// Swaps the last two poles when the second-to-last one is ∞, so the
    /// decomposition ends with an infinite pole.
    pub fn reorder_last_pole_to_inf(&self) -> Result<Self> {
        let mut s = self.clone();
        s.reorder_in_place()?;
        Ok(s)
    }

    pub fn reorder_in_place(&mut self) -> Result<()> {
        let k = self.order();
        let b = self.b;
        if k < 2 {
            return Err(Error::ReorderPrecondition(format!("order {k} has fewer than two poles")));
        }
        if !self.poles[k - 2].is_infinite() {
            return Err(Error::ReorderPrecondition("second-to-last pole is finite".into()));
        }
        let kk = sub(&self.k_under, (k - 1) * b, (k - 2) * b, b, b);
        let scale = fro(&self.k_under).max(f64::MIN_POSITIVE);
        if fro(&kk) > REORDER_TOL * scale {
            return Err(Error::ReorderPrecondition(format!(
                "subdiagonal block of K is not zero (relative size {:.3e})",
                fro(&kk) / scale
            )));
        }
        let cols = b * k;
        // Row rotation annihilating the last block row of K̲.
        let x = sub(&self.k_under, (k - 1) * b, (k - 1) * b, 2 * b, b);
        let (q1, _) = full_qr(&x);
        let q1h = q1.adjoint();
        for m in [&mut self.k_under, &mut self.h_under] {
            let rows = m.view(((k - 1) * b, 0), (2 * b, cols)).into_owned();
            m.view_mut(((k - 1) * b, 0), (2 * b, cols)).copy_from(&(&q1h * rows));
        }
        self.k_under.view_mut((k * b, 0), (b, cols)).fill(C64::new(0.0, 0.0));
        // Column rotation restoring the Hessenberg structure of H̲ (RQ of its last block row).
        let mrow = sub(&self.h_under, k * b, (k - 2) * b, b, 2 * b);
        let (qh, _) = full_qr(&mrow.adjoint());
        let mut z = CMat::zeros(2 * b, 2 * b);
        z.view_mut((0, 0), (2 * b, b)).copy_from(&qh.columns(b, b));
        z.view_mut((0, b), (2 * b, b)).copy_from(&qh.columns(0, b));
        let rows = b * (k + 1);
        for m in [&mut self.k_under, &mut self.h_under] {
            let c = m.view((0, (k - 2) * b), (rows, 2 * b)).into_owned();
            m.view_mut((0, (k - 2) * b), (rows, 2 * b)).copy_from(&(c * &z));
        }
        self.h_under.view_mut((k * b, (k - 2) * b), (b, b)).fill(C64::new(0.0, 0.0));
        self.k_under.view_mut((k * b, 0), (b, cols)).fill(C64::new(0.0, 0.0));
        let n = self.dim();
        let vv = self.v.view((0, (k - 1) * b), (n, 2 * b)).into_owned();
        self.v.view_mut((0, (k - 1) * b), (n, 2 * b)).copy_from(&(vv * q1));
        self.poles[k - 2] = self.poles[k - 1];
        self.poles[k - 1] = Pole::Infinite;
        Ok(())
    }

    fn leading_inverse_product(&self, m: &CMat) -> Result<CMat> {
        let k = self.order();
        let b = self.b;
        if !matches!(self.last_pole(), Some(Pole::Infinite)) {
            return Err(Error::NeedsInfinityPole);
        }
        let kk = sub(&self.k_under, 0, 0, b * k, b * k);
        let sv = singular_values(&kk);
        if sv.is_empty() || !(sv[sv.len() - 1] > 1e-14 * sv[0]) {
            return Err(Error::InvalidBrad("K_k is singular".into()));
        }
        solve_right(&kk, m).ok_or_else(|| Error::InvalidBrad("K_k is singular".into()))
    }

    /// `A_k = H_k K_k^{-1}`.
    pub fn projected_matrix(&self) -> Result<CMat> {
        let k = self.order();
        let b = self.b;
        self.leading_inverse_product(&sub(&self.h_under, 0, 0, b * k, b * k))
    }

    /// `e_{k+1}^T H̲ K_k^{-1}`, the coupling of the last basis block to the projection.
    pub fn residual_factor(&self) -> Result<CMat> {
        let k = self.order();
        let b = self.b;
        self.leading_inverse_product(&sub(&self.h_under, b * k, 0, b, b * k))
    }

    /// `‖A V K̲ - V H̲‖_F`.
    pub fn decomposition_residual(&self, a: &dyn LinearOperator) -> f64 {
        fro(&(a.apply(&(&self.v * &self.k_under)) - &self.v * &self.h_under))
    }

    /// Checks the structural invariants and returns the BRAD residual relative to
    /// `‖A‖‖K̲‖`.
    pub fn validate(&self, a: &dyn LinearOperator, tol: f64) -> Result<f64> {
        let b = self.b;
        let k = self.order();
        let ortho = fro(&(self.v.adjoint() * &self.v - CMat::identity(b * (k + 1), b * (k + 1))));
        if ortho > 1e-12 * ((b * (k + 1)) as f64).sqrt() {
            return Err(Error::InvalidBrad(format!("basis not orthonormal ({ortho:.3e})")));
        }
        for j in 0..k {
            for i in j + 2..=k {
                let kb = fro(&sub(&self.k_under, i * b, j * b, b, b));
                let hb = fro(&sub(&self.h_under, i * b, j * b, b, b));
                if kb > 0.0 || hb > 0.0 {
                    return Err(Error::InvalidBrad("pencil is not block Hessenberg".into()));
                }
            }
            let ks = sub(&self.k_under, (j + 1) * b, j * b, b, b);
            let hs = sub(&self.h_under, (j + 1) * b, j * b, b, b);
            let scale = fro(&ks).max(fro(&hs));
            let bad = match self.poles[j] {
                Pole::Infinite => fro(&ks) > tol * scale,
                Pole::Finite(xi) => fro(&(&ks * xi - &hs)) > tol * scale.max(xi.norm() * fro(&ks)),
            };
            if bad || scale == 0.0 {
                return Err(Error::InvalidBrad(format!("subdiagonal block {j} does not encode its pole")));
            }
        }
        let rel = self.decomposition_residual(a)
            / (a.norm_estimate() * fro(&self.k_under)).max(f64::MIN_POSITIVE);
        if rel > tol {
            return Err(Error::InvalidBrad(format!("decomposition residual {rel:.3e}")));
        }
        Ok(rel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use crate::testutil::{rand_mat, rng, shifted_mat};

    fn projector_distance(a: &CMat, b: &CMat) -> f64 {
        fro(&(a * a.adjoint() - b * b.adjoint()))
    }

    #[test]
    fn infinite_start_is_qr_of_block() {
        let mut r = rng(1);
        let a = rand_mat(&mut r, 10, 10);
        let v0 = rand_mat(&mut r, 10, 2);
        let s = BradState::init(&a, &v0, Pole::Infinite).unwrap();
        let p = s.basis().adjoint() * &v0;
        assert!(p[(1, 0)].norm() < 1e-14);
        assert!(fro(&(s.basis() * s.start_r() - &v0)) < 1e-13);
    }

    #[test]
    fn rank_deficient_start() {
        let mut r = rng(2);
        let a = rand_mat(&mut r, 6, 6);
        let c = rand_mat(&mut r, 6, 1);
        let v0 = CMat::from_fn(6, 2, |i, _| c[(i, 0)]);
        assert!(matches!(
            BradState::init(&a, &v0, Pole::Infinite),
            Err(Error::RankDeficientStart)
        ));
    }

    #[test]
    fn polynomial_case_has_identity_pattern() {
        let mut r = rng(3);
        let a = rand_mat(&mut r, 12, 12);
        let mut s = BradState::init(&a, &rand_mat(&mut r, 12, 2), Pole::Infinite).unwrap();
        for _ in 0..3 {
            s.extend_in_place(&a, Pole::Infinite).unwrap();
        }
        let mut expect = CMat::zeros(8, 6);
        expect.view_mut((0, 0), (6, 6)).fill_with_identity();
        assert_eq!(s.k_under(), &expect);
        assert!(s.validate(&a, 1e-12).is_ok());
        let ak = s.projected_matrix().unwrap();
        let u = s.basis_blocks(3);
        assert!(fro(&(ak - u.adjoint() * &a * &u)) < 1e-12 * fro(&a));
    }

    #[test]
    fn mixed_poles_residual_and_span() {
        let mut r = rng(4);
        let a = shifted_mat(&mut r, 16, 6.0);
        let v0 = rand_mat(&mut r, 16, 2);
        let mut s = BradState::init(&a, &v0, Pole::Infinite).unwrap();
        for p in [Pole::Infinite, Pole::finite(2.0, 0.0), Pole::finite(3.0, 0.0)] {
            s.extend_in_place(&a, p).unwrap();
        }
        let rel = s.decomposition_residual(&a) / a.norm_estimate();
        assert!(rel < 1e-12, "{rel}");
        let g = rand_mat(&mut r, 2, 2);
        let x = a.shifted_solve(c64(2.0, 0.0), &(&a * &v0 * g)).unwrap();
        let x = a.shifted_solve(c64(3.0, 0.0), &x).unwrap();
        let v = s.basis();
        assert!(fro(&(v * v.adjoint() * &x - &x)) < 1e-10 * fro(&x));
    }

    #[test]
    fn zero_pole_step() {
        let mut r = rng(5);
        let a = shifted_mat(&mut r, 10, 3.0);
        let mut s = BradState::init(&a, &rand_mat(&mut r, 10, 1), Pole::Infinite).unwrap();
        s.extend_in_place(&a, Pole::finite(0.0, 0.0)).unwrap();
        s.extend_in_place(&a, Pole::Infinite).unwrap();
        assert!(s.validate(&a, 1e-12).is_ok());
    }

    #[test]
    fn reorder_moves_infinity_last() {
        let mut r = rng(6);
        let a = shifted_mat(&mut r, 20, 5.0);
        let mut s = BradState::init(&a, &rand_mat(&mut r, 20, 2), Pole::Infinite).unwrap();
        s.extend_in_place(&a, Pole::Infinite).unwrap();
        s.extend_in_place(&a, Pole::finite(-1.0, 0.5)).unwrap();
        let before = s.clone();
        s.reorder_in_place().unwrap();
        assert_eq!(s.poles(), &[Pole::finite(-1.0, 0.5), Pole::Infinite]);
        assert!(s.validate(&a, 1e-11).is_ok());
        assert!(projector_distance(s.basis(), before.basis()) < 1e-11);
        assert!(fro(&s.basis().columns(0, 2).into_owned().clone()) > 0.0);
        assert_eq!(s.basis().columns(0, 2), before.basis().columns(0, 2));
        let u = s.basis_blocks(2);
        let ak = s.projected_matrix().unwrap();
        assert!(fro(&(ak - u.adjoint() * &a * &u)) < 1e-10 * fro(&a));
    }

    #[test]
    fn reorder_rejects_finite_second_to_last() {
        let mut r = rng(7);
        let a = shifted_mat(&mut r, 10, 5.0);
        let mut s = BradState::init(&a, &rand_mat(&mut r, 10, 1), Pole::Infinite).unwrap();
        s.extend_in_place(&a, Pole::finite(-1.0, 0.0)).unwrap();
        s.extend_in_place(&a, Pole::finite(-2.0, 0.0)).unwrap();
        assert!(matches!(s.reorder_in_place(), Err(Error::ReorderPrecondition(_))));
        assert!(matches!(s.projected_matrix(), Err(Error::NeedsInfinityPole)));
    }

    #[test]
    fn breakdown_on_invariant_subspace() {
        let a = CMat::from_fn(4, 4, |i, j| if i == j { c64(i as f64 + 1.0, 0.0) } else { c64(0.0, 0.0) });
        let v0 = CMat::from_fn(4, 1, |i, _| if i < 2 { c64(1.0, 0.0) } else { c64(0.0, 0.0) });
        let mut s = BradState::init(&a, &v0, Pole::Infinite).unwrap();
        s.extend_in_place(&a, Pole::Infinite).unwrap();
        assert!(matches!(
            s.extend_in_place(&a, Pole::Infinite),
            Err(Error::LuckyBreakdown { order: 2 })
        ));
        assert_eq!(s.order(), 1);
    }
}
