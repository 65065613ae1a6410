//! Matrix polynomials with b×b coefficients and their block actions.
//!
//! `P(A)∘V = Σ A^i V Γ_i` (coefficients act from the right) and `P(A)∘⁻¹V`
//! is the block vector `W` with `P(A)∘W = V`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{
    eigen_decomposition, fro, identity, schur, singular_values, solve, sub, CMat, C64, ONE, ZERO,
};
use crate::operator::LinearOperator;

/// Largest `n * b` accepted by [`apply_inv`].
pub const APPLY_INV_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    b: usize,
    coeffs: Vec<CMat>,
}

impl MatrixPolynomial {
    /// Coefficients in ascending degree; the last one is the leading coefficient.
    pub fn new(coeffs: Vec<CMat>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidArgument("matrix polynomial without coefficients".into()))?;
        let b = first.nrows();
        if b == 0 {
            return Err(Error::InvalidArgument("block size must be positive".into()));
        }
        if coeffs.iter().any(|c| c.shape() != (b, b)) {
            return Err(Error::dims("MatrixPolynomial", "coefficients must all be b×b"));
        }
        Ok(Self { b, coeffs })
    }

    pub fn identity(b: usize) -> Self {
        Self {
            b,
            coeffs: vec![identity(b)],
        }
    }

    /// Scalar polynomial `Σ c_i z^i` times `I_b`.
    pub fn from_scalar(c: &[C64], b: usize) -> Result<Self> {
        Self::new(c.iter().map(|&x| identity(b) * x).collect())
    }

    /// `z I - S`.
    pub fn linear(s: &CMat) -> Result<Self> {
        Self::new(vec![-s.clone(), identity(s.nrows())])
    }

    /// Monic polynomial with the given lower coefficients and leading `I_b`.
    pub fn monic(mut lower: Vec<CMat>, b: usize) -> Result<Self> {
        lower.push(identity(b));
        Self::new(lower)
    }

    pub fn block_size(&self) -> usize {
        self.b
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    pub fn leading(&self) -> &CMat {
        self.coeffs.last().expect("non-empty")
    }

    pub fn is_monic(&self) -> bool {
        *self.leading() == identity(self.b)
    }

    /// `P(z) = Σ z^i Γ_i`.
    pub fn eval(&self, z: C64) -> CMat {
        let mut acc = self.leading().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc * z + c;
        }
        acc
    }

    /// Left evaluation at a matrix argument, `Σ S^i Γ_i`.
    pub fn eval_left(&self, s: &CMat) -> CMat {
        let mut acc = self.leading().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = s * acc + c;
        }
        acc
    }

    /// `P̄`: entrywise conjugated coefficients.
    pub fn conj(&self) -> Self {
        Self {
            b: self.b,
            coeffs: self.coeffs.iter().map(|c| c.conjugate()).collect(),
        }
    }

    /// Coefficients replaced by their conjugate transposes.
    pub fn adjoint(&self) -> Self {
        Self {
            b: self.b,
            coeffs: self.coeffs.iter().map(|c| c.adjoint()).collect(),
        }
    }

    /// Product with the scalar polynomial `q(z) = Σ q_i z^i`.
    pub fn scalar_mul(&self, q: &[C64]) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidArgument("empty scalar polynomial".into()));
        }
        let d = self.degree() + q.len() - 1;
        let mut out = vec![CMat::zeros(self.b, self.b); d + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            for (j, &s) in q.iter().enumerate() {
                out[i + j] += c * s;
            }
        }
        Self::new(out)
    }

    /// Product with `∏ (z - r)` over the given roots.
    pub fn mul_by_roots(&self, roots: &[C64]) -> Result<Self> {
        self.scalar_mul(&poly_from_roots(roots))
    }
}

/// Ascending coefficients of `∏ (z - r)`.
pub fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut c = vec![ONE];
    for &r in roots {
        let mut next = vec![ZERO; c.len() + 1];
        for (i, &x) in c.iter().enumerate() {
            next[i + 1] += x;
            next[i] -= r * x;
        }
        c = next;
    }
    c
}

fn check_block(op: &'static str, p: &MatrixPolynomial, n: usize, v: &CMat) -> Result<()> {
    if v.ncols() != p.block_size() {
        return Err(Error::dims(
            op,
            format!("block vector has {} columns, polynomial block size {}", v.ncols(), p.block_size()),
        ));
    }
    if v.nrows() != n {
        return Err(Error::dims(op, format!("block vector has {} rows, operator {n}", v.nrows())));
    }
    Ok(())
}

/// `P(A)∘V = Σ A^i V Γ_i`, Horner style with `deg P` products by `A`.
pub fn apply(p: &MatrixPolynomial, a: &dyn LinearOperator, v: &CMat) -> Result<CMat> {
    check_block("apply", p, a.dim(), v)?;
    let mut w = v * p.leading();
    for c in p.coeffs.iter().rev().skip(1) {
        w = a.apply(&w) + v * c;
    }
    Ok(w)
}

/// `P(A)∘⁻¹V` for a dense `A`.
///
/// Uses the Schur form `A = U T U^H`; with `Z = U^H W` the block rows of `Z` are
/// recovered bottom up from `Z_r P(λ_r) = C_r - Σ_i Σ_{s>r} (T^i)_{rs} Z_s Γ_i`.
pub fn apply_inv(p: &MatrixPolynomial, a: &CMat, v: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dims("apply_inv", "matrix is not square"));
    }
    check_block("apply_inv", p, n, v)?;
    let b = p.block_size();
    if n * b > APPLY_INV_LIMIT {
        return Err(Error::SizeGuard {
            op: "apply_inv",
            size: n * b,
            limit: APPLY_INV_LIMIT,
        });
    }
    let sf = schur(a).ok_or(Error::InvalidPolynomialOnSpectrum)?;
    let d = p.degree();
    let mut powers = Vec::with_capacity(d + 1);
    powers.push(identity(n));
    for i in 1..=d {
        powers.push(&sf.t * &powers[i - 1]);
    }
    let c = sf.q.adjoint() * v;
    let mut z = CMat::zeros(n, b);
    for r in (0..n).rev() {
        let mut rhs = c.row(r).into_owned();
        if r + 1 < n {
            let zs = z.rows(r + 1, n - r - 1);
            for (i, g) in p.coeffs.iter().enumerate().skip(1) {
                let row = powers[i].view((r, r + 1), (1, n - r - 1));
                rhs -= row * zs * g;
            }
        }
        let m = p.eval(sf.t[(r, r)]);
        let sv = singular_values(&m);
        let (smax, smin) = (sv[0], sv[sv.len() - 1]);
        if !(smin > 1e-14 * smax.max(f64::MIN_POSITIVE)) {
            return Err(Error::InvalidPolynomialOnSpectrum);
        }
        let rt = CMat::from_iterator(b, 1, rhs.iter().copied());
        let zr = solve(&m.transpose(), &rt).ok_or(Error::InvalidPolynomialOnSpectrum)?;
        for (c, x) in zr.iter().enumerate() {
            z[(r, c)] = *x;
        }
    }
    Ok(&sf.q * z)
}

/// Scalar denominator `Q(z) = ∏ (z - ξ_j)` over finite poles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScalarDenominator {
    pub roots: Vec<C64>,
}

impl ScalarDenominator {
    pub fn new(roots: Vec<C64>) -> Result<Self> {
        if roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
            return Err(Error::InvalidArgument("denominator roots must be finite".into()));
        }
        Ok(Self { roots })
    }

    pub fn one() -> Self {
        Self::default()
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.roots.iter().fold(ONE, |acc, r| acc * (z - r))
    }

    pub fn conj(&self) -> Self {
        Self {
            roots: self.roots.iter().map(|r| r.conj()).collect(),
        }
    }
}

/// `R(z) = P(z) / Q(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrixFunction {
    pub numerator: MatrixPolynomial,
    pub denominator: ScalarDenominator,
}

impl RationalMatrixFunction {
    pub fn new(numerator: MatrixPolynomial, denominator: ScalarDenominator) -> Self {
        Self {
            numerator,
            denominator,
        }
    }

    pub fn polynomial(p: MatrixPolynomial) -> Self {
        Self::new(p, ScalarDenominator::one())
    }

    pub fn block_size(&self) -> usize {
        self.numerator.block_size()
    }

    /// `R̄(z)`: conjugated numerator coefficients over `Q̄`.
    pub fn conj(&self) -> Self {
        Self::new(self.numerator.conj(), self.denominator.conj())
    }

    /// `R^H(z)`: numerator coefficients `Γ_i^H` over `Q̄`.
    pub fn adjoint(&self) -> Self {
        Self::new(self.numerator.adjoint(), self.denominator.conj())
    }

    /// Same function represented as `(sP)/(sQ)` for `s(z) = ∏ (z - r)`.
    pub fn with_common_factor(&self, roots: &[C64]) -> Result<Self> {
        let mut den = self.denominator.roots.clone();
        den.extend_from_slice(roots);
        Ok(Self::new(
            self.numerator.mul_by_roots(roots)?,
            ScalarDenominator::new(den)?,
        ))
    }

    /// `R(∞)`: the leading coefficient when numerator and denominator degrees agree,
    /// zero when the denominator degree is larger.
    pub fn value_at_infinity(&self) -> Result<CMat> {
        let (dp, dq) = (self.numerator.degree(), self.denominator.degree());
        match dp.cmp(&dq) {
            std::cmp::Ordering::Equal => Ok(self.numerator.leading().clone()),
            std::cmp::Ordering::Less => Ok(CMat::zeros(self.block_size(), self.block_size())),
            std::cmp::Ordering::Greater => Err(Error::PoleEvaluation {
                point: C64::new(f64::INFINITY, 0.0),
            }),
        }
    }
}

/// `R(A)∘V = Q(A)^{-1}(P(A)∘V)` with one shifted solve per pole.
pub fn apply_rational(r: &RationalMatrixFunction, a: &dyn LinearOperator, v: &CMat) -> Result<CMat> {
    let mut w = apply(&r.numerator, a, v)?;
    for &xi in &r.denominator.roots {
        w = a.shifted_solve(xi, &w)?;
    }
    Ok(w)
}

/// `R(A)∘⁻¹V = Q(A)(P(A)∘⁻¹V)`.
pub fn apply_rational_inv(r: &RationalMatrixFunction, a: &CMat, v: &CMat) -> Result<CMat> {
    let mut w = apply_inv(&r.numerator, a, v)?;
    for &xi in &r.denominator.roots {
        w = a * &w - w * xi;
    }
    Ok(w)
}

/// `R(λ) = P(λ)/Q(λ)`.
pub fn eval_at_scalar(r: &RationalMatrixFunction, lambda: C64) -> Result<CMat> {
    for &xi in &r.denominator.roots {
        let gap = (lambda - xi).norm();
        if gap <= 4.0 * f64::EPSILON * lambda.norm().max(xi.norm()) || gap == 0.0 {
            return Err(Error::PoleEvaluation { point: lambda });
        }
    }
    Ok(r.numerator.eval(lambda) / r.denominator.eval(lambda))
}

pub fn det_at_scalar(r: &RationalMatrixFunction, lambda: C64) -> Result<C64> {
    let m = eval_at_scalar(r, lambda)?;
    Ok(m.determinant())
}

pub fn sigma_min_at_scalar(r: &RationalMatrixFunction, lambda: C64) -> Result<f64> {
    let m = eval_at_scalar(r, lambda)?;
    Ok(singular_values(&m).last().copied().unwrap_or(0.0))
}

/// Order in which eigenvalues are grouped into the diagonal blocks `Θ_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenOrdering {
    /// By argument, then modulus, around the spectral centroid.
    Angular,
    /// Ascending distance to a reference point.
    DistanceTo(C64),
}

/// Block characteristic polynomial together with its solvents `S_i`.
#[derive(Debug, Clone)]
pub struct BlockCharPoly {
    pub poly: MatrixPolynomial,
    pub solvents: Vec<CMat>,
    pub eigenvalues: Vec<C64>,
}

/// Monic χ of degree `d = n/b` with `χ(A)∘V = 0`, using the default ordering.
pub fn block_char_poly(a: &CMat, v: &CMat) -> Result<MatrixPolynomial> {
    block_char_poly_ordered(a, v, EigenOrdering::Angular).map(|c| c.poly)
}

pub fn block_char_poly_ordered(a: &CMat, v: &CMat, ordering: EigenOrdering) -> Result<BlockCharPoly> {
    let n = a.nrows();
    let b = v.ncols();
    if a.ncols() != n || v.nrows() != n {
        return Err(Error::dims("block_char_poly", "A must be square with as many rows as V"));
    }
    if b == 0 || n == 0 || n % b != 0 {
        return Err(Error::dims(
            "block_char_poly",
            format!("size {n} is not a positive multiple of block size {b}"),
        ));
    }
    let d = n / b;
    let (vals, vecs) = eigen_decomposition(a)
        .ok_or_else(|| Error::InvalidArgument("eigendecomposition failed".into()))?;
    let mut idx: Vec<usize> = (0..n).collect();
    match ordering {
        EigenOrdering::Angular => {
            let c = vals.iter().sum::<C64>() / n as f64;
            let key = |l: C64| {
                let z = l - c;
                let scale = vals.iter().map(|x| (x - c).norm()).fold(0.0, f64::max);
                let arg = if z.norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
                    -PI
                } else {
                    z.arg()
                };
                (arg, z.norm())
            };
            idx.sort_by(|&i, &j| {
                let (ki, kj) = (key(vals[i]), key(vals[j]));
                ki.partial_cmp(&kj).unwrap_or(std::cmp::Ordering::Equal)
            });
        }
        EigenOrdering::DistanceTo(p) => {
            idx.sort_by(|&i, &j| {
                (vals[i] - p)
                    .norm()
                    .partial_cmp(&(vals[j] - p).norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        }
    }
    let lam: Vec<C64> = idx.iter().map(|&i| vals[i]).collect();
    let u = CMat::from_fn(n, n, |r, c| vecs[(r, idx[c])]);
    let w = solve(&u, v).ok_or_else(|| Error::InvalidArgument("eigenvector matrix is singular".into()))?;
    let mut solvents = Vec::with_capacity(d);
    for i in 0..d {
        let wi = sub(&w, i * b, 0, b, b);
        let sv = singular_values(&wi);
        if !(sv[b - 1] >= 1e-10 * sv[0]) || sv[0] == 0.0 {
            return Err(Error::IllConditionedCharPoly { block: i });
        }
        let theta = CMat::from_fn(b, b, |r, c| if r == c { lam[i * b + r] } else { ZERO });
        let si = solve(&wi, &(theta * &wi)).ok_or(Error::IllConditionedCharPoly { block: i })?;
        solvents.push(si);
    }
    // Scaled block Vandermonde: Σ_j Ŝ_i^j Γ̂_j = -Ŝ_i^d with Ŝ_i = S_i / s.
    let s = lam.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let s = if s > 0.0 { s } else { 1.0 };
    let mut vand = CMat::zeros(n, n);
    let mut rhs = CMat::zeros(n, b);
    for (i, si) in solvents.iter().enumerate() {
        let sh = si / C64::new(s, 0.0);
        let mut pw = identity(b);
        for j in 0..d {
            vand.view_mut((i * b, j * b), (b, b)).copy_from(&pw);
            pw = &sh * pw;
        }
        rhs.view_mut((i * b, 0), (b, b)).copy_from(&(-pw));
    }
    let g = solve(&vand, &rhs)
        .ok_or_else(|| Error::InvalidArgument("block Vandermonde system is singular".into()))?;
    let mut lower = Vec::with_capacity(d);
    for j in 0..d {
        let f = s.powi((d - j) as i32);
        lower.push(sub(&g, j * b, 0, b, b) * C64::new(f, 0.0));
    }
    Ok(BlockCharPoly {
        poly: MatrixPolynomial::monic(lower, b)?,
        solvents,
        eigenvalues: lam,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolventCheck {
    pub is_solvent: bool,
    pub residual: f64,
}

/// Whether `Σ S^i Γ_i` vanishes to `tol` in the Frobenius norm.
pub fn is_solvent(p: &MatrixPolynomial, s: &CMat, tol: f64) -> SolventCheck {
    if s.shape() != (p.block_size(), p.block_size()) {
        return SolventCheck {
            is_solvent: false,
            residual: f64::INFINITY,
        };
    }
    let residual = fro(&p.eval_left(s));
    SolventCheck {
        is_solvent: residual <= tol,
        residual,
    }
}

/// Relative error between the trapezoid approximation of
/// `(1/2πi) ∮ R(zI)∘⁻¹[(zI - A)^{-1} V] dz` and `R(A)∘⁻¹V`.
///
/// Nodes are rotated when one of them lands on a pole or an eigenvalue.
pub fn cauchy_quadrature_check(
    r: &RationalMatrixFunction,
    a: &CMat,
    v: &CMat,
    center: C64,
    radius: f64,
    nodes: usize,
) -> Result<f64> {
    if nodes == 0 || radius <= 0.0 {
        return Err(Error::InvalidArgument("quadrature needs nodes and a positive radius".into()));
    }
    let exact = apply_rational_inv(r, a, v)?;
    let mut last_err = None;
    for offset in [0.0, 0.5, 0.25, 0.75] {
        match quadrature(r, a, v, center, radius, nodes, offset) {
            Ok(approx) => {
                let den = fro(&exact).max(f64::MIN_POSITIVE);
                return Ok(fro(&(approx - &exact)) / den);
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn quadrature(
    r: &RationalMatrixFunction,
    a: &CMat,
    v: &CMat,
    center: C64,
    radius: f64,
    nodes: usize,
    offset: f64,
) -> Result<CMat> {
    let mut acc = CMat::zeros(v.nrows(), v.ncols());
    for j in 0..nodes {
        let theta = 2.0 * PI * (j as f64 + offset) / nodes as f64;
        let e = C64::from_polar(1.0, theta);
        let z = center + e * radius;
        let res = a.shifted_solve(z, v)?.scale(-1.0);
        let rz = eval_at_scalar(r, z)?;
        let y = crate::linalg::solve_right(&rz, &res).ok_or(Error::PoleEvaluation { point: z })?;
        acc += y * (e * radius);
    }
    Ok(acc / C64::new(nodes as f64, 0.0))
}
