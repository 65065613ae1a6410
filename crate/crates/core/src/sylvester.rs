//! Galerkin solver for `A X - X B = u v^H` on a pair of block rational Krylov
//! spaces built from `(A, u)` and `(B^H, v)`.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::brad::{BradState, Pole};
use crate::error::{Error, Result};
use crate::linalg::{fro, mul, mul_adj, mul_adj_right, schur, thin_qr, CMat, SchurForm, C64, ZERO};
use crate::matpoly::{
    apply_rational, apply_rational_inv, block_char_poly, RationalMatrixFunction, ScalarDenominator,
};
use crate::operator::{dense_of, LinearOperator};
use crate::poles::{
    fov_boundary, FovBoundarySamples, PoleContext, PoleSelector, PoleStrategy, PoleTrace, SideInput,
    DEFAULT_FOV_SAMPLES, DEFAULT_GAP_FILL,
};

#[derive(Clone)]
pub struct SylvesterProblem {
    a: Arc<dyn LinearOperator>,
    b: Arc<dyn LinearOperator>,
    bh: Arc<dyn LinearOperator>,
    u: CMat,
    v: CMat,
}

impl std::fmt::Debug for SylvesterProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SylvesterProblem")
            .field("n", &self.a.dim())
            .field("m", &self.b.dim())
            .field("block_size", &self.u.ncols())
            .finish()
    }
}

impl SylvesterProblem {
    pub fn new(a: Arc<dyn LinearOperator>, b: Arc<dyn LinearOperator>, u: CMat, v: CMat) -> Result<Self> {
        if u.nrows() != a.dim() || v.nrows() != b.dim() {
            return Err(Error::dims("SylvesterProblem", "u must match A and v must match B"));
        }
        if u.ncols() != v.ncols() || u.ncols() == 0 {
            return Err(Error::dims("SylvesterProblem", "u and v need the same positive number of columns"));
        }
        let bh = b.adjoint();
        Ok(Self { a, b, bh, u, v })
    }

    pub fn a(&self) -> &Arc<dyn LinearOperator> {
        &self.a
    }

    pub fn b(&self) -> &Arc<dyn LinearOperator> {
        &self.b
    }

    pub fn b_adjoint(&self) -> &Arc<dyn LinearOperator> {
        &self.bh
    }

    pub fn u(&self) -> &CMat {
        &self.u
    }

    pub fn v(&self) -> &CMat {
        &self.v
    }

    pub fn block_size(&self) -> usize {
        self.u.ncols()
    }

    /// `‖u v^H‖_F`.
    pub fn rhs_norm(&self) -> f64 {
        let (_, ru) = thin_qr(&self.u);
        let (_, rv) = thin_qr(&self.v);
        fro(&(ru * rv.adjoint()))
    }
}

/// Where the adaptive strategies look for candidate poles.
#[derive(Debug, Clone, PartialEq)]
pub struct FovOptions {
    pub samples: usize,
    /// Points whose convex hull approximates the field of values of `A`; when
    /// given they replace the sweep on the projected matrix.
    pub a_points: Option<Vec<C64>>,
    /// Same for `B^H`.
    pub bh_points: Option<Vec<C64>>,
    /// Candidates inserted between boundary samples and projected Ritz values (0 disables).
    pub gap_fill: usize,
}

impl Default for FovOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_FOV_SAMPLES,
            a_points: None,
            bh_points: None,
            gap_fill: DEFAULT_GAP_FILL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub strategy: PoleStrategy,
    pub fov: FovOptions,
    /// Follow every complex pole by its conjugate.
    pub pairing: bool,
    /// Keep the data of every adaptive pole choice.
    pub trace: bool,
    pub start_pole: Pole,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
            strategy: PoleStrategy::Adm,
            fov: FovOptions::default(),
            pairing: false,
            trace: false,
            start_pole: Pole::Infinite,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if self.fov.samples < 8 {
            return Err(Error::InvalidArgument("at least 8 boundary samples are required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Number of basis blocks in the A-space.
    pub order_a: usize,
    pub order_b: usize,
    /// `‖R‖_F / ‖u v^H‖_F`.
    pub residual: f64,
    /// Pole added to each space to reach this iterate.
    pub pole_a: Pole,
    pub pole_b: Pole,
    /// Seconds since the start of the solve.
    pub seconds: f64,
}

/// Adaptive choices made before one iteration.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub iteration: usize,
    pub a: Option<PoleTrace>,
    pub b: Option<PoleTrace>,
}

/// Projection of one side onto its current basis.
#[derive(Debug, Clone)]
pub struct SideProjection {
    /// Number of basis columns in use.
    pub cols: usize,
    /// Projected Krylov matrix (`A_h` for the A-space, `V^H B^H V` for the B-space).
    pub mat: CMat,
    /// Coupling of the projection to the rest of the space: `M U = U mat + Q T`.
    pub coupling: CMat,
    /// Projected right-hand side block.
    pub rhs: CMat,
    /// Whether the basis spans an invariant subspace (breakdown).
    pub exhausted: bool,
}

#[derive(Debug, Clone)]
pub struct SylvesterState {
    pub brad_a: Option<BradState>,
    pub brad_b: Option<BradState>,
    pub proj_a: Option<SideProjection>,
    pub proj_b: Option<SideProjection>,
    /// Projected solution of `A_h Y - Y B_k = u_proj v_proj^H`.
    pub y: CMat,
    pub history: Vec<IterationRecord>,
    pub traces: Vec<TraceEntry>,
    pub rhs_norm: f64,
}

impl SylvesterState {
    /// `A_h`.
    pub fn a_h(&self) -> Option<&CMat> {
        self.proj_a.as_ref().map(|p| &p.mat)
    }

    /// `B_k = V^H B V`.
    pub fn b_k(&self) -> Option<CMat> {
        self.proj_b.as_ref().map(|p| p.mat.adjoint())
    }
}

#[derive(Debug, Clone)]
pub struct LowRankSolution {
    /// Orthonormal n×bh factor.
    pub u: CMat,
    pub y: CMat,
    /// Orthonormal m×bk factor.
    pub v: CMat,
    /// Relative residual of the returned iterate.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub poles_a: Vec<Pole>,
    pub poles_b: Vec<Pole>,
}

impl LowRankSolution {
    /// Dense `U Y V^H`.
    pub fn dense(&self) -> CMat {
        &self.u * &self.y * self.v.adjoint()
    }

    /// Dense residual `A X - X B - u v^H`; intended for small problems.
    pub fn dense_residual(&self, problem: &SylvesterProblem) -> Result<CMat> {
        let (n, m) = (problem.a.dim(), problem.b.dim());
        if n.saturating_mul(m) > 1 << 24 {
            return Err(Error::SizeGuard {
                op: "dense_residual",
                size: n * m,
                limit: 1 << 24,
            });
        }
        let uy = &self.u * &self.y;
        let left = problem.a.apply(&uy) * self.v.adjoint();
        let right = &uy * problem.bh.apply(&self.v).adjoint();
        Ok(left - right - &problem.u * problem.v.adjoint())
    }
}

/// Solves `A_h Y - Y B_k = C` by Bartels–Stewart on the complex Schur forms.
pub fn projected_solve(a_h: &CMat, b_k: &CMat, c: &CMat) -> Result<CMat> {
    let (h, k) = (a_h.nrows(), b_k.nrows());
    if a_h.ncols() != h || b_k.ncols() != k || c.shape() != (h, k) {
        return Err(Error::dims("projected_solve", "A_h, B_k and C have inconsistent shapes"));
    }
    let sa = schur(a_h).ok_or(Error::ProjectedSpectraOverlap)?;
    let sb = schur(b_k).ok_or(Error::ProjectedSpectraOverlap)?;
    schur_solve(&sa, &sb, c)
}

fn schur_solve(sa: &SchurForm, sb: &SchurForm, c: &CMat) -> Result<CMat> {
    let (h, k) = (sa.t.nrows(), sb.t.nrows());
    let f = mul(&mul_adj(&sa.q, c), &sb.q);
    let (t1, t2) = (&sa.t, &sb.t);
    let scale = fro(t1) + fro(t2);
    let tiny = 1e-14 * scale.max(f64::MIN_POSITIVE);
    let mut z = CMat::zeros(h, k);
    let mut rhs = vec![ZERO; h];
    for j in 0..k {
        for i in 0..h {
            rhs[i] = f[(i, j)];
        }
        for l in 0..j {
            let t = t2[(l, j)];
            if t != ZERO {
                for i in 0..h {
                    rhs[i] += z[(i, l)] * t;
                }
            }
        }
        let mu = t2[(j, j)];
        for i in (0..h).rev() {
            let mut s = rhs[i];
            for l in i + 1..h {
                s -= t1[(i, l)] * z[(l, j)];
            }
            let d = t1[(i, i)] - mu;
            if d.norm() <= tiny {
                return Err(Error::ProjectedSpectraOverlap);
            }
            z[(i, j)] = s / d;
        }
    }
    Ok(mul_adj_right(&mul(&sa.q, &z), &sb.q))
}

fn project_side(state: &BradState, m: &dyn LinearOperator, rhs_full: &CMat, exhausted: bool) -> Result<SideProjection> {
    let b = state.block_size();
    let k = state.order();
    if exhausted {
        let v = state.basis();
        let mv = m.apply(v);
        let mat = mul_adj(v, &mv);
        let (_, t) = thin_qr(&(&mv - mul(v, &mat)));
        return Ok(SideProjection {
            cols: v.ncols(),
            mat,
            coupling: t,
            rhs: v.adjoint() * rhs_full,
            exhausted,
        });
    }
    let mat = state.projected_matrix()?;
    let coupling = state.residual_factor()?;
    let rhs = if state.start_pole().is_infinite() {
        let mut r = CMat::zeros(b * k, b);
        r.view_mut((0, 0), (b, b)).copy_from(state.start_r());
        r
    } else {
        state.basis_blocks(k).adjoint() * rhs_full
    };
    Ok(SideProjection {
        cols: b * k,
        mat,
        coupling,
        rhs,
        exhausted,
    })
}

struct ProjectedIterate {
    y: CMat,
    residual: f64,
    /// Eigenvalues of `A_h`.
    ritz_a: Vec<C64>,
    /// Eigenvalues of `V^H B^H V`.
    ritz_b: Vec<C64>,
}

fn solve_projected(pa: &SideProjection, pb: &SideProjection) -> Result<ProjectedIterate> {
    let sa = schur(&pa.mat).ok_or(Error::ProjectedSpectraOverlap)?;
    let sb = schur(&pb.mat.adjoint()).ok_or(Error::ProjectedSpectraOverlap)?;
    let c = mul_adj_right(&pa.rhs, &pb.rhs);
    let y = schur_solve(&sa, &sb, &c)?;
    Ok(ProjectedIterate {
        residual: cheap_residual(pa, pb, &y),
        y,
        ritz_a: sa.eigenvalues(),
        ritz_b: sb.eigenvalues().iter().map(|z| z.conj()).collect(),
    })
}

fn cheap_residual(pa: &SideProjection, pb: &SideProjection, y: &CMat) -> f64 {
    let c = mul_adj_right(&pa.rhs, &pb.rhs);
    let top = mul(&pa.mat, y) - mul_adj_right(y, &pb.mat) - c;
    let ra = mul(&pa.coupling, y);
    let rb = mul_adj_right(y, &pb.coupling);
    (fro(&top).powi(2) + fro(&ra).powi(2) + fro(&rb).powi(2)).sqrt()
}

/// `‖R_{h,k}‖_F` from the projected quantities only.
pub fn residual_norm_cheap(state: &SylvesterState) -> Result<f64> {
    let (pa, pb) = match (&state.proj_a, &state.proj_b) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(state.rhs_norm),
    };
    for (p, s) in [(pa, &state.brad_a), (pb, &state.brad_b)] {
        if !p.exhausted {
            if let Some(s) = s {
                if !matches!(s.last_pole(), Some(Pole::Infinite)) {
                    return Err(Error::NeedsInfinityPole);
                }
            }
        }
    }
    Ok(cheap_residual(pa, pb, &state.y))
}

fn side_input(
    own_poles: Vec<C64>,
    own_ritz: &[C64],
    other: &SideProjection,
    other_ritz: &[C64],
    other_points: Option<&Vec<C64>>,
    b: usize,
    fov: &crate::sylvester::FovOptions,
) -> Result<SideInput> {
    let proj = if other_points.is_some() { None } else { Some(&other.mat) };
    let mut cands: FovBoundarySamples = fov_boundary(proj, other_points.map(|v| v.as_slice()), fov.samples)?;
    if fov.gap_fill > 0 {
        cands = cands.refined(other_ritz, fov.gap_fill);
    }
    Ok(SideInput {
        ctx: PoleContext {
            poles: own_poles,
            ritz: own_ritz.iter().map(|z| z.conj()).collect(),
            block_size: b,
        },
        candidates: cands,
    })
}

fn extend_side(state: &mut BradState, m: &dyn LinearOperator, pole: Pole) -> Result<bool> {
    match state.extend_in_place(m, pole) {
        Ok(()) => {}
        Err(Error::LuckyBreakdown { .. }) => return Ok(true),
        Err(e) => return Err(e),
    }
    if !pole.is_infinite() {
        state.reorder_in_place()?;
    }
    Ok(false)
}

struct Best {
    residual: f64,
    y: CMat,
    cols_a: usize,
    cols_b: usize,
}

/// Galerkin projection with the chosen pole strategy. Stops when the relative
/// residual drops below `tol`, after `max_iter` iterations, or once a space
/// becomes invariant; a non-converged run returns its best iterate.
pub fn solve(problem: &SylvesterProblem, opts: &SolveOptions) -> Result<(LowRankSolution, SylvesterState)> {
    opts.validate()?;
    let start = Instant::now();
    let (n, m, b) = (problem.a.dim(), problem.b.dim(), problem.block_size());
    let rhs_norm = problem.rhs_norm();
    let mut state = SylvesterState {
        brad_a: None,
        brad_b: None,
        proj_a: None,
        proj_b: None,
        y: CMat::zeros(0, 0),
        history: Vec::new(),
        traces: Vec::new(),
        rhs_norm,
    };
    if rhs_norm == 0.0 {
        let sol = LowRankSolution {
            u: CMat::zeros(n, 0),
            y: CMat::zeros(0, 0),
            v: CMat::zeros(m, 0),
            residual: 0.0,
            converged: true,
            iterations: 0,
            poles_a: Vec::new(),
            poles_b: Vec::new(),
        };
        return Ok((sol, state));
    }
    let a = problem.a.as_ref();
    let bh = problem.bh.as_ref();
    let mut ba = BradState::init(a, &problem.u, opts.start_pole)?;
    let mut bb = BradState::init(bh, &problem.v, opts.start_pole)?;
    let mut ex_a = extend_side(&mut ba, a, Pole::Infinite)?;
    let mut ex_b = extend_side(&mut bb, bh, Pole::Infinite)?;
    let mut selector = PoleSelector::new(opts.strategy.clone(), opts.pairing)?;
    let mut poles = (Pole::Infinite, Pole::Infinite);
    let mut best: Option<Best> = None;
    let mut converged;
    let mut iteration = 1;
    loop {
        let pa = project_side(&ba, a, &problem.u, ex_a)?;
        let pb = project_side(&bb, bh, &problem.v, ex_b)?;
        let ProjectedIterate { y, residual: res, ritz_a, ritz_b } = solve_projected(&pa, &pb)?;
        let rel = res / rhs_norm;
        state.history.push(IterationRecord {
            iteration,
            order_a: pa.cols / b,
            order_b: pb.cols / b,
            residual: rel,
            pole_a: poles.0,
            pole_b: poles.1,
            seconds: start.elapsed().as_secs_f64(),
        });
        if best.as_ref().is_none_or(|bst| rel <= bst.residual) {
            best = Some(Best {
                residual: rel,
                y: y.clone(),
                cols_a: pa.cols,
                cols_b: pb.cols,
            });
        }
        let done = rel <= opts.tol || ex_a || ex_b || iteration >= opts.max_iter;
        converged = rel <= opts.tol;
        if done {
            state.proj_a = Some(pa);
            state.proj_b = Some(pb);
            state.y = y;
            break;
        }
        let (inputs_a, inputs_b) = if opts.strategy.is_adaptive() {
            (
                Some(side_input(ba.finite_poles(), &ritz_a, &pb, &ritz_b, opts.fov.bh_points.as_ref(), b, &opts.fov)?),
                Some(side_input(bb.finite_poles(), &ritz_b, &pa, &ritz_a, opts.fov.a_points.as_ref(), b, &opts.fov)?),
            )
        } else {
            (None, None)
        };
        let ((pole_a, ta), (pole_b, tb)) = selector.next_pair(inputs_a.as_ref(), inputs_b.as_ref())?;
        if opts.trace {
            state.traces.push(TraceEntry {
                iteration: iteration + 1,
                a: ta,
                b: tb,
            });
        }
        ex_a = extend_side(&mut ba, a, pole_a)?;
        ex_b = extend_side(&mut bb, bh, pole_b)?;
        poles = (pole_a, pole_b);
        state.proj_a = Some(pa);
        state.proj_b = Some(pb);
        state.y = y;
        iteration += 1;
    }
    let best = best.expect("at least one iterate");
    let (u, y, v, residual) = if converged {
        let pa = state.proj_a.as_ref().expect("set");
        let pb = state.proj_b.as_ref().expect("set");
        (
            ba.basis().columns(0, pa.cols).into_owned(),
            state.y.clone(),
            bb.basis().columns(0, pb.cols).into_owned(),
            state.history.last().expect("recorded").residual,
        )
    } else {
        (
            ba.basis().columns(0, best.cols_a).into_owned(),
            best.y,
            bb.basis().columns(0, best.cols_b).into_owned(),
            best.residual,
        )
    };
    let sol = LowRankSolution {
        u,
        y,
        v,
        residual,
        converged,
        iterations: iteration,
        poles_a: ba.poles().to_vec(),
        poles_b: bb.poles().to_vec(),
    };
    state.brad_a = Some(ba);
    state.brad_b = Some(bb);
    Ok((sol, state))
}

/// Terms of the residual decomposition `R = ρ12 + ρ21 + ρ22`.
#[derive(Debug, Clone)]
pub struct ResidualDecomposition {
    pub rho12: CMat,
    pub rho21: CMat,
    pub rho22: CMat,
    pub rho12_norm: f64,
    pub rho21_norm: f64,
    pub rho22_norm: f64,
    /// `sqrt(‖ρ12‖² + ‖ρ21‖² + ‖ρ22‖²)`.
    pub total: f64,
    /// `R_A^G(A)∘u`.
    pub ra_u: CMat,
    /// `R_B^G(B^H)∘v`.
    pub rb_v: CMat,
}

/// `χ/Q` with χ the block characteristic polynomial of the projected pair.
pub fn galerkin_rational(proj: &CMat, rhs: &CMat, poles: &[C64]) -> Result<RationalMatrixFunction> {
    let chi = block_char_poly(proj, rhs)?;
    Ok(RationalMatrixFunction::new(chi, ScalarDenominator::new(poles.to_vec())?))
}

/// Dense evaluation of the three terms of `u v^H - (A X - X B)` for the
/// current iterate of a small problem. The poles of each space are the finite
/// ones of its BRAD; the adjoint factor of the ρ21 term acts on `V^H B^H V`.
pub fn residual_decomposition(problem: &SylvesterProblem, state: &SylvesterState) -> Result<ResidualDecomposition> {
    let (pa, pb, ba, bb) = match (&state.proj_a, &state.proj_b, &state.brad_a, &state.brad_b) {
        (Some(pa), Some(pb), Some(ba), Some(bb)) => (pa, pb, ba, bb),
        _ => return Err(Error::InvalidArgument("state holds no iterate".into())),
    };
    if pa.exhausted || pb.exhausted {
        return Err(Error::InvalidArgument("decomposition needs strictly nested spaces".into()));
    }
    let qa = ba.finite_poles();
    let qb = bb.finite_poles();
    let ra = galerkin_rational(&pa.mat, &pa.rhs, &qa)?;
    let rb = galerkin_rational(&pb.mat, &pb.rhs, &qb)?;
    let u_basis = ba.basis().columns(0, pa.cols).into_owned();
    let v_basis = bb.basis().columns(0, pb.cols).into_owned();
    let a_h = &pa.mat;
    let ra_u = apply_rational(&ra, problem.a.as_ref(), &problem.u)?;
    let rb_v = apply_rational(&rb, problem.bh.as_ref(), &problem.v)?;
    let rho12 = &u_basis * apply_rational_inv(&rb.adjoint(), a_h, &pa.rhs)? * rb_v.adjoint();
    let rho21 = &ra_u * apply_rational_inv(&ra.adjoint(), &pb.mat, &pb.rhs)?.adjoint() * v_basis.adjoint();
    let (n, m) = (problem.a.dim(), problem.b.dim());
    let rho22 = match (ra.value_at_infinity(), rb.value_at_infinity()) {
        (Ok(ia), Ok(ib)) if ra.denominator.degree() == ra.numerator.degree()
            && rb.denominator.degree() == rb.numerator.degree() =>
        {
            let left = crate::linalg::solve_right(&ia, &ra_u).ok_or(Error::InvalidPolynomialOnSpectrum)?;
            let right = crate::linalg::solve_right(&ib, &rb_v).ok_or(Error::InvalidPolynomialOnSpectrum)?;
            left * right.adjoint()
        }
        _ => CMat::zeros(n, m),
    };
    let (n12, n21, n22) = (fro(&rho12), fro(&rho21), fro(&rho22));
    Ok(ResidualDecomposition {
        total: (n12 * n12 + n21 * n21 + n22 * n22).sqrt(),
        rho12_norm: n12,
        rho21_norm: n21,
        rho22_norm: n22,
        rho12,
        rho21,
        rho22,
        ra_u,
        rb_v,
    })
}

/// Dense `A X - X B - u v^H` for the iterate held in `state`.
pub fn state_dense_residual(problem: &SylvesterProblem, state: &SylvesterState) -> Result<CMat> {
    let (pa, pb, ba, bb) = match (&state.proj_a, &state.proj_b, &state.brad_a, &state.brad_b) {
        (Some(pa), Some(pb), Some(ba), Some(bb)) => (pa, pb, ba, bb),
        _ => return Ok(-(&problem.u * problem.v.adjoint())),
    };
    let sol = LowRankSolution {
        u: ba.basis().columns(0, pa.cols).into_owned(),
        y: state.y.clone(),
        v: bb.basis().columns(0, pb.cols).into_owned(),
        residual: 0.0,
        converged: false,
        iterations: 0,
        poles_a: Vec::new(),
        poles_b: Vec::new(),
    };
    sol.dense_residual(problem)
}

/// Dense matrices of both operators, for diagnostics.
pub fn dense_operators(problem: &SylvesterProblem) -> (CMat, CMat) {
    (dense_of(problem.a.as_ref()), dense_of(problem.b.as_ref()))
}
