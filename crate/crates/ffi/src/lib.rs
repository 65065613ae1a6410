//! C interface to the block rational Krylov Sylvester solver.
//!
//! Complex arrays are passed as interleaved `(re, im)` doubles in
//! column-major order. Every call that can fail returns an [`RksStatus`];
//! the message of the last failure on the calling thread is available from
//! [`rks_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use blk_rksylv::bench::{build_convdiff, build_poisson, convdiff_phi, convdiff_psi};
use blk_rksylv::operator::LinearOperator;
use blk_rksylv::poles::{tridiagonal_fov_points, PoleStrategy, DEFAULT_FOV_SAMPLES};
use blk_rksylv::rhs::RankRule;
use blk_rksylv::sylvester::{solve, FovOptions, LowRankSolution, SolveOptions, SylvesterProblem};
use blk_rksylv::{CMat, Error, Pole, Tridiagonal, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RksStatus {
    Ok = 0,
    /// The solve finished without reaching the tolerance; a solution is still returned.
    NotConverged = 1,
    NullPointer = 2,
    InvalidArgument = 3,
    DimensionMismatch = 4,
    PoleOnSpectrum = 5,
    Breakdown = 6,
    SpectraOverlap = 7,
    NumericalFailure = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RksStrategy {
    Adm = 0,
    Sadm = 1,
    Extended = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RksOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub strategy: RksStrategy,
    pub fov_samples: usize,
    /// Follow each complex pole by its conjugate.
    pub pairing: bool,
    /// For tridiagonal problems, sample the fields of values of the full
    /// operators instead of the projected matrices.
    pub operator_fov: bool,
}

pub struct RksProblem {
    problem: SylvesterProblem,
    tridiagonal: Option<(Tridiagonal, Tridiagonal)>,
}

pub struct RksSolution {
    solution: LowRankSolution,
    history: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RksStatus {
    match e {
        Error::DimensionMismatch { .. } => RksStatus::DimensionMismatch,
        Error::InvalidArgument(_) | Error::SizeGuard { .. } | Error::RankDeficientStart => RksStatus::InvalidArgument,
        Error::PoleOnSpectrum { .. } | Error::PoleEvaluation { .. } => RksStatus::PoleOnSpectrum,
        Error::LuckyBreakdown { .. } => RksStatus::Breakdown,
        Error::ProjectedSpectraOverlap | Error::SpectraOverlap => RksStatus::SpectraOverlap,
        _ => RksStatus::NumericalFailure,
    }
}

fn guard(f: impl FnOnce() -> Result<RksStatus, (RksStatus, String)>) -> RksStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            RksStatus::Panic
        }
    }
}

fn fail(e: Error) -> (RksStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RksStatus, String) {
    (RksStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_complex(ptr: *const f64, len: usize, what: &str) -> Result<Vec<C64>, (RksStatus, String)> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    let s = std::slice::from_raw_parts(ptr, 2 * len);
    Ok(s.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect())
}

unsafe fn read_matrix(ptr: *const f64, rows: usize, cols: usize, what: &str) -> Result<CMat, (RksStatus, String)> {
    let v = read_complex(ptr, rows * cols, what)?;
    Ok(CMat::from_vec(rows, cols, v))
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rks_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn rks_options_default() -> RksOptions {
    RksOptions {
        tol: 1e-8,
        max_iter: 100,
        strategy: RksStrategy::Adm,
        fov_samples: DEFAULT_FOV_SAMPLES,
        pairing: true,
        operator_fov: true,
    }
}

fn bench_problem(
    out: *mut *mut RksProblem,
    build: impl FnOnce() -> blk_rksylv::Result<blk_rksylv::bench::BenchInstance>,
) -> RksStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = build().map_err(fail)?;
        unsafe {
            store(
                out,
                RksProblem {
                    problem: inst.problem,
                    tridiagonal: Some((inst.a, inst.b)),
                },
            )
        };
        Ok(RksStatus::Ok)
    })
}

/// Poisson benchmark on `n` interior grid points per direction.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rks_problem_poisson(n: usize, out: *mut *mut RksProblem) -> RksStatus {
    bench_problem(out, || build_poisson(n))
}

/// Convection–diffusion benchmark with the reference convection field.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rks_problem_convdiff(n: usize, epsilon: f64, out: *mut *mut RksProblem) -> RksStatus {
    bench_problem(out, || build_convdiff(n, epsilon, &convdiff_phi, &convdiff_psi, RankRule::Default))
}

/// Dense problem: `a` is n×n, `b` is m×m, `u` is n×bs, `v` is m×bs.
///
/// # Safety
/// Every array must hold the stated number of interleaved complex entries.
#[no_mangle]
pub unsafe extern "C" fn rks_problem_dense(
    n: usize,
    m: usize,
    bs: usize,
    a: *const f64,
    b: *const f64,
    u: *const f64,
    v: *const f64,
    out: *mut *mut RksProblem,
) -> RksStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = read_matrix(a, n, n, "a")?;
        let b = read_matrix(b, m, m, "b")?;
        let u = read_matrix(u, n, bs, "u")?;
        let v = read_matrix(v, m, bs, "v")?;
        let problem = SylvesterProblem::new(Arc::new(a) as Arc<dyn LinearOperator>, Arc::new(b), u, v).map_err(fail)?;
        store(
            out,
            RksProblem {
                problem,
                tridiagonal: None,
            },
        );
        Ok(RksStatus::Ok)
    })
}

/// Tridiagonal problem. Each operator is given by its sub-, main and
/// super-diagonal (lengths k-1, k, k-1).
///
/// # Safety
/// Every array must hold the stated number of interleaved complex entries.
#[no_mangle]
pub unsafe extern "C" fn rks_problem_tridiagonal(
    n: usize,
    a_sub: *const f64,
    a_diag: *const f64,
    a_sup: *const f64,
    m: usize,
    b_sub: *const f64,
    b_diag: *const f64,
    b_sup: *const f64,
    bs: usize,
    u: *const f64,
    v: *const f64,
    out: *mut *mut RksProblem,
) -> RksStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n == 0 || m == 0 {
            return Err((RksStatus::InvalidArgument, "empty operator".into()));
        }
        let ta = Tridiagonal::new(
            read_complex(a_sub, n - 1, "a_sub")?,
            read_complex(a_diag, n, "a_diag")?,
            read_complex(a_sup, n - 1, "a_sup")?,
        )
        .map_err(fail)?;
        let tb = Tridiagonal::new(
            read_complex(b_sub, m - 1, "b_sub")?,
            read_complex(b_diag, m, "b_diag")?,
            read_complex(b_sup, m - 1, "b_sup")?,
        )
        .map_err(fail)?;
        let u = read_matrix(u, n, bs, "u")?;
        let v = read_matrix(v, m, bs, "v")?;
        let problem = SylvesterProblem::new(Arc::new(ta.clone()), Arc::new(tb.clone()), u, v).map_err(fail)?;
        store(
            out,
            RksProblem {
                problem,
                tridiagonal: Some((ta, tb)),
            },
        );
        Ok(RksStatus::Ok)
    })
}

/// Sizes `n`, `m` and block size of a problem.
///
/// # Safety
/// `p` must come from a constructor; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn rks_problem_dims(p: *const RksProblem, n: *mut usize, m: *mut usize, bs: *mut usize) -> RksStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        for (dst, val) in [
            (n, p.problem.a().dim()),
            (m, p.problem.b().dim()),
            (bs, p.problem.block_size()),
        ] {
            if !dst.is_null() {
                *dst = val;
            }
        }
        Ok(RksStatus::Ok)
    })
}

/// # Safety
/// `p` must come from a constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rks_problem_free(p: *mut RksProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Solves the problem. On `Ok` and `NotConverged` a solution is stored in `out`.
///
/// # Safety
/// `p` must come from a constructor; `opts` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn rks_solve(p: *const RksProblem, opts: *const RksOptions, out: *mut *mut RksSolution) -> RksStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let o = opts.as_ref().copied().unwrap_or_else(|| rks_options_default());
        let mut fov = FovOptions {
            samples: o.fov_samples,
            ..FovOptions::default()
        };
        if o.operator_fov {
            if let Some((a, b)) = &p.tridiagonal {
                fov.a_points = Some(tridiagonal_fov_points(a, o.fov_samples).map_err(fail)?);
                fov.bh_points = Some(tridiagonal_fov_points(&b.conj_transpose(), o.fov_samples).map_err(fail)?);
            }
        }
        let opts = SolveOptions {
            tol: o.tol,
            max_iter: o.max_iter,
            strategy: match o.strategy {
                RksStrategy::Adm => PoleStrategy::Adm,
                RksStrategy::Sadm => PoleStrategy::Sadm,
                RksStrategy::Extended => PoleStrategy::Extended,
            },
            fov,
            pairing: o.pairing,
            trace: false,
            start_pole: Pole::Infinite,
        };
        let (solution, state) = solve(&p.problem, &opts).map_err(fail)?;
        let converged = solution.converged;
        store(
            out,
            RksSolution {
                solution,
                history: state.history.iter().map(|h| h.residual).collect(),
            },
        );
        Ok(if converged { RksStatus::Ok } else { RksStatus::NotConverged })
    })
}

/// Shapes of the factors `U` (n×ru), `Y` (ru×rv) and `V` (m×rv).
///
/// # Safety
/// `s` must come from [`rks_solve`]; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn rks_solution_dims(
    s: *const RksSolution,
    n: *mut usize,
    ru: *mut usize,
    m: *mut usize,
    rv: *mut usize,
) -> RksStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("solution"))?;
        let sol = &s.solution;
        for (dst, val) in [(n, sol.u.nrows()), (ru, sol.u.ncols()), (m, sol.v.nrows()), (rv, sol.v.ncols())] {
            if !dst.is_null() {
                *dst = val;
            }
        }
        Ok(RksStatus::Ok)
    })
}

unsafe fn copy_out(m: &CMat, buf: *mut f64, len: usize) -> Result<RksStatus, (RksStatus, String)> {
    if m.is_empty() {
        return Ok(RksStatus::Ok);
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < 2 * m.len() {
        return Err((
            RksStatus::DimensionMismatch,
            format!("buffer holds {len} doubles, {} needed", 2 * m.len()),
        ));
    }
    let dst = std::slice::from_raw_parts_mut(buf, 2 * m.len());
    for (d, z) in dst.chunks_exact_mut(2).zip(m.iter()) {
        d[0] = z.re;
        d[1] = z.im;
    }
    Ok(RksStatus::Ok)
}

/// Copies `U` into `buf` (`len` doubles, at least `2·n·ru`).
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rks_solution_copy_u(s: *const RksSolution, buf: *mut f64, len: usize) -> RksStatus {
    guard(|| copy_out(&s.as_ref().ok_or_else(|| null("solution"))?.solution.u, buf, len))
}

/// Copies `Y` into `buf` (at least `2·ru·rv` doubles).
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rks_solution_copy_y(s: *const RksSolution, buf: *mut f64, len: usize) -> RksStatus {
    guard(|| copy_out(&s.as_ref().ok_or_else(|| null("solution"))?.solution.y, buf, len))
}

/// Copies `V` into `buf` (at least `2·m·rv` doubles).
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rks_solution_copy_v(s: *const RksSolution, buf: *mut f64, len: usize) -> RksStatus {
    guard(|| copy_out(&s.as_ref().ok_or_else(|| null("solution"))?.solution.v, buf, len))
}

/// Relative residual of the returned iterate, or NaN for a null handle.
///
/// # Safety
/// `s` must come from [`rks_solve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rks_solution_residual(s: *const RksSolution) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.solution.residual)
}

/// # Safety
/// `s` must come from [`rks_solve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rks_solution_iterations(s: *const RksSolution) -> usize {
    s.as_ref().map_or(0, |s| s.solution.iterations)
}

/// # Safety
/// `s` must come from [`rks_solve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rks_solution_converged(s: *const RksSolution) -> bool {
    s.as_ref().is_some_and(|s| s.solution.converged)
}

/// Copies up to `len` relative residuals (one per iteration) and returns the
/// number of iterations recorded.
///
/// # Safety
/// `buf` must hold `len` doubles or be null when `len` is 0.
#[no_mangle]
pub unsafe extern "C" fn rks_solution_history(s: *const RksSolution, buf: *mut f64, len: usize) -> usize {
    let Some(s) = s.as_ref() else {
        return 0;
    };
    if !buf.is_null() {
        let k = len.min(s.history.len());
        std::slice::from_raw_parts_mut(buf, k).copy_from_slice(&s.history[..k]);
    }
    s.history.len()
}

/// # Safety
/// `s` must come from [`rks_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rks_solution_free(s: *mut RksSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
