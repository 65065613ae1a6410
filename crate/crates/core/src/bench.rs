//! Poisson and convection–diffusion benchmark problems and the harness that
//! runs pole strategies on them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::brad::Pole;
use crate::error::{Error, Result};
use crate::linalg::{c64, C64};
use crate::operator::{LinearOperator, Tridiagonal};
use crate::poles::{tridiagonal_fov_points, PoleStrategy, DEFAULT_FOV_SAMPLES};
use crate::rhs::{default_rhs, grid_points, low_rank_rhs, RankRule};
use crate::sylvester::{solve, FovOptions, IterationRecord, SolveOptions, SylvesterProblem};

/// Viscosity of the reference convection–diffusion instance.
pub const DEFAULT_EPSILON: f64 = 0.0083;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Poisson,
    Convdiff,
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Poisson => "poisson",
            ProblemKind::Convdiff => "convdiff",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "poisson" => Ok(ProblemKind::Poisson),
            "convdiff" | "convection-diffusion" => Ok(ProblemKind::Convdiff),
            other => Err(Error::InvalidArgument(format!("unknown problem '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub problem: ProblemKind,
    /// Interior grid points per direction.
    pub n: usize,
    pub epsilon: f64,
    pub rank: RankRule,
    pub tol: f64,
    pub max_iter: usize,
    pub fov_samples: usize,
    pub pairing: bool,
    pub parallel: bool,
}

impl BenchmarkSpec {
    pub fn new(problem: ProblemKind, n: usize) -> Self {
        Self {
            problem,
            n,
            epsilon: DEFAULT_EPSILON,
            rank: RankRule::Default,
            tol: 1e-8,
            max_iter: 100,
            fov_samples: DEFAULT_FOV_SAMPLES,
            pairing: true,
            parallel: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 16 {
            return Err(Error::InvalidArgument("n must be at least 16".into()));
        }
        if self.problem == ProblemKind::Convdiff && !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Assembled benchmark with the operators kept in tridiagonal form.
#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub a: Tridiagonal,
    pub b: Tridiagonal,
    pub problem: SylvesterProblem,
    pub rhs_singular_values: Vec<f64>,
}

impl BenchInstance {
    pub fn rank(&self) -> usize {
        self.problem.block_size()
    }

    /// Boundary points of the fields of values of `A` and `B^H`.
    pub fn fov_points(&self, samples: usize) -> Result<(Vec<C64>, Vec<C64>)> {
        Ok((
            tridiagonal_fov_points(&self.a, samples)?,
            tridiagonal_fov_points(&self.b.conj_transpose(), samples)?,
        ))
    }
}

/// `(1/h²) tridiag(1, -2, 1)` with `h = 1/(n+1)`.
pub fn laplacian(n: usize) -> Result<Tridiagonal> {
    let h = 1.0 / (n as f64 + 1.0);
    Tridiagonal::toeplitz(n, 1.0, -2.0, 1.0).map(|t| t.scale(1.0 / (h * h)))
}

/// `(1/2h) tridiag(-1, 0, 1)`.
pub fn centered_difference(n: usize) -> Result<Tridiagonal> {
    let h = 1.0 / (n as f64 + 1.0);
    Tridiagonal::toeplitz(n, -1.0, 0.0, 1.0).map(|t| t.scale(0.5 / h))
}

fn assemble(a: Tridiagonal, b: Tridiagonal, n: usize, rank: RankRule) -> Result<BenchInstance> {
    let x = grid_points(n);
    let rhs = low_rank_rhs(&default_rhs, &x, &x, rank)?;
    let problem = SylvesterProblem::new(
        Arc::new(a.clone()) as Arc<dyn LinearOperator>,
        Arc::new(b.clone()) as Arc<dyn LinearOperator>,
        rhs.u,
        rhs.v,
    )?;
    Ok(BenchInstance {
        a,
        b,
        problem,
        rhs_singular_values: rhs.singular_values,
    })
}

/// `A X + X A = F` written as `A X - X (-A) = F`.
pub fn build_poisson(n: usize) -> Result<BenchInstance> {
    build_poisson_with(n, RankRule::Default)
}

pub fn build_poisson_with(n: usize, rank: RankRule) -> Result<BenchInstance> {
    if n < 16 {
        return Err(Error::InvalidArgument("n must be at least 16".into()));
    }
    let a = laplacian(n)?;
    let b = a.neg();
    assemble(a, b, n, rank)
}

/// `(εL + Φ D) X + X (εL + D^H Ψ) = F` written as `A X - X B = F`.
pub fn build_convdiff(
    n: usize,
    epsilon: f64,
    phi: &dyn Fn(f64) -> f64,
    psi: &dyn Fn(f64) -> f64,
    rank: RankRule,
) -> Result<BenchInstance> {
    if n < 16 || !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("need n ≥ 16 and epsilon > 0".into()));
    }
    let x = grid_points(n);
    let l = laplacian(n)?.scale(epsilon);
    let d = centered_difference(n)?;
    let phi_v: Vec<f64> = x.iter().map(|&t| phi(t)).collect();
    let psi_v: Vec<f64> = x.iter().map(|&t| psi(t)).collect();
    let a = l.add(&d.row_scale(&phi_v))?;
    let b = l.add(&d.conj_transpose().col_scale(&psi_v))?.neg();
    assemble(a, b, n, rank)
}

pub fn convdiff_phi(x: f64) -> f64 {
    1.0 + (x + 1.0) * (x + 1.0) / 4.0
}

pub fn convdiff_psi(y: f64) -> f64 {
    0.5 * y
}

pub fn build(spec: &BenchmarkSpec) -> Result<BenchInstance> {
    spec.validate()?;
    match spec.problem {
        ProblemKind::Poisson => build_poisson_with(spec.n, spec.rank),
        ProblemKind::Convdiff => build_convdiff(spec.n, spec.epsilon, &convdiff_phi, &convdiff_psi, spec.rank),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub iter: usize,
    pub k: usize,
    pub residual_rel: f64,
    pub pole_a: Pole,
    pub pole_b: Pole,
    pub time_s: f64,
}

impl From<&IterationRecord> for RunRow {
    fn from(r: &IterationRecord) -> Self {
        Self {
            iter: r.iteration,
            k: r.order_a,
            residual_rel: r.residual,
            pole_a: r.pole_a,
            pole_b: r.pole_b,
            time_s: r.seconds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: ProblemKind,
    pub n: usize,
    pub rank: usize,
    pub strategy: String,
    pub rows: Vec<RunRow>,
    pub iterations: usize,
    pub final_residual: f64,
    pub total_seconds: f64,
    pub converged: bool,
}

impl RunRecord {
    /// First iteration whose residual is at most `level`.
    pub fn iterations_to_reach(&self, level: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.residual_rel <= level).map(|r| r.iter)
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub strategy: String,
    pub result: Result<RunRecord>,
}

/// Runs one strategy on an assembled instance.
pub fn run_strategy(
    spec: &BenchmarkSpec,
    inst: &BenchInstance,
    fov: &(Vec<C64>, Vec<C64>),
    strategy: &PoleStrategy,
    trace: bool,
) -> Result<(RunRecord, crate::sylvester::SylvesterState)> {
    let opts = SolveOptions {
        tol: spec.tol,
        max_iter: spec.max_iter,
        strategy: strategy.clone(),
        fov: FovOptions {
            samples: spec.fov_samples,
            a_points: Some(fov.0.clone()),
            bh_points: Some(fov.1.clone()),
            ..FovOptions::default()
        },
        pairing: spec.pairing,
        trace,
        start_pole: Pole::Infinite,
    };
    let start = Instant::now();
    let (sol, state) = solve(&inst.problem, &opts)?;
    let rows: Vec<RunRow> = state.history.iter().map(RunRow::from).collect();
    Ok((
        RunRecord {
            problem: spec.problem,
            n: spec.n,
            rank: inst.rank(),
            strategy: strategy.name().to_string(),
            iterations: sol.iterations,
            final_residual: sol.residual,
            total_seconds: start.elapsed().as_secs_f64(),
            converged: sol.converged,
            rows,
        },
        state,
    ))
}

/// Builds the problem once and runs every strategy; failures are reported
/// per strategy.
pub fn run(spec: &BenchmarkSpec, strategies: &[PoleStrategy]) -> Result<Vec<RunOutcome>> {
    let inst = build(spec)?;
    let fov = inst.fov_points(spec.fov_samples)?;
    let one = |s: &PoleStrategy| RunOutcome {
        strategy: s.name().to_string(),
        result: run_strategy(spec, &inst, &fov, s, false).map(|r| r.0),
    };
    if spec.parallel {
        Ok(std::thread::scope(|scope| {
            let handles: Vec<_> = strategies.iter().map(|s| scope.spawn(move || one(s))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("strategy thread panicked"))
                .collect()
        }))
    } else {
        Ok(strategies.iter().map(one).collect())
    }
}

fn pole_fields(p: Pole) -> (String, String) {
    match p {
        Pole::Infinite => ("inf".into(), "0".into()),
        Pole::Finite(z) => (format!("{:e}", z.re), format!("{:e}", z.im)),
    }
}

/// CSV with columns `iter,k,residual_rel,pole_re,pole_im,time_s`; the pole is
/// the one added to the A-space.
pub fn write_csv<W: std::io::Write>(record: &RunRecord, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["iter", "k", "residual_rel", "pole_re", "pole_im", "time_s"])?;
    for r in &record.rows {
        let (re, im) = pole_fields(r.pole_a);
        out.write_record([
            r.iter.to_string(),
            r.k.to_string(),
            format!("{:e}", r.residual_rel),
            re,
            im,
            format!("{:.6}", r.time_s),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn csv_path(dir: &Path, record: &RunRecord) -> PathBuf {
    dir.join(format!("{}_{}.csv", record.problem.name(), record.strategy))
}

pub fn emit_csv(dir: &Path, record: &RunRecord) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = csv_path(dir, record);
    write_csv(record, std::fs::File::create(&path)?)?;
    Ok(path)
}

/// Summary table: strategy, iterations, residual, time.
pub fn emit_table(outcomes: &[RunOutcome]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<8} {:>6} {:>12} {:>10}", "method", "iter", "residual", "time (s)");
    for o in outcomes {
        match &o.result {
            Ok(r) => {
                let flag = if r.converged { "" } else { "  (not converged)" };
                let _ = writeln!(
                    s,
                    "{:<8} {:>6} {:>12.2e} {:>10.2}{flag}",
                    r.strategy, r.iterations, r.final_residual, r.total_seconds
                );
            }
            Err(e) => {
                let _ = writeln!(s, "{:<8} error: {e}", o.strategy);
            }
        }
    }
    s
}

pub fn emit_json(outcomes: &[RunOutcome]) -> Result<String> {
    let v: Vec<serde_json::Value> = outcomes
        .iter()
        .map(|o| match &o.result {
            Ok(r) => serde_json::to_value(r).map_err(Error::from),
            Err(e) => Ok(serde_json::json!({ "strategy": o.strategy, "error": e.to_string() })),
        })
        .collect::<Result<_>>()?;
    Ok(serde_json::to_string_pretty(&v)?)
}

fn parse_pole(tokens: &mut std::iter::Peekable<std::str::SplitWhitespace<'_>>, line: usize) -> Result<Option<Pole>> {
    let bad = |t: &str| Error::InvalidArgument(format!("line {line}: cannot parse '{t}'"));
    let Some(first) = tokens.next() else {
        return Ok(None);
    };
    if first.eq_ignore_ascii_case("inf") {
        return Ok(Some(Pole::Infinite));
    }
    let re: f64 = first.parse().map_err(|_| bad(first))?;
    let im_tok = tokens.next().ok_or_else(|| bad(first))?;
    let im: f64 = im_tok.parse().map_err(|_| bad(im_tok))?;
    Ok(Some(Pole::Finite(c64(re, im))))
}

/// Fixed-pole file: one pair per line, `a_re a_im [b_re b_im]` with `inf` for
/// an infinite pole; a single pole is used for both spaces. `#` starts a comment.
pub fn parse_fixed_poles(text: &str) -> Result<Vec<(Pole, Pole)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace().peekable();
        let a = parse_pole(&mut tokens, i + 1)?.expect("non-empty line");
        let b = parse_pole(&mut tokens, i + 1)?.unwrap_or(a);
        if tokens.next().is_some() {
            return Err(Error::InvalidArgument(format!("line {}: too many fields", i + 1)));
        }
        out.push((a, b));
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("fixed pole file holds no poles".into()));
    }
    Ok(out)
}

/// `adm`, `sadm`, `ext` or `fixed:FILE`.
pub fn parse_strategy(s: &str) -> Result<PoleStrategy> {
    match s.trim() {
        "adm" | "ADM" => Ok(PoleStrategy::Adm),
        "sadm" | "sADM" => Ok(PoleStrategy::Sadm),
        "ext" | "extended" => Ok(PoleStrategy::Extended),
        other => match other.strip_prefix("fixed:") {
            Some(path) => Ok(PoleStrategy::Fixed(parse_fixed_poles(&std::fs::read_to_string(path)?)?)),
            None => Err(Error::InvalidArgument(format!("unknown pole strategy '{other}'"))),
        },
    }
}
