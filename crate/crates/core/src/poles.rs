//! Pole selection: ADM and sADM objectives maximized over sampled
//! field-of-values boundaries, plus extended-Krylov and fixed baselines.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::brad::Pole;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_max_eigenpair, CMat, C64};
use crate::operator::{LinearOperator, Tridiagonal};

pub const DEFAULT_FOV_SAMPLES: usize = 200;

/// Points inserted between consecutive boundary samples and anchors.
pub const DEFAULT_GAP_FILL: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FovProvenance {
    UserBounds,
    RitzHull,
    HermitianSweep,
}

/// Discrete approximation of the boundary of a field of values.
#[derive(Debug, Clone, PartialEq)]
pub struct FovBoundarySamples {
    pub points: Vec<C64>,
    pub provenance: FovProvenance,
    /// Convex hull vertices in counter-clockwise order.
    pub hull: Vec<C64>,
}

fn cross(o: C64, a: C64, b: C64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Convex hull (monotone chain), counter-clockwise, collinear points dropped.
pub fn convex_hull(points: &[C64]) -> Vec<C64> {
    let mut p: Vec<C64> = points.to_vec();
    p.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let scale = p.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let eps = 1e-14 * scale * scale;
    let mut lower: Vec<C64> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= eps {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<C64> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= eps {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && lower[0] == lower[1] {
        lower.truncate(1);
    }
    lower
}

fn dedup_close(points: Vec<C64>) -> Vec<C64> {
    let scale = points.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut out: Vec<C64> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| (q - p).norm() <= 1e-14 * scale) {
            out.push(p);
        }
    }
    out
}

/// Closed polyline through the hull; a segment is traversed once.
fn hull_path(hull: &[C64]) -> Vec<C64> {
    let mut path = hull.to_vec();
    if hull.len() >= 3 {
        path.push(hull[0]);
    }
    path
}

fn path_length(path: &[C64]) -> f64 {
    path.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

fn point_at(path: &[C64], mut s: f64) -> C64 {
    for w in path.windows(2) {
        let len = (w[1] - w[0]).norm();
        if s <= len || len == 0.0 && s <= 0.0 {
            return if len > 0.0 { w[0] + (w[1] - w[0]) * (s / len) } else { w[0] };
        }
        s -= len;
    }
    *path.last().expect("non-empty path")
}

/// Arc-length coordinate of the point of `path` closest to `z`.
fn project_onto(path: &[C64], z: C64) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    let mut offset = 0.0;
    for w in path.windows(2) {
        let d = w[1] - w[0];
        let len = d.norm();
        let t = if len > 0.0 {
            (((z - w[0]) * d.conj()).re / (len * len)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let dist = (w[0] + d * t - z).norm();
        if dist < best.0 {
            best = (dist, offset + t * len);
        }
        offset += len;
    }
    best.1
}

fn resample(hull: &[C64], p: usize) -> Vec<C64> {
    match hull.len() {
        0 => Vec::new(),
        1 => vec![hull[0]],
        2 => (0..p)
            .map(|j| hull[0] + (hull[1] - hull[0]) * (j as f64 / (p - 1) as f64))
            .collect(),
        m if m >= p => (0..p).map(|j| hull[j * m / p]).collect(),
        m => {
            let path = hull_path(hull);
            let total = path_length(&path);
            let extra = p - m;
            let mut out = Vec::with_capacity(p);
            let mut assigned = 0usize;
            for (e, w) in path.windows(2).enumerate() {
                out.push(w[0]);
                let len = (w[1] - w[0]).norm();
                let cnt = if e + 1 == m {
                    extra - assigned
                } else {
                    ((extra as f64) * len / total).round() as usize
                }
                .min(extra - assigned);
                assigned += cnt;
                for i in 1..=cnt {
                    out.push(w[0] + (w[1] - w[0]) * (i as f64 / (cnt + 1) as f64));
                }
            }
            out
        }
    }
}

/// Rayleigh points of the top eigenvectors of `(e^{iθ}M + e^{-iθ}M^H)/2`.
pub fn hermitian_sweep(m: &CMat, p: usize) -> Result<Vec<C64>> {
    let mut pts = Vec::with_capacity(p);
    for j in 0..p {
        let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / p as f64);
        let h = (m * e + m.adjoint() * e.conj()).scale(0.5);
        let (_, q) = hermitian_max_eigenpair(&h)
            .ok_or_else(|| Error::FovEstimationFailed(format!("eigensolver failed at angle {j}")))?;
        let nq = q.norm_squared();
        let rq = (q.adjoint() * m * &q)[(0, 0)] / nq;
        pts.push(rq);
    }
    Ok(pts)
}

/// Sampled boundary of the field of values of `proj` (when given), united with
/// user-supplied points.
pub fn fov_boundary(proj: Option<&CMat>, bounds: Option<&[C64]>, p: usize) -> Result<FovBoundarySamples> {
    if p < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 boundary samples, got {p}")));
    }
    let mut pts = Vec::new();
    let provenance = match (proj, bounds) {
        (Some(m), _) if m.nrows() > 0 => {
            if m.nrows() != m.ncols() {
                return Err(Error::dims("fov_boundary", "projected matrix is not square"));
            }
            pts.extend(hermitian_sweep(m, p)?);
            FovProvenance::HermitianSweep
        }
        (_, Some(_)) => FovProvenance::UserBounds,
        _ => return Err(Error::FovEstimationFailed("no matrix and no bounds".into())),
    };
    if let Some(b) = bounds {
        pts.extend_from_slice(b);
    }
    if pts.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::FovEstimationFailed("non-finite boundary point".into()));
    }
    let hull = convex_hull(&pts);
    if hull.is_empty() {
        return Err(Error::FovEstimationFailed("empty point set".into()));
    }
    Ok(FovBoundarySamples {
        points: dedup_close(resample(&hull, p)),
        provenance,
        hull,
    })
}

/// Convex hull of Ritz values resampled to `p` points.
pub fn ritz_hull_boundary(ritz: &[C64], p: usize) -> Result<FovBoundarySamples> {
    let hull = convex_hull(ritz);
    if hull.is_empty() {
        return Err(Error::FovEstimationFailed("no Ritz values".into()));
    }
    Ok(FovBoundarySamples {
        points: dedup_close(resample(&hull, p.max(2))),
        provenance: FovProvenance::RitzHull,
        hull,
    })
}

impl FovBoundarySamples {
    /// Adds anchors (projected onto the boundary) and `per_gap` evenly spaced
    /// points between every pair of consecutive samples and anchors.
    pub fn refined(&self, anchors: &[C64], per_gap: usize) -> Self {
        if self.hull.len() < 2 {
            return self.clone();
        }
        let path = hull_path(&self.hull);
        let total = path_length(&path);
        if total == 0.0 {
            return self.clone();
        }
        let mut params: Vec<f64> = self
            .points
            .iter()
            .chain(anchors.iter())
            .map(|&z| project_onto(&path, z))
            .collect();
        params.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        params.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * total);
        let closed = self.hull.len() >= 3;
        let mut out = Vec::with_capacity(params.len() * (per_gap + 1));
        for (i, &s) in params.iter().enumerate() {
            out.push(point_at(&path, s));
            let next = match params.get(i + 1) {
                Some(&t) => t,
                None if closed => params[0] + total,
                None => break,
            };
            for j in 1..=per_gap {
                let t = s + (next - s) * j as f64 / (per_gap + 1) as f64;
                out.push(point_at(&path, t.rem_euclid(total.max(f64::MIN_POSITIVE))));
            }
        }
        Self {
            points: dedup_close(out),
            provenance: self.provenance,
            hull: self.hull.clone(),
        }
    }
}

/// Boundary points of the field of values of a tridiagonal operator from the
/// top eigenvectors of its rotated Hermitian parts (Sturm bisection and
/// inverse iteration).
pub fn tridiagonal_fov_points(t: &Tridiagonal, p: usize) -> Result<Vec<C64>> {
    let n = t.dim();
    let mut out = Vec::with_capacity(p);
    for j in 0..p {
        let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / p as f64);
        let d: Vec<f64> = t.diag.iter().map(|z| (z * e).re).collect();
        let off: Vec<C64> = (0..n.saturating_sub(1))
            .map(|i| (t.sub[i] * e + t.sup[i].conj() * e.conj()) * 0.5)
            .collect();
        let off2: Vec<f64> = off.iter().map(|z| z.norm_sqr()).collect();
        let radius = (0..n)
            .map(|i| {
                let mut r = 0.0;
                if i > 0 {
                    r += off2[i - 1].sqrt();
                }
                if i + 1 < n {
                    r += off2[i].sqrt();
                }
                r
            })
            .collect::<Vec<_>>();
        let mut lo = (0..n).map(|i| d[i] - radius[i]).fold(f64::INFINITY, f64::min);
        let mut hi = (0..n).map(|i| d[i] + radius[i]).fold(f64::NEG_INFINITY, f64::max);
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        let count_below = |x: f64| {
            let mut c = 0usize;
            let mut q = 1.0f64;
            for i in 0..n {
                q = d[i] - x - if i > 0 { off2[i - 1] / q } else { 0.0 };
                if q == 0.0 {
                    q = -f64::EPSILON * scale;
                }
                if q < 0.0 {
                    c += 1;
                }
            }
            c
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 4.0 * f64::EPSILON * scale || mid <= lo || mid >= hi {
                break;
            }
            if count_below(mid) >= n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let lambda = hi;
        let h = Tridiagonal::new(
            off.clone(),
            d.iter().map(|&x| C64::new(x, 0.0)).collect(),
            off.iter().map(|z| z.conj()).collect(),
        )?;
        let mut x = CMat::from_fn(n, 1, |i, _| C64::new(1.0 + (i as f64 * 0.618).sin() * 0.1, 0.0));
        let shift = C64::new(lambda + 1e-10 * scale, 0.0);
        for _ in 0..3 {
            x = h.shifted_solve(shift, &x).or_else(|_| {
                h.shifted_solve(C64::new(lambda + 1e-7 * scale, 0.0), &x)
            })?;
            let nx = x.norm();
            if !(nx > 0.0) || !nx.is_finite() {
                return Err(Error::FovEstimationFailed("inverse iteration diverged".into()));
            }
            x /= C64::new(nx, 0.0);
        }
        let ax = t.apply(&x);
        out.push((x.adjoint() * ax)[(0, 0)]);
    }
    Ok(out)
}

/// Inputs of the adaptive objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleContext {
    /// Previous finite poles ξ of the space being extended.
    pub poles: Vec<C64>,
    /// Ritz values μ, entering the objective as `|λ - μ̄|`.
    pub ritz: Vec<C64>,
    pub block_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleChoice {
    /// Conjugate of the maximizing candidate.
    pub pole: C64,
    pub index: usize,
    pub objective: f64,
    /// Candidate coincided with a conjugated Ritz value.
    pub infinite: bool,
}

fn check_inputs(ctx: &PoleContext, cands: &FovBoundarySamples) -> Result<()> {
    if ctx.ritz.is_empty() {
        return Err(Error::InvalidContext("empty Ritz set".into()));
    }
    if cands.points.is_empty() {
        return Err(Error::InvalidContext("no candidates".into()));
    }
    if ctx.block_size == 0 {
        return Err(Error::InvalidContext("block size must be positive".into()));
    }
    Ok(())
}

fn log_objective(lambda: C64, poles: &[C64], weight: f64, ritz: &[C64]) -> (f64, bool) {
    let mut den = 0.0;
    for mu in ritz {
        let d = (lambda - mu.conj()).norm();
        if d == 0.0 {
            return (f64::INFINITY, true);
        }
        den += d.ln();
    }
    let num: f64 = poles.iter().map(|xi| weight * (lambda - xi.conj()).norm().ln()).sum();
    (num - den, false)
}

fn argmax(values: impl Iterator<Item = (f64, bool)>, cands: &[C64]) -> PoleChoice {
    let mut best = PoleChoice {
        pole: cands[0].conj(),
        index: 0,
        objective: f64::NEG_INFINITY,
        infinite: false,
    };
    for (i, (v, inf)) in values.enumerate() {
        if v > best.objective || (i == 0 && v.is_nan()) {
            best = PoleChoice {
                pole: cands[i].conj(),
                index: i,
                objective: v,
                infinite: inf,
            };
        }
    }
    best
}

/// ADM objective `Σ_ξ b log|λ - ξ̄| - Σ_μ log|λ - μ̄|`.
pub fn adm_objective(ctx: &PoleContext, lambda: C64) -> f64 {
    log_objective(lambda, &ctx.poles, ctx.block_size as f64, &ctx.ritz).0
}

/// sADM objective: every b-th Ritz value by distance to λ̄, pole exponent 1.
pub fn sadm_objective(ctx: &PoleContext, lambda: C64) -> f64 {
    log_objective(lambda, &ctx.poles, 1.0, &sadm_kept(ctx, lambda)).0
}

/// Ritz values kept by sADM at candidate λ.
pub fn sadm_kept(ctx: &PoleContext, lambda: C64) -> Vec<C64> {
    let mut r = ctx.ritz.clone();
    let lb = lambda.conj();
    r.sort_by(|a, b| (lb - a).norm().partial_cmp(&(lb - b).norm()).unwrap_or(std::cmp::Ordering::Equal));
    r.into_iter().step_by(ctx.block_size.max(1)).collect()
}

pub fn adm_next_pole(ctx: &PoleContext, cands: &FovBoundarySamples) -> Result<PoleChoice> {
    check_inputs(ctx, cands)?;
    let w = ctx.block_size as f64;
    Ok(argmax(
        cands.points.iter().map(|&l| log_objective(l, &ctx.poles, w, &ctx.ritz)),
        &cands.points,
    ))
}

pub fn sadm_next_pole(ctx: &PoleContext, cands: &FovBoundarySamples) -> Result<PoleChoice> {
    check_inputs(ctx, cands)?;
    Ok(argmax(
        cands
            .points
            .iter()
            .map(|&l| log_objective(l, &ctx.poles, 1.0, &sadm_kept(ctx, l))),
        &cands.points,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PoleStrategy {
    Adm,
    Sadm,
    /// Alternates 0 and ∞.
    Extended,
    /// Cycles through (A-space pole, B-space pole) pairs.
    Fixed(Vec<(Pole, Pole)>),
}

impl PoleStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            PoleStrategy::Adm => "ADM",
            PoleStrategy::Sadm => "sADM",
            PoleStrategy::Extended => "ext",
            PoleStrategy::Fixed(_) => "fixed",
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, PoleStrategy::Adm | PoleStrategy::Sadm)
    }
}

/// Data for choosing the next pole of one space.
#[derive(Debug, Clone)]
pub struct SideInput {
    pub ctx: PoleContext,
    pub candidates: FovBoundarySamples,
}

/// Record of one adaptive choice.
#[derive(Debug, Clone)]
pub struct PoleTrace {
    pub ctx: PoleContext,
    pub candidates: Vec<C64>,
    pub choice: PoleChoice,
    pub paired: bool,
}

/// Stateful pole generator for the two spaces.
#[derive(Debug, Clone)]
pub struct PoleSelector {
    strategy: PoleStrategy,
    pairing: bool,
    calls: usize,
    unpaired: [Option<C64>; 2],
}

impl PoleSelector {
    pub fn new(strategy: PoleStrategy, pairing: bool) -> Result<Self> {
        if let PoleStrategy::Fixed(list) = &strategy {
            if list.is_empty() {
                return Err(Error::InvalidArgument("fixed pole list is empty".into()));
            }
        }
        Ok(Self {
            strategy,
            pairing,
            calls: 0,
            unpaired: [None, None],
        })
    }

    pub fn strategy(&self) -> &PoleStrategy {
        &self.strategy
    }

    fn pair_or(&mut self, side: usize, f: impl FnOnce() -> Result<(Pole, Option<PoleTrace>)>) -> Result<(Pole, Option<PoleTrace>)> {
        if self.pairing {
            if let Some(z) = self.unpaired[side].take() {
                return Ok((Pole::Finite(z.conj()), None));
            }
        }
        let (pole, trace) = f()?;
        if self.pairing {
            if let Pole::Finite(z) = pole {
                if z.im != 0.0 {
                    self.unpaired[side] = Some(z);
                }
            }
        }
        Ok((pole, trace))
    }

    /// Next (A-space, B-space) poles. Adaptive strategies need both inputs.
    pub fn next_pair(
        &mut self,
        a: Option<&SideInput>,
        b: Option<&SideInput>,
    ) -> Result<((Pole, Option<PoleTrace>), (Pole, Option<PoleTrace>))> {
        let call = self.calls;
        self.calls += 1;
        let strategy = self.strategy.clone();
        let choose = |input: Option<&SideInput>| -> Result<(Pole, Option<PoleTrace>)> {
            match &strategy {
                PoleStrategy::Extended => Ok((
                    if call % 2 == 0 { Pole::finite(0.0, 0.0) } else { Pole::Infinite },
                    None,
                )),
                PoleStrategy::Fixed(_) => unreachable!(),
                PoleStrategy::Adm | PoleStrategy::Sadm => {
                    let input = input.ok_or_else(|| Error::InvalidContext("missing selection data".into()))?;
                    let choice = if strategy == PoleStrategy::Adm {
                        adm_next_pole(&input.ctx, &input.candidates)?
                    } else {
                        sadm_next_pole(&input.ctx, &input.candidates)?
                    };
                    Ok((
                        Pole::Finite(choice.pole),
                        Some(PoleTrace {
                            ctx: input.ctx.clone(),
                            candidates: input.candidates.points.clone(),
                            choice,
                            paired: false,
                        }),
                    ))
                }
            }
        };
        if let PoleStrategy::Fixed(list) = &self.strategy {
            let (pa, pb) = list[call % list.len()];
            return Ok(((pa, None), (pb, None)));
        }
        let ra = self.pair_or(0, || choose(a))?;
        let rb = self.pair_or(1, || choose(b))?;
        Ok((ra, rb))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn cands(points: Vec<C64>) -> FovBoundarySamples {
        FovBoundarySamples {
            hull: convex_hull(&points),
            points,
            provenance: FovProvenance::UserBounds,
        }
    }

    #[test]
    fn two_point_adm() {
        let ctx = PoleContext {
            poles: vec![c64(-1.0, 0.0)],
            ritz: vec![c64(-2.0, 0.0)],
            block_size: 1,
        };
        let c = cands(vec![c64(-0.5, 0.0), c64(-3.0, 0.0)]);
        assert!((adm_objective(&ctx, c.points[0]).exp() - 1.0 / 3.0).abs() < 1e-14);
        assert!((adm_objective(&ctx, c.points[1]).exp() - 2.0).abs() < 1e-14);
        let ch = adm_next_pole(&ctx, &c).unwrap();
        assert_eq!(ch.pole, c64(-3.0, 0.0));
        assert_eq!(ch.index, 1);
    }

    #[test]
    fn returned_pole_is_conjugated() {
        let ctx = PoleContext {
            poles: vec![],
            ritz: vec![c64(0.0, 0.0)],
            block_size: 1,
        };
        let ch = adm_next_pole(&ctx, &cands(vec![c64(0.1, 0.1), c64(1.0, 2.0)])).unwrap();
        assert_eq!(ch.pole, c64(0.1, -0.1));
    }

    #[test]
    fn coincident_ritz_value_wins() {
        let ctx = PoleContext {
            poles: vec![c64(-5.0, 0.0)],
            ritz: vec![c64(1.0, -1.0)],
            block_size: 1,
        };
        let ch = adm_next_pole(&ctx, &cands(vec![c64(10.0, 0.0), c64(1.0, 1.0)])).unwrap();
        assert!(ch.infinite);
        assert_eq!(ch.index, 1);
    }

    #[test]
    fn sadm_keeps_closest_of_each_block() {
        let ctx = PoleContext {
            poles: vec![],
            ritz: vec![c64(-1.0, 0.0), c64(-1.1, 0.0), c64(-4.0, 0.0), c64(-4.2, 0.0)],
            block_size: 2,
        };
        assert_eq!(sadm_kept(&ctx, c64(-1.0, 0.0)), vec![c64(-1.0, 0.0), c64(-4.0, 0.0)]);
    }

    #[test]
    fn empty_context_rejected() {
        let ctx = PoleContext {
            poles: vec![],
            ritz: vec![],
            block_size: 1,
        };
        assert!(matches!(
            adm_next_pole(&ctx, &cands(vec![c64(1.0, 0.0)])),
            Err(Error::InvalidContext(_))
        ));
    }

    #[test]
    fn extended_and_fixed_sequences() {
        let mut s = PoleSelector::new(PoleStrategy::Extended, false).unwrap();
        let seq: Vec<Pole> = (0..4).map(|_| s.next_pair(None, None).unwrap().0 .0).collect();
        assert_eq!(seq, vec![Pole::finite(0.0, 0.0), Pole::Infinite, Pole::finite(0.0, 0.0), Pole::Infinite]);
        let list = vec![
            (Pole::finite(-1.0, 0.0), Pole::finite(-1.0, 0.0)),
            (Pole::finite(-2.0, 0.0), Pole::finite(-2.0, 0.0)),
        ];
        let mut s = PoleSelector::new(PoleStrategy::Fixed(list), false).unwrap();
        let seq: Vec<Pole> = (0..4).map(|_| s.next_pair(None, None).unwrap().0 .0).collect();
        assert_eq!(
            seq,
            vec![Pole::finite(-1.0, 0.0), Pole::finite(-2.0, 0.0), Pole::finite(-1.0, 0.0), Pole::finite(-2.0, 0.0)]
        );
    }

    #[test]
    fn pairing_returns_conjugate() {
        let input = SideInput {
            ctx: PoleContext {
                poles: vec![],
                ritz: vec![c64(0.0, 0.0)],
                block_size: 1,
            },
            candidates: cands(vec![c64(1.0, -2.0)]),
        };
        let mut s = PoleSelector::new(PoleStrategy::Adm, true).unwrap();
        let (a, _) = s.next_pair(Some(&input), Some(&input)).unwrap();
        assert_eq!(a.0, Pole::finite(1.0, 2.0));
        let (a, _) = s.next_pair(Some(&input), Some(&input)).unwrap();
        assert_eq!(a.0, Pole::finite(1.0, -2.0));
    }

    #[test]
    fn hermitian_fov_is_spectral_interval() {
        let m = CMat::from_fn(4, 4, |i, j| {
            if i == j {
                c64(i as f64 - 1.0, 0.0)
            } else if i + 1 == j || j + 1 == i {
                c64(0.3, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        let ev = crate::linalg::eigenvalues(&m).unwrap();
        let lo = ev.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let hi = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let f = fov_boundary(Some(&m), None, 32).unwrap();
        for z in &f.points {
            assert!(z.im.abs() < 1e-12);
            assert!(z.re >= lo - 1e-10 * (hi - lo) && z.re <= hi + 1e-10 * (hi - lo));
        }
    }

    #[test]
    fn jordan_block_disk() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = c64(1.0, 0.0);
        let f = fov_boundary(Some(&m), None, 64).unwrap();
        assert!(f.points.len() >= 8);
        for z in &f.points {
            assert!((z.norm() - 0.5).abs() < 1e-6, "{z}");
        }
    }

    #[test]
    fn refinement_keeps_points_on_segment() {
        let f = fov_boundary(None, Some(&[c64(-100.0, 0.0), c64(-1.0, 0.0)]), 10).unwrap();
        let r = f.refined(&[c64(-1.5, 0.0), c64(-1.2, 0.3)], 4);
        assert!(r.points.len() > f.points.len());
        for z in &r.points {
            assert!(z.im.abs() < 1e-14 && z.re >= -100.0 - 1e-12 && z.re <= -1.0 + 1e-12);
        }
        assert!(r.points.iter().any(|z| (z.re + 1.5).abs() < 1e-12));
    }

    #[test]
    fn tridiagonal_sweep_matches_dense() {
        let t = Tridiagonal::new(
            vec![c64(1.0, 0.5), c64(-0.3, 0.0), c64(0.2, 0.1)],
            vec![c64(1.0, 0.0), c64(-2.0, 1.0), c64(0.5, 0.0), c64(3.0, -0.5)],
            vec![c64(0.4, 0.0), c64(1.1, -0.2), c64(0.0, 0.7)],
        )
        .unwrap();
        let fast = tridiagonal_fov_points(&t, 16).unwrap();
        let dense = hermitian_sweep(&t.dense(), 16).unwrap();
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).norm() < 1e-8, "{a} {b}");
        }
    }
}
