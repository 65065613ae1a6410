#![allow(dead_code)]

use std::sync::Arc;

use blk_rksylv::linalg::{c64, fro, identity};
use blk_rksylv::matpoly::MatrixPolynomial;
use blk_rksylv::poles::PoleStrategy;
use blk_rksylv::sylvester::SolveOptions;
use blk_rksylv::sylvester::SylvesterProblem;
use blk_rksylv::{CMat, LinearOperator, Pole, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_mat(r: &mut ChaCha8Rng, n: usize, m: usize) -> CMat {
    CMat::from_fn(n, m, |_, _| c64(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5))
}

/// Random matrix plus `shift·I`; for moderate `n` its spectrum sits in a disk
/// of radius about `0.4·sqrt(n)` around `shift`.
pub fn shifted_mat(r: &mut ChaCha8Rng, n: usize, shift: f64) -> CMat {
    let mut a = rand_mat(r, n, n);
    for i in 0..n {
        a[(i, i)] += c64(shift, 0.0);
    }
    a
}

pub fn rel(x: &CMat, y: &CMat) -> f64 {
    fro(&(x - y)) / fro(y).max(f64::MIN_POSITIVE)
}

pub fn dense_problem(a: CMat, b: CMat, u: CMat, v: CMat) -> SylvesterProblem {
    SylvesterProblem::new(Arc::new(a) as Arc<dyn LinearOperator>, Arc::new(b), u, v).unwrap()
}

/// A random pole away from the disk of radius `keep_out` around `center`.
pub fn random_pole(r: &mut ChaCha8Rng, center: f64, keep_out: f64, complex: bool) -> Pole {
    let dist = keep_out * (1.5 + r.random::<f64>());
    let side = if r.random::<bool>() { 1.0 } else { -1.0 };
    let im = if complex { (r.random::<f64>() - 0.5) * keep_out } else { 0.0 };
    Pole::Finite(C64::new(center + side * dist, im))
}

/// Problem with Λ(A) around `+s` and Λ(B) around `-s`.
pub fn random_problem(r: &mut ChaCha8Rng, n: usize, m: usize, b: usize, s: f64) -> SylvesterProblem {
    let a = shifted_mat(r, n, s);
    let bm = shifted_mat(r, m, -s);
    let u = rand_mat(r, n, b);
    let v = rand_mat(r, m, b);
    dense_problem(a, bm, u, v)
}

/// Pole pairs placed on the far side of each spectrum, mixing ∞, real and
/// conjugate pairs.
pub fn random_pairs(r: &mut ChaCha8Rng, count: usize, s: f64) -> Vec<(Pole, Pole)> {
    let mut out = Vec::new();
    while out.len() < count {
        match r.random_range(0..3) {
            0 => out.push((Pole::Infinite, Pole::Infinite)),
            1 => out.push((random_pole(r, -s, 1.0, false), random_pole(r, s, 1.0, false))),
            _ => {
                let pa = random_pole(r, -s, 1.0, true);
                let pb = random_pole(r, s, 1.0, true);
                out.push((pa, pb));
                out.push((pa.conj(), pb.conj()));
            }
        }
    }
    out.truncate(count);
    out
}

/// Rounding floor of the dense residual evaluation itself.
pub fn oracle_floor(p: &SylvesterProblem, y: &CMat) -> f64 {
    let (n, m) = (p.a().dim(), p.b().dim());
    let na = fro(&p.a().apply(&identity(n)));
    let nb = fro(&p.b().apply(&identity(m)));
    let dims = (n.max(m) as f64).sqrt();
    16.0 * f64::EPSILON * dims * ((na + nb) * fro(y) + p.rhs_norm())
}

pub fn fixed_opts(pairs: Vec<(Pole, Pole)>, iters: usize, start: Pole) -> SolveOptions {
    SolveOptions {
        tol: 1e-300,
        max_iter: iters,
        strategy: PoleStrategy::Fixed(pairs),
        start_pole: start,
        ..Default::default()
    }
}

/// Poles for a random space: `count` entries mixing ∞, real and complex values
/// outside a disk of radius `keep_out` around the spectrum centre.
pub fn random_poles(r: &mut ChaCha8Rng, count: usize, keep_out: f64) -> Vec<Pole> {
    (0..count)
        .map(|_| match r.random_range(0..3) {
            0 => Pole::Infinite,
            1 => random_pole(r, 0.0, keep_out, false),
            _ => random_pole(r, 0.0, keep_out, true),
        })
        .collect()
}

pub fn rand_poly(r: &mut ChaCha8Rng, b: usize, d: usize) -> MatrixPolynomial {
    MatrixPolynomial::new((0..=d).map(|_| rand_mat(r, b, b)).collect()).unwrap()
}

/// Polynomial whose values stay well conditioned on a disk of radius ~3 around the origin.
pub fn safe_poly(r: &mut ChaCha8Rng, b: usize, d: usize) -> MatrixPolynomial {
    if d == 0 {
        return MatrixPolynomial::identity(b);
    }
    let mut coeffs: Vec<CMat> = (0..d).map(|_| rand_mat(r, b, b) * c64(0.2, 0.0)).collect();
    coeffs[0] += identity(b) * c64(20.0_f64.powi(d as i32), 0.0);
    coeffs.push(identity(b));
    MatrixPolynomial::new(coeffs).unwrap()
}

pub fn far_roots(r: &mut ChaCha8Rng, q: usize) -> Vec<C64> {
    (0..q)
        .map(|_| C64::from_polar(8.0 + 4.0 * r.random::<f64>(), 6.3 * r.random::<f64>()))
        .collect()
}
