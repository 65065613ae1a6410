//! Low-rank factorizations `F ≈ u v^H` of grid samples of a smooth function.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{complexify, CMat};

/// Truncation rule for the singular values of the sampled matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankRule {
    /// Keep `σ_i > max(n, m)·eps·σ_1`.
    Default,
    /// Keep `σ_i > tol·σ_1`.
    Relative(f64),
    /// Keep exactly this many (capped by the numerical rank of the cross approximation).
    Fixed(usize),
}

#[derive(Debug, Clone)]
pub struct LowRankRhs {
    /// `U_r Σ_r`.
    pub u: CMat,
    /// `V_r`.
    pub v: CMat,
    /// All singular values of the cross approximation, descending.
    pub singular_values: Vec<f64>,
}

impl LowRankRhs {
    pub fn rank(&self) -> usize {
        self.u.ncols()
    }
}

/// `n` interior points of `[0, 1]` with spacing `1/(n+1)`.
pub fn grid_points(n: usize) -> Vec<f64> {
    let h = 1.0 / (n as f64 + 1.0);
    (1..=n).map(|i| i as f64 * h).collect()
}

/// The default right-hand side `1/(1+x+y)`.
pub fn default_rhs(x: f64, y: f64) -> f64 {
    1.0 / (1.0 + x + y)
}

const CROSS_MAX_RANK: usize = 96;

/// Full-pivot cross approximation of `F_ij = f(x_i, y_j)`; returns factors
/// with `F ≈ A B^T`.
fn cross(f: &dyn Fn(f64, f64) -> f64, x: &[f64], y: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, m) = (x.len(), y.len());
    let mut e = DMatrix::from_fn(n, m, |i, j| f(x[i], y[j]));
    let scale = e.amax();
    let cap = CROSS_MAX_RANK.min(n).min(m);
    let mut a_cols = Vec::new();
    let mut b_cols = Vec::new();
    while a_cols.len() < cap {
        let (mut pi, mut pj, mut best) = (0, 0, 0.0f64);
        for j in 0..m {
            for (i, val) in e.column(j).iter().enumerate() {
                if val.abs() > best {
                    best = val.abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        if !(best > 4.0 * f64::EPSILON * scale) {
            break;
        }
        let piv = e[(pi, pj)];
        let col = e.column(pj) / piv;
        let row = e.row(pi).transpose();
        e -= &col * row.transpose();
        a_cols.push(col);
        b_cols.push(row);
    }
    let r = a_cols.len();
    let mut a = DMatrix::zeros(n, r);
    let mut b = DMatrix::zeros(m, r);
    for k in 0..r {
        a.set_column(k, &a_cols[k]);
        b.set_column(k, &b_cols[k]);
    }
    (a, b)
}

/// Truncated SVD of the grid sample of `f`, returned as `u = U_r Σ_r`, `v = V_r`.
pub fn low_rank_rhs(f: &dyn Fn(f64, f64) -> f64, x: &[f64], y: &[f64], rule: RankRule) -> Result<LowRankRhs> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    if let RankRule::Relative(t) = rule {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument("rank tolerance must be positive".into()));
        }
    }
    let (a, b) = cross(f, x, y);
    if a.ncols() == 0 {
        return Ok(LowRankRhs {
            u: CMat::zeros(x.len(), 0),
            v: CMat::zeros(y.len(), 0),
            singular_values: Vec::new(),
        });
    }
    let qa = a.qr();
    let qb = b.qr();
    let core = qa.r() * qb.r().transpose();
    let svd = core.svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let s1 = sv[0];
    let keep = match rule {
        RankRule::Default => {
            let tol = x.len().max(y.len()) as f64 * f64::EPSILON * s1;
            sv.iter().take_while(|&&s| s > tol).count()
        }
        RankRule::Relative(t) => sv.iter().take_while(|&&s| s > t * s1).count(),
        RankRule::Fixed(r) => r.min(sv.len()),
    };
    let uc = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    let mut us = DMatrix::zeros(uc.nrows(), keep);
    let mut vs = DMatrix::zeros(vt.ncols(), keep);
    for (c, &i) in order.iter().take(keep).enumerate() {
        us.set_column(c, &(uc.column(i) * sv[c]));
        vs.set_column(c, &vt.row(i).transpose());
    }
    Ok(LowRankRhs {
        u: complexify(&(qa.q() * us)),
        v: complexify(&(qb.q() * vs)),
        singular_values: sv,
    })
}
