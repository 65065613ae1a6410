use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c64, CMat};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_mat(r: &mut ChaCha8Rng, n: usize, m: usize) -> CMat {
    CMat::from_fn(n, m, |_, _| c64(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5))
}

/// Random matrix with eigenvalues in the right half plane, safely away from
/// the negative real poles used in tests.
pub fn shifted_mat(r: &mut ChaCha8Rng, n: usize, shift: f64) -> CMat {
    let mut a = rand_mat(r, n, n);
    for i in 0..n {
        a[(i, i)] += c64(shift, 0.0);
    }
    a
}
