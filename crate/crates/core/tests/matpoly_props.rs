mod common;

use blk_rksylv::linalg::{c64, fro, identity};
use blk_rksylv::matpoly::*;
use blk_rksylv::oracle::{
    dense_apply_inv_kron, dense_apply_kron, dense_apply_rational_inv_kron, dense_apply_rational_kron, dense_scalar_poly,
};
use blk_rksylv::{CMat, C64};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn sizes() -> impl Strategy<Value = (u64, usize, usize, usize)> {
    (any::<u64>(), 2usize..=12, 1usize..=3, 0usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn apply_matches_kronecker((seed, n, b, d) in sizes()) {
        let mut r = rng(seed);
        let p = rand_poly(&mut r, b, d);
        let a = rand_mat(&mut r, n, n);
        let v = rand_mat(&mut r, n, b);
        let got = apply(&p, &a, &v).unwrap();
        let want = dense_apply_kron(p.coeffs(), &a, &v).unwrap();
        prop_assert!(rel(&got, &want) <= 1e-11, "{}", rel(&got, &want));
    }

    #[test]
    fn apply_inv_matches_kronecker((seed, n, b, d) in sizes()) {
        let mut r = rng(seed);
        let p = safe_poly(&mut r, b, d);
        let a = shifted_mat(&mut r, n, 0.0);
        let v = rand_mat(&mut r, n, b);
        let got = apply_inv(&p, &a, &v).unwrap();
        let want = dense_apply_inv_kron(p.coeffs(), &a, &v).unwrap();
        prop_assert!(rel(&got, &want) <= 1e-10, "{}", rel(&got, &want));
        let back = apply(&p, &a, &got).unwrap();
        prop_assert!(rel(&back, &v) <= 1e-10);
    }

    #[test]
    fn apply_rational_matches_kronecker((seed, n, b, d) in sizes(), q in 0usize..=3) {
        let mut r = rng(seed);
        let p = rand_poly(&mut r, b, d);
        let roots = far_roots(&mut r, q);
        let rf = RationalMatrixFunction::new(p.clone(), ScalarDenominator::new(roots.clone()).unwrap());
        let a = shifted_mat(&mut r, n, 0.0);
        let v = rand_mat(&mut r, n, b);
        let got = apply_rational(&rf, &a, &v).unwrap();
        let want = dense_apply_rational_kron(p.coeffs(), &roots, &a, &v).unwrap();
        prop_assert!(rel(&got, &want) <= 1e-10, "{}", rel(&got, &want));

        let sp = safe_poly(&mut r, b, d);
        let rs = RationalMatrixFunction::new(sp.clone(), ScalarDenominator::new(roots.clone()).unwrap());
        let got = apply_rational_inv(&rs, &a, &v).unwrap();
        let want = dense_apply_rational_inv_kron(sp.coeffs(), &roots, &a, &v).unwrap();
        prop_assert!(rel(&got, &want) <= 1e-10, "{}", rel(&got, &want));
    }

    #[test]
    fn apply_is_linear((seed, n, b, d) in sizes()) {
        let mut r = rng(seed);
        let p = rand_poly(&mut r, b, d);
        let a = rand_mat(&mut r, n, n);
        let (v1, v2) = (rand_mat(&mut r, n, b), rand_mat(&mut r, n, b));
        let alpha = c64(r.random::<f64>() - 0.5, r.random::<f64>());
        let lhs = apply(&p, &a, &(&v1 * alpha + &v2)).unwrap();
        let rhs = apply(&p, &a, &v1).unwrap() * alpha + apply(&p, &a, &v2).unwrap();
        prop_assert!(rel(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn scalar_product_lemma((seed, n, b, d) in sizes(), q in 1usize..=2) {
        let mut r = rng(seed);
        let a = shifted_mat(&mut r, n, 0.0);
        let v = rand_mat(&mut r, n, b);
        let roots = far_roots(&mut r, q);
        let qa = dense_scalar_poly(&a, &roots);

        let p = rand_poly(&mut r, b, d);
        let lhs = &qa * apply(&p, &a, &v).unwrap();
        let rhs = apply(&p.mul_by_roots(&roots).unwrap(), &a, &v).unwrap();
        prop_assert!(rel(&lhs, &rhs) <= 1e-10);

        let sp = safe_poly(&mut r, b, d);
        let w = apply_inv(&sp, &a, &v).unwrap();
        let lhs = qa.clone().lu().solve(&w).unwrap();
        let rhs = apply_inv(&sp.mul_by_roots(&roots).unwrap(), &a, &v).unwrap();
        prop_assert!(rel(&lhs, &rhs) <= 1e-10, "{}", rel(&lhs, &rhs));
    }

    #[test]
    fn representation_independence((seed, n, b, d) in sizes(), q in 0usize..=2) {
        let mut r = rng(seed);
        let p = rand_poly(&mut r, b, d);
        let rf = RationalMatrixFunction::new(p, ScalarDenominator::new(far_roots(&mut r, q)).unwrap());
        let common = rf.with_common_factor(&far_roots(&mut r, 2)).unwrap();
        let a = shifted_mat(&mut r, n, 0.0);
        let v = rand_mat(&mut r, n, b);
        let x = apply_rational(&rf, &a, &v).unwrap();
        let y = apply_rational(&common, &a, &v).unwrap();
        prop_assert!(rel(&y, &x) <= 1e-10);
    }

    #[test]
    fn scalar_evaluation_lemma((seed, n, b, d) in sizes(), m in 2usize..=8) {
        let mut r = rng(seed);
        let sp = safe_poly(&mut r, b, d);
        let rf = RationalMatrixFunction::new(sp, ScalarDenominator::new(far_roots(&mut r, 1)).unwrap());
        let z = c64(r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0);
        let zi = identity(n) * z;
        let v = rand_mat(&mut r, n, b);
        let lhs = apply_rational_inv(&rf, &zi, &v).unwrap();
        let rz = eval_at_scalar(&rf, z).unwrap();
        let rz_inv = rz.try_inverse().unwrap();
        let rhs = &v * &rz_inv;
        prop_assert!(rel(&lhs, &rhs) <= 1e-10);

        // R(zI_n)∘⁻¹(V W^H) = V (R^H(z̄ I_m)∘⁻¹ W)^H, with V n×b and W m×b acting blockwise.
        let w = rand_mat(&mut r, m, b);
        let zbar = identity(m) * z.conj();
        let right = apply_rational_inv(&rf.adjoint(), &zbar, &w).unwrap();
        let via_adjoint = &v * right.adjoint();
        let direct = &v * &rz_inv * w.adjoint();
        prop_assert!(rel(&via_adjoint, &direct) <= 1e-10);
    }

    #[test]
    fn b_one_reduces_to_scalar_functions(seed in any::<u64>(), n in 2usize..=10, d in 0usize..=4, q in 0usize..=2) {
        let mut r = rng(seed);
        let c: Vec<C64> = (0..=d).map(|_| c64(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect();
        let roots = far_roots(&mut r, q);
        let rf = RationalMatrixFunction::new(MatrixPolynomial::from_scalar(&c, 1).unwrap(), ScalarDenominator::new(roots.clone()).unwrap());
        let lambda: Vec<C64> = (0..n).map(|_| c64(r.random::<f64>() * 4.0 - 2.0, r.random::<f64>() - 0.5)).collect();
        let a = CMat::from_fn(n, n, |i, j| if i == j { lambda[i] } else { C64::new(0.0, 0.0) });
        let v = rand_mat(&mut r, n, 1);
        let got = apply_rational(&rf, &a, &v).unwrap();
        for i in 0..n {
            let l = lambda[i];
            let num = c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &ci| acc * l + ci);
            let den = roots.iter().fold(C64::new(1.0, 0.0), |acc, &x| acc * (l - x));
            let want = num / den * v[(i, 0)];
            prop_assert!((got[(i, 0)] - want).norm() <= 1e-12 * (1.0 + want.norm()));
            let scalar = eval_at_scalar(&rf, l).unwrap()[(0, 0)];
            prop_assert!((scalar - num / den).norm() <= 1e-12 * (1.0 + scalar.norm()));
        }
    }

    #[test]
    fn char_poly_is_monic_and_annihilates(seed in any::<u64>(), b in 1usize..=3, d in 1usize..=4) {
        let mut r = rng(seed);
        let n = b * d;
        let a = shifted_mat(&mut r, n, 1.0);
        let v = rand_mat(&mut r, n, b);
        match block_char_poly(&a, &v) {
            Ok(chi) => {
                prop_assert!(chi.is_monic());
                prop_assert_eq!(chi.degree(), d);
                let res = apply(&chi, &a, &v).unwrap();
                let scale = fro(&a).max(1.0).powi(d as i32) * fro(&v);
                prop_assert!(fro(&res) <= 1e-8 * scale, "{}", fro(&res) / scale);
                let first = block_char_poly_ordered(&a, &v, EigenOrdering::Angular).unwrap();
                prop_assert!(is_solvent(&chi, &first.solvents[0], 1e-8 * scale).is_solvent);
            }
            Err(blk_rksylv::Error::IllConditionedCharPoly { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

#[test]
fn cauchy_quadrature_on_safe_contours() {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let mut r = rng(1000 + seed);
        let b = 1 + (seed as usize % 2);
        let a = rand_mat(&mut r, 4, 4) * c64(0.5, 0.0);
        let s = rand_mat(&mut r, b, b) * c64(0.2, 0.0) + identity(b) * c64(5.0, 0.0);
        let rf = RationalMatrixFunction::polynomial(MatrixPolynomial::linear(&s).unwrap());
        let v = rand_mat(&mut r, 4, b);
        let err = cauchy_quadrature_check(&rf, &a, &v, c64(0.0, 0.0), 2.0, 128).unwrap();
        worst = worst.max(err);
    }
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn cauchy_quadrature_converges_with_nodes() {
    let mut r = rng(77);
    let a = rand_mat(&mut r, 5, 5) * c64(0.6, 0.0);
    let s = rand_mat(&mut r, 2, 2) * c64(0.3, 0.0) + identity(2) * c64(3.0, 0.0);
    let rf = RationalMatrixFunction::new(
        MatrixPolynomial::linear(&s).unwrap(),
        ScalarDenominator::new(vec![c64(4.0, 1.0)]).unwrap(),
    );
    let v = rand_mat(&mut r, 5, 2);
    let errs: Vec<f64> = [16, 32, 64, 128]
        .iter()
        .map(|&k| cauchy_quadrature_check(&rf, &a, &v, c64(0.0, 0.0), 1.8, k).unwrap())
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] <= 0.5 * w[0] || w[1] <= 1e-13, "{errs:?}");
    }
}

#[test]
fn commuting_operator_passes_through() {
    let mut r = rng(5);
    let a = shifted_mat(&mut r, 8, 0.0);
    let bm = &a * &a * c64(0.3, 0.1) + &a * c64(-1.0, 0.0) + identity(8) * c64(2.0, 0.0);
    let p = rand_poly(&mut r, 2, 2);
    let rf = RationalMatrixFunction::new(p, ScalarDenominator::new(vec![c64(9.0, 1.0)]).unwrap());
    let v = rand_mat(&mut r, 8, 2);
    let lhs = &bm * apply_rational(&rf, &a, &v).unwrap();
    let rhs = apply_rational(&rf, &a, &(&bm * &v)).unwrap();
    assert!(rel(&lhs, &rhs) <= 1e-10);
}

#[test]
fn sigma_min_is_inverse_norm_of_inverse() {
    let mut r = rng(9);
    for _ in 0..20 {
        let p = rand_poly(&mut r, 3, 2);
        let rf = RationalMatrixFunction::new(p, ScalarDenominator::new(vec![c64(5.0, 0.0)]).unwrap());
        let z = c64(r.random::<f64>(), r.random::<f64>());
        let s = sigma_min_at_scalar(&rf, z).unwrap();
        let inv = eval_at_scalar(&rf, z).unwrap().try_inverse().unwrap();
        let norm2 = inv.svd(false, false).singular_values.max();
        assert!((s - 1.0 / norm2).abs() <= 1e-10 * s);
    }
}
