use std::process::Command;

use blk_rksylv::bench::*;
use blk_rksylv::linalg::{c64, fro};
use blk_rksylv::operator::dense_of;
use blk_rksylv::poles::PoleStrategy;
use blk_rksylv::rhs::{default_rhs, grid_points, RankRule};
use blk_rksylv::{CMat, C64 as C};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blk-rksylv"))
}

#[test]
fn poisson_operator_structure() {
    let n = 64;
    let inst = build_poisson(n).unwrap();
    let a = inst.a.dense();
    let b = inst.b.dense();
    let h2 = ((n + 1) as f64).powi(2);
    assert_eq!(a, a.adjoint());
    assert_eq!(b, -&a);
    for i in 0..n {
        let row: C = a.row(i).iter().sum();
        let expect = if i == 0 || i == n - 1 { -h2 } else { 0.0 };
        assert!((row - c64(expect, 0.0)).norm() <= 1e-9 * h2, "row {i}");
        assert_eq!(a[(i, i)], c64(-2.0 * h2, 0.0));
    }
}

#[test]
fn convdiff_operator_structure() {
    let n = 48;
    let eps = DEFAULT_EPSILON;
    let d = centered_difference(n).unwrap().dense();
    assert_eq!(&d + d.adjoint(), CMat::zeros(n, n));
    let h = 1.0 / (n as f64 + 1.0);
    assert_eq!(d[(0, 1)], c64(0.5 / h, 0.0));
    let inst = build_convdiff(n, eps, &convdiff_phi, &convdiff_psi, RankRule::Default).unwrap();
    let l = laplacian(n).unwrap().dense();
    let x = grid_points(n);
    let phi = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, x.iter().map(|&t| c64(convdiff_phi(t), 0.0))));
    let psi = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, x.iter().map(|&t| c64(convdiff_psi(t), 0.0))));
    let a = l.scale(eps) + &phi * &d;
    let b = -(l.scale(eps) + d.adjoint() * &psi);
    assert!(fro(&(inst.a.dense() - &a)) <= 1e-12 * fro(&a));
    assert!(fro(&(inst.b.dense() - &b)) <= 1e-12 * fro(&b));
}

#[test]
fn low_rank_rhs_reproduces_samples() {
    let n = 128;
    let inst = build_poisson(n).unwrap();
    let x = grid_points(n);
    let f = CMat::from_fn(n, n, |i, j| c64(default_rhs(x[i], x[j]), 0.0));
    let p = &inst.problem;
    let approx = p.u() * p.v().adjoint();
    assert!(fro(&(approx - &f)) <= 1e-12 * fro(&f));
    assert!(inst.rhs_singular_values.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn benchmark_rhs_has_rank_eight_at_full_size() {
    assert_eq!(build_poisson(4096).unwrap().rank(), 8);
}

#[test]
fn strategies_reach_tolerance_with_true_residual() {
    for problem in [ProblemKind::Poisson, ProblemKind::Convdiff] {
        let spec = BenchmarkSpec::new(problem, 256);
        let inst = build(&spec).unwrap();
        let fov = inst.fov_points(spec.fov_samples).unwrap();
        let a = dense_of(inst.problem.a().as_ref());
        let b = dense_of(inst.problem.b().as_ref());
        let p = &inst.problem;
        let f = p.u() * p.v().adjoint();
        for strategy in [PoleStrategy::Adm, PoleStrategy::Sadm, PoleStrategy::Extended] {
            let (rec, st) = run_strategy(&spec, &inst, &fov, &strategy, false).unwrap();
            assert!(rec.converged, "{} {}", problem.name(), rec.strategy);
            let (pa, pb) = (st.proj_a.as_ref().unwrap(), st.proj_b.as_ref().unwrap());
            let u = st.brad_a.as_ref().unwrap().basis().columns(0, pa.cols).into_owned();
            let v = st.brad_b.as_ref().unwrap().basis().columns(0, pb.cols).into_owned();
            let x = &u * &st.y * v.adjoint();
            let res = fro(&(&a * &x - &x * &b - &f)) / fro(&f);
            assert!(res <= 1e-8, "{} {}: {res:.3e}", problem.name(), rec.strategy);
            assert!((res - rec.final_residual).abs() <= 1e-9, "{res:.3e} vs {:.3e}", rec.final_residual);
        }
    }
}

#[test]
fn runs_are_reproducible() {
    let spec = BenchmarkSpec::new(ProblemKind::Convdiff, 128);
    let strategies = [PoleStrategy::Adm, PoleStrategy::Sadm];
    let strip = |v: Vec<RunOutcome>| {
        v.into_iter()
            .map(|o| {
                let r = o.result.unwrap();
                r.rows.iter().map(|w| (w.iter, w.k, w.residual_rel, w.pole_a, w.pole_b)).collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    };
    let first = strip(run(&spec, &strategies).unwrap());
    let mut par = spec.clone();
    par.parallel = true;
    assert_eq!(first, strip(run(&spec, &strategies).unwrap()));
    assert_eq!(first, strip(run(&par, &strategies).unwrap()));
}

#[test]
fn cli_writes_one_csv_row_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["bench", "--problem", "poisson", "--n", "128", "--format", "json", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let records: Vec<RunRecord> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(records.len(), 3);
    for r in &records {
        let text = std::fs::read_to_string(csv_path(dir.path(), r)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), r.iterations + 1);
        assert_eq!(lines[0], "iter,k,residual_rel,pole_re,pole_im,time_s");
        let last: Vec<&str> = lines.last().unwrap().split(',').collect();
        assert_eq!(last.len(), 6);
        assert_eq!(last[0].parse::<usize>().unwrap(), r.iterations);
        assert!(last[2].parse::<f64>().unwrap() <= 1e-8);
    }
}

#[test]
fn cli_exit_codes() {
    let ok = bin().args(["bench", "--problem", "convdiff", "--n", "64", "--poles", "sadm"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let table = String::from_utf8_lossy(&ok.stdout);
    assert!(table.contains("sADM"));

    let unconverged = bin().args(["bench", "--problem", "poisson", "--n", "64", "--maxit", "2"]).output().unwrap();
    assert_eq!(unconverged.status.code(), Some(2));

    for bad in [
        vec!["bench", "--problem", "poisson", "--n", "8"],
        vec!["bench", "--problem", "poisson", "--n", "64", "--poles", "nope"],
        vec!["bench", "--problem", "poisson", "--n", "64", "--poles", "fixed:/nonexistent/poles.txt"],
        vec!["bench", "--problem", "heat"],
        vec!["bench", "--problem", "poisson", "--tol", "-1"],
    ] {
        let out = bin().args(&bad).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{bad:?}");
    }
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn cli_accepts_fixed_pole_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("poles.txt");
    std::fs::write(&file, "1000 0 -1000 0\ninf\n").unwrap();
    let spec = format!("fixed:{}", file.display());
    let out = bin()
        .args(["bench", "--problem", "poisson", "--n", "64", "--maxit", "6", "--format", "csv", "--poles", &spec, "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0) | Some(2)), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("poisson_fixed.csv")).unwrap();
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows[0][3], "inf");
    assert_eq!(rows[1][3].parse::<f64>().unwrap(), 1000.0);
    assert_eq!(rows[2][3], "inf");
}
