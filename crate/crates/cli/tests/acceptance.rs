//! Acceptance suite. Each test prints one `[PASS]` or `[FAIL]` line and then
//! asserts. Run with `--nocapture` to see the lines.

use std::process::Command;
use std::time::{Duration, Instant};

use fgn_equiv::experiments::{
    condition_ii_residual, e3_kl, e3_kl_closed_form, fit_slope, random_series, rate_experiment, separation_experiment,
    weighted_mean_experiment, RateConfig, SeparationCase,
};
use fgn_equiv::fracnoise::{fbm_cov, fgn_autocov, sub_seed};
use fgn_equiv::nalgebra::SymmetricEigen;
use fgn_equiv::nhbasis::{
    biorth_matrix, identity_deviation, kernel_parseval_check, kernel_tail_bound, kl_rkhs, BasisTable, GkQuadrature,
    HurstConfig, NonharmonicSeries, RkhsElement, DEFAULT_NODES,
};
use fgn_equiv::specfun::bessel_zeros;
use fgn_equiv::toeplitz::{eig_lower_bound, eig_upper_bound, ToeplitzCov};

fn record(id: u32, title: &str, pass: bool, detail: String) {
    println!("[{}] criterion {id:>2}: {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({title}) failed: {detail}");
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.map(f64::abs).fold(0.0, f64::max)
}

#[test]
fn criterion_01_brownian_degeneracy() {
    let start = Instant::now();
    let h = 0.5;
    let zeros = bessel_zeros(h, 100).unwrap();
    let dz = max_abs(zeros.positive().iter().enumerate().map(|(i, w)| w - (i + 1) as f64 * std::f64::consts::PI));
    let table = BasisTable::build(h, 100).unwrap();
    let da = max_abs((0..=100).map(|k| table.a(k) - 1.0));
    let dg = max_abs((0..=100).map(|k| fgn_autocov(h, k) - if k == 0 { 1.0 } else { 0.0 }));
    let mut dk = 0.0_f64;
    for i in 0..=20 {
        for j in 0..=20 {
            let (s, t) = (i as f64 / 20.0, j as f64 / 20.0);
            dk = dk.max((fbm_cov(h, s, t) - s.min(t)).abs());
        }
    }
    let quad = GkQuadrature::new(h, DEFAULT_NODES).unwrap();
    let (d, o) = identity_deviation(&biorth_matrix(&quad, &table, 10).unwrap());
    let elapsed = start.elapsed();
    let pass = dz <= 1e-10
        && da <= 1e-8
        && dg <= 1e-14
        && dk <= 1e-14
        && d.max(o) <= 1e-6
        && elapsed < Duration::from_secs(10);
    record(
        1,
        "H = 1/2 degeneracy",
        pass,
        format!(
            "zeros {dz:.1e}, a_k {da:.1e}, autocov {dg:.1e}, kernel {dk:.1e}, biorth {:.1e}, {elapsed:.2?}",
            d.max(o)
        ),
    );
}

#[test]
fn criterion_02_c_hurst_identity() {
    let worst = (1..100).map(|i| HurstConfig::new(i as f64 / 100.0).unwrap().identity_residual()).fold(0.0, f64::max);
    record(2, "c_H identity on 99 values", worst <= 1e-12, format!("max residual {worst:.2e} (tol 1e-12)"));
}

#[test]
fn criterion_03_kernel_reconstruction() {
    let start = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    let mut detail = Vec::new();
    for &h in &[0.3, 0.5, 0.7] {
        let table = BasisTable::build(h, 5000).unwrap();
        let tail = kernel_tail_bound(&table);
        let mut err = 0.0_f64;
        for i in 1..=10 {
            for j in 1..=10 {
                let (s, t) = (i as f64 / 10.0, j as f64 / 10.0);
                err = err.max((kernel_parseval_check(&table, s, t) - fbm_cov(h, s, t)).abs());
            }
        }
        worst = worst.max(err - 5e-3 - tail);
        detail.push(format!("H={h}: err {err:.2e} vs 5e-3 + tail {tail:.2e}"));
    }
    let elapsed = start.elapsed();
    record(
        3,
        "kernel reconstruction, K = 5000",
        worst <= 0.0 && elapsed < Duration::from_secs(60),
        format!("{}; {elapsed:.2?}", detail.join("; ")),
    );
}

#[test]
fn criterion_04_biorthogonality() {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for &h in &[0.3, 0.7] {
        let table = BasisTable::build(h, 20).unwrap();
        let quad = GkQuadrature::new(h, DEFAULT_NODES).unwrap();
        let m = biorth_matrix(&quad, &table, 20).unwrap();
        assert_eq!(m.nrows(), 41);
        let (d, o) = identity_deviation(&m);
        worst = worst.max(d.max(o));
    }
    let elapsed = start.elapsed();
    record(
        4,
        "41x41 biorthogonality, H in {0.3, 0.7}",
        worst <= 2e-4 && elapsed < Duration::from_secs(300),
        format!("max deviation {worst:.2e} (tol 2e-4), {elapsed:.2?}"),
    );
}

#[test]
fn criterion_05_coefficient_growth() {
    let mut worst = 0.0_f64;
    let mut slopes = Vec::new();
    for &h in &[0.3, 0.5, 0.7, 0.9] {
        let table = BasisTable::build(h, 200).unwrap();
        let (x, y): (Vec<f64>, Vec<f64>) = (10..=200).map(|k| ((k as f64).ln(), table.a(k).ln())).unzip();
        let (slope, _) = fit_slope(&x, &y);
        worst = worst.max((slope - (0.5 - h)).abs());
        slopes.push(format!("H={h}: {slope:.4}"));
    }
    record(
        5,
        "a_k growth slope 1/2 - H",
        worst <= 0.02,
        format!("{} (max dev {worst:.4}, tol 0.02)", slopes.join(", ")),
    );
}

#[test]
fn criterion_06_toeplitz_bounds() {
    let mut violations = Vec::new();
    for i in 1..=9 {
        let h = i as f64 / 10.0;
        for &n in &[16usize, 64, 256] {
            let eig = SymmetricEigen::new(ToeplitzCov::fgn(h, n).unwrap().dense()).eigenvalues;
            let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if eig_lower_bound(h, n).unwrap() > lo {
                violations.push(format!("lower H={h} n={n}"));
            }
            if eig_upper_bound(h, n).unwrap() < hi {
                violations.push(format!("upper H={h} n={n}"));
            }
        }
    }
    record(6, "Toeplitz eigenvalue bounds on 27 cases", violations.is_empty(), format!("violations: {violations:?}"));
}

#[test]
fn criterion_07_kl_consistency() {
    let mut worst = 0.0_f64;
    for &h in &[0.3, 0.5, 0.7] {
        let table = BasisTable::build(h, 40).unwrap();
        for r in 0..20 {
            let theta = random_series(40, 1.0, sub_seed(77, r));
            let zero = NonharmonicSeries::zero(0);
            for &n in &[64usize, 256] {
                let seq = e3_kl(&theta, &zero, &table, n);
                let closed = e3_kl_closed_form(&theta, &table, n);
                let noise = (n as f64).powf(h - 1.0);
                let rkhs =
                    kl_rkhs(&RkhsElement::new(theta.clone()), &RkhsElement::new(zero.clone()), noise, &table).unwrap();
                worst = worst.max((seq - closed).abs() / closed).max((rkhs - closed).abs() / closed);
            }
        }
    }
    record(7, "KL across representations", worst <= 1e-8, format!("max relative difference {worst:.2e} (tol 1e-8)"));
}

#[test]
fn criterion_08_rate_reproduction() {
    let start = Instant::now();
    let grid: Vec<usize> = (8..=14).map(|p| 1usize << p).collect();
    let mut worst = 0.0_f64;
    let mut detail = Vec::new();
    for &(h, target) in &[(0.5, -0.667), (0.7, -0.462), (0.3, -0.824)] {
        let mut cfg = RateConfig::new(h, 1.0, grid.clone(), 200, 2024);
        cfg.jobs = 4;
        let top = cfg.cutoff(*grid.last().unwrap());
        let table = BasisTable::build(h, top).unwrap();
        let rep = rate_experiment(&cfg, &table).unwrap();
        worst = worst.max((rep.slope - target).abs());
        detail.push(format!("H={h}: {:.4} (target {target})", rep.slope));
    }
    let elapsed = start.elapsed();
    record(
        8,
        "risk slopes, beta = 1",
        worst <= 0.1 && elapsed < Duration::from_secs(900),
        format!("{}; max dev {worst:.3} (tol 0.1), {elapsed:.2?}", detail.join(", ")),
    );
}

#[test]
fn criterion_09_weighted_mean() {
    let table = BasisTable::build(0.8, 10).unwrap();
    let rep = weighted_mean_experiment(&table, 1024, 10_000, 99, 4).unwrap();
    let rel = (rep.ratio / rep.sigma0_sq - 1.0).abs();
    record(
        9,
        "weighted mean variance ratio, H = 0.8",
        rep.ratio < 1.0 && rel <= 0.1,
        format!("ratio {:.5}, sigma_0^2 {:.5}, relative gap {rel:.4} (tol 0.1)", rep.ratio, rep.sigma0_sq),
    );
}

#[test]
fn criterion_10_separation() {
    let ns = [64usize, 128, 256, 512, 1024];
    let mut pass = true;
    let mut detail = Vec::new();
    for &h in &[0.3, 0.5, 0.7] {
        let table = BasisTable::build(h, 2048).unwrap();
        let reps: Vec<_> =
            ns.iter().map(|&n| separation_experiment(&table, n, SeparationCase::AlphaHalf, 1.0).unwrap()).collect();
        let bound = -(2.0 * h + 1.0).min(2.0) + 0.15;
        let floor = reps.iter().map(|r| r.e3_separation).fold(f64::INFINITY, f64::min);
        let ok_floor = floor >= 1e-2;
        if reps.iter().all(|r| r.kl_e1 < 1e-20) {
            // sampled on the grid the two sines coincide
            pass &= ok_floor;
            detail.push(format!("H={h}: kl identically ~0, e3 floor {floor:.3}"));
            continue;
        }
        let x: Vec<f64> = ns.iter().map(|n| (*n as f64).ln()).collect();
        let y: Vec<f64> = reps.iter().map(|r| r.kl_e1.ln()).collect();
        let (slope, _) = fit_slope(&x, &y);
        let decreasing = reps.windows(2).all(|w| w[1].kl_e1 < w[0].kl_e1);
        pass &= slope <= bound && decreasing && ok_floor;
        detail.push(format!("H={h}: exponent {slope:.3} (<= {bound:.2}), e3 floor {floor:.3}"));
    }
    record(10, "separation, alpha = 1/2", pass, detail.join("; "));
}

#[test]
fn criterion_11_projection_monotone() {
    let ns = [16usize, 32, 64, 128, 256, 512];
    let mut pass = true;
    let mut worst_ratio = 0.0_f64;
    let mut shrink = 0.0_f64;
    for &h in &[0.5, 0.7] {
        let table = BasisTable::build(h, 20).unwrap();
        for r in 0..10 {
            // alpha = 1: |theta_k| ~ (1 + k)^{-3/2}
            let theta = random_series(20, 1.5, sub_seed(5, r));
            let res: Vec<f64> =
                ns.iter().map(|&n| condition_ii_residual(&theta, &table, n).unwrap().residual).collect();
            for w in res.windows(2) {
                worst_ratio = worst_ratio.max(w[1] / w[0]);
            }
            if h == 0.7 {
                let s = res.last().unwrap() / res[0];
                shrink = shrink.max(s);
                pass &= s < 0.5;
            }
        }
    }
    pass &= worst_ratio <= 1.0;
    record(
        11,
        "projection residual under n -> 2n",
        pass,
        format!("max ratio {worst_ratio:.3} (<= 1), worst shrink 16 -> 512 at H=0.7: {shrink:.3}"),
    );
}

#[test]
fn criterion_12_determinism() {
    let bin = env!("CARGO_BIN_EXE_fgn-equiv");
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str, name: &str| {
        let path = dir.path().join(name);
        let status =
            Command::new(bin).args(["verify", "--seed", "31", "--jobs", jobs, "--out"]).arg(&path).status().unwrap();
        assert_eq!(status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let a = run("1", "a.json");
    let b = run("1", "b.json");
    let c = run("8", "c.json");
    record(
        12,
        "verify output byte-identical",
        a == b && a == c && !a.is_empty(),
        format!("{} bytes; repeat equal {}, jobs 1 vs 8 equal {}", a.len(), a == b, a == c),
    );
}
