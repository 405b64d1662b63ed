//! The invariant suite behind `fgn-equiv verify`.

use nalgebra::SymmetricEigen;
use serde_json::json;

use crate::error::Result;
use crate::experiments::{
    condition_ii_residual, e3_kl, e3_kl_closed_form, fit_slope, random_series, separation_experiment,
    weighted_mean_experiment, SeparationCase,
};
use crate::fracnoise::{fbm_cov, fgn_autocov, sub_seed};
use crate::nhbasis::{
    biorth_matrix, identity_deviation, kernel_parseval_check, kernel_tail_bound, BasisTable, GkQuadrature, HurstConfig,
    NonharmonicSeries, DEFAULT_NODES,
};
use crate::report::{Check, Report};
use crate::specfun::{bessel_zeros, BesselOrder};
use crate::toeplitz::{eig_lower_bound, eig_upper_bound, ToeplitzCov};

/// Terms of the kernel reconstruction check.
pub const KERNEL_TERMS: usize = 5000;
/// Half-size of the biorthogonality matrix.
pub const BIORTH_KMAX: usize = 20;
/// Floor for the sequence-model divergence in the separation check.
pub const SEPARATION_FLOOR: f64 = 1e-2;
/// Below this the discrete divergence counts as exactly zero.
pub const NUMERICALLY_ZERO: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub hurst: Vec<f64>,
    /// Relative perturbation of every `a_k` (fault injection).
    pub perturb_ak: f64,
    pub seed: u64,
    pub jobs: usize,
    /// Replicates of the weighted mean check.
    pub replicates: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { hurst: vec![0.3, 0.5, 0.7], perturb_ak: 0.0, seed: 1, jobs: 1, replicates: 2000 }
    }
}

fn tag(name: &str, h: f64) -> String {
    format!("{name}[H={h}]")
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    // NaN propagates so that it fails the check
    it.fold(0.0, |a: f64, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

/// Runs every check for every requested Hurst index.
pub fn run_verify(opts: &VerifyOptions) -> Result<Report> {
    let mut report = Report::new("verify", Some(opts.seed));
    report
        .param("hurst", opts.hurst.clone())
        .param("perturb_ak", opts.perturb_ak)
        .param("replicates", opts.replicates)
        .param("kernel_terms", KERNEL_TERMS)
        .param("biorth_kmax", BIORTH_KMAX);

    let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    let mut worst = 0.0_f64;
    for &h in &grid {
        worst = worst.max(HurstConfig::new(h)?.identity_residual());
    }
    report.check(Check::at_most("c_h_identity", worst, 1e-12));

    for (hi, &h) in opts.hurst.iter().enumerate() {
        let seed = sub_seed(opts.seed, hi as u64);
        hurst_checks(&mut report, h, opts, seed)?;
    }
    Ok(report)
}

fn hurst_checks(report: &mut Report, h: f64, opts: &VerifyOptions, seed: u64) -> Result<()> {
    let exact = BasisTable::build(h, KERNEL_TERMS)?;
    let table = if opts.perturb_ak != 0.0 { exact.with_perturbed_a(opts.perturb_ak) } else { exact.clone() };
    let degenerate = h == 0.5;

    // zeros
    let zeros = bessel_zeros(h, 100)?;
    let order = BesselOrder::new(1.0 - h)?;
    let kadec =
        max_of(zeros.positive().iter().enumerate().map(|(i, w)| (w / std::f64::consts::PI - (i + 1) as f64).abs()));
    let band = crate::specfun::ZeroTable::band_half_width(h);
    report.check(Check::flag(tag("zeros.kadec_band", h), kadec, band, kadec <= band && kadec < 0.25));
    let mut resid = 0.0_f64;
    for w in zeros.positive() {
        resid = resid.max(crate::specfun::bessel_j(order, *w)?.abs());
    }
    report.check(Check::at_most(tag("zeros.residual", h), resid, 1e-11));

    if degenerate {
        let pi = std::f64::consts::PI;
        let dz = max_of(zeros.positive().iter().enumerate().map(|(i, w)| (w - (i + 1) as f64 * pi).abs()));
        report.check(Check::at_most(tag("degenerate.harmonic_zeros", h), dz, 1e-10));
        let da = max_of((0..=100).map(|k| (table.a(k) - 1.0).abs()));
        report.check(Check::at_most(tag("degenerate.unit_a", h), da, 1e-8));
        let dg = max_of((0..=50).map(|k| (fgn_autocov(h, k) - if k == 0 { 1.0 } else { 0.0 }).abs()));
        report.check(Check::at_most(tag("degenerate.white_noise", h), dg, 1e-14));
        let mut dk = 0.0_f64;
        for i in 0..=10 {
            for j in 0..=10 {
                let (s, t) = (i as f64 / 10.0, j as f64 / 10.0);
                dk = dk.max((fbm_cov(h, s, t) - s.min(t)).abs());
            }
        }
        report.check(Check::at_most(tag("degenerate.brownian_kernel", h), dk, 1e-14));
    }

    // coefficient growth
    let (xs, ys): (Vec<f64>, Vec<f64>) = (10..=200).map(|k| ((k as f64).ln(), table.a(k).ln())).unzip();
    let (slope, _) = fit_slope(&xs, &ys);
    report.metric(tag("a_growth_slope", h), slope);
    report.check(Check::at_most(tag("basis.a_growth_slope", h), (slope - (0.5 - h)).abs(), 0.02));

    // biorthogonality
    let quad = GkQuadrature::new(h, DEFAULT_NODES)?;
    let m = biorth_matrix(&quad, &table, BIORTH_KMAX)?;
    let (d, o) = identity_deviation(&m);
    let tol = if degenerate { 1e-6 } else { 2e-4 };
    report.check(Check::at_most(tag("basis.biorthogonality", h), d.max(o), tol));

    // representations of the sequence-model divergence
    let mut rel = 0.0_f64;
    for r in 0..20u64 {
        let theta = random_series(30, 1.0, sub_seed(seed, 100 + r));
        let zero = NonharmonicSeries::zero(0);
        for &n in &[64usize, 256] {
            let a = e3_kl(&theta, &zero, &table, n);
            let b = e3_kl_closed_form(&theta, &table, n);
            rel = rel.max((a - b).abs() / b);
        }
    }
    report.check(Check::at_most(tag("kl.consistency", h), rel, 1e-8));

    // kernel reconstruction
    let tail = kernel_tail_bound(&table);
    let mut kd = 0.0_f64;
    for i in 1..=10 {
        for j in 1..=10 {
            let (s, t) = (i as f64 / 10.0, j as f64 / 10.0);
            kd = kd.max((kernel_parseval_check(&table, s, t) - fbm_cov(h, s, t)).abs());
        }
    }
    report.metric(tag("kernel.tail_bound", h), tail);
    report.check(Check::at_most(tag("kernel.parseval", h), kd - tail, 5e-3));

    // Toeplitz eigenvalue bounds
    let mut violations = 0usize;
    for &n in &[16usize, 64, 256] {
        let eig = SymmetricEigen::new(ToeplitzCov::fgn(h, n)?.dense()).eigenvalues;
        let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        violations += usize::from(eig_lower_bound(h, n)? > lo) + usize::from(eig_upper_bound(h, n)? < hi);
    }
    report.check(Check::at_most(tag("toeplitz.bound_violations", h), violations as f64, 0.0));

    // separation, case alpha = 1/2
    let ns = [64usize, 128, 256, 512, 1024];
    let mut kl = Vec::new();
    let mut floor = f64::INFINITY;
    for &n in &ns {
        let r = separation_experiment(&exact, n, SeparationCase::AlphaHalf, 1.0)?;
        kl.push(r.kl_e1);
        floor = floor.min(r.e3_separation);
    }
    let bound = -(2.0 * h + 1.0).min(2.0) + 0.15;
    let vanishing = kl.iter().all(|v| *v < NUMERICALLY_ZERO);
    let exponent = if vanishing {
        f64::NEG_INFINITY
    } else {
        let x: Vec<f64> = ns.iter().map(|n| (*n as f64).ln()).collect();
        let y: Vec<f64> = kl.iter().map(|v| v.ln()).collect();
        fit_slope(&x, &y).0
    };
    report.check(Check::flag(tag("separation.kl_exponent", h), exponent, bound, vanishing || exponent <= bound));
    report.check(Check::flag(tag("separation.e3_floor", h), floor, SEPARATION_FLOOR, floor >= SEPARATION_FLOOR));

    // projection residual under n -> 2n
    let mut ratio = 0.0_f64;
    for r in 0..10u64 {
        let theta = random_series(20, 2.0, sub_seed(seed, 200 + r));
        let res: Vec<_> = [16usize, 32, 64, 128, 256]
            .iter()
            .map(|&n| condition_ii_residual(&theta, &exact, n))
            .collect::<Result<_>>()?;
        for w in res.windows(2) {
            // the scaled residual only contracts for H >= 1/2
            let (a, b) = if h >= 0.5 { (w[0].residual, w[1].residual) } else { (w[0].gap, w[1].gap) };
            ratio = ratio.max(if a == 0.0 { 0.0 } else { b / a });
        }
    }
    report.check(Check::at_most(tag("projection.monotone", h), ratio, 1.0));

    if h > 0.5 {
        let wm = weighted_mean_experiment(&exact, 1024, opts.replicates, sub_seed(seed, 300), opts.jobs)?;
        report.metric(tag("weighted_mean.ratio", h), wm.ratio);
        report.metric(tag("weighted_mean.exact_ratio", h), wm.exact_ratio);
        report.metric(tag("weighted_mean.sigma0_sq", h), wm.sigma0_sq);
        report.check(Check::flag(tag("weighted_mean.below_plain", h), wm.exact_ratio, 1.0, wm.exact_ratio < 1.0));
        report.check(Check::at_most(tag("weighted_mean.sigma0", h), (wm.exact_ratio / wm.sigma0_sq - 1.0).abs(), 0.1));
        report.metric(tag("weighted_mean.ratio_se", h), wm.ratio_se);
        // five standard errors: false alarms are rare but a biased sampler still shows up
        report.check(Check::at_most(
            tag("weighted_mean.monte_carlo", h),
            (wm.ratio - wm.exact_ratio).abs(),
            5.0 * wm.ratio_se,
        ));
    }
    report.param(&format!("table_size[H={h}]"), json!(table.max_index()));
    Ok(())
}
