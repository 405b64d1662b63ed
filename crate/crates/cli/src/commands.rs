use fgn_equiv::experiments::{
    condition_i_diagnostic, condition_ii_with, random_series, rate_experiment, separation_experiment, Interpolator,
    RateConfig, RegressionFunction, SeparationCase,
};
use fgn_equiv::fracnoise::simulate_fgn;
use fgn_equiv::nhbasis::{BasisTable, NonharmonicSeries};
use fgn_equiv::num_complex::Complex64;
use fgn_equiv::report::{Check, Report, Table};
use fgn_equiv::specfun::bessel_zeros;
use fgn_equiv::toeplitz::{eig_lower_bound, eig_upper_bound, ToeplitzCov, DENSE_CHECK_MAX};
use fgn_equiv::verify::{run_verify, VerifyOptions};

use crate::config::{Command, FunctionKind, RunConfig};
use crate::CliError;

pub fn dispatch(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::Zeros => cmd_zeros(cfg),
        Command::Coeffs => cmd_coeffs(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Rates => cmd_rates(cfg),
        Command::Diagnose => cmd_diagnose(cfg),
        Command::Bounds => cmd_bounds(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::Separation => cmd_separation(cfg),
    }
}

pub fn cmd_zeros(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = cfg.one_hurst()?;
    let count = cfg.count.unwrap_or(10);
    let zeros = bessel_zeros(h, count)?;
    let mut t = Table::new(&["k", "omega", "omega_over_pi_minus_k"]);
    for (i, w) in zeros.positive().iter().enumerate() {
        let k = i + 1;
        t.push(vec![k.into(), (*w).into(), (w / std::f64::consts::PI - k as f64).into()]);
    }
    let mut r = Report::new("zeros", None);
    r.param("hurst", h).param("count", count);
    r.table = Some(t);
    Ok(r)
}

pub fn cmd_coeffs(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = cfg.one_hurst()?;
    let count = cfg.count.unwrap_or(20);
    let mut table = BasisTable::build(h, count)?;
    if cfg.perturb_ak != 0.0 {
        table = table.with_perturbed_a(cfg.perturb_ak);
    }
    let mut t = Table::new(&["k", "omega", "a", "sigma"]);
    for k in 0..=count as i64 {
        t.push(vec![k.into(), table.omega(k).into(), table.a(k).into(), table.sigma(k).into()]);
    }
    let mut r = Report::new("coeffs", None);
    r.param("hurst", h).param("count", count);
    r.metric("c_h", table.config().c_h);
    r.table = Some(t);
    Ok(r)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut opts = VerifyOptions { seed: cfg.seed(), jobs: cfg.jobs, perturb_ak: cfg.perturb_ak, ..Default::default() };
    if !cfg.hurst.is_empty() {
        opts.hurst = cfg.hurst.clone();
    }
    if let Some(r) = cfg.replicates {
        opts.replicates = r;
    }
    Ok(run_verify(&opts)?)
}

pub fn cmd_rates(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = cfg.one_hurst()?;
    let mut rc = RateConfig::new(h, cfg.beta, cfg.grid_or("256:16384:x2"), cfg.replicates.unwrap_or(200), cfg.seed());
    rc.radius = cfg.radius;
    rc.cutoff_const = cfg.cutoff_const;
    rc.jobs = cfg.jobs;
    let max_cut = rc.n_grid.iter().map(|n| rc.cutoff(*n)).max().unwrap_or(1).max(1);
    let table = BasisTable::build(h, max_cut)?;
    let rep = rate_experiment(&rc, &table)?;

    let mut t = Table::new(&["n", "cutoff", "mean_risk", "std_error"]);
    for row in &rep.rows {
        t.push(vec![row.n.into(), row.cutoff.into(), row.mean_risk.into(), row.std_error.into()]);
    }
    let mut r = Report::new("rates", Some(rc.seed));
    r.param("hurst", h)
        .param("beta", rc.beta)
        .param("ball_radius", rc.radius)
        .param("replicates", rc.replicates)
        .param("cutoff_const", rc.cutoff_const)
        .param("n_grid", rc.n_grid.clone());
    let expected = rc.expected_slope();
    r.metric("slope", rep.slope)
        .metric("slope_ci_lower", rep.slope_ci.0)
        .metric("slope_ci_upper", rep.slope_ci.1)
        .metric("expected_slope", expected)
        .metric("frame_lower", rep.frame_bounds.0)
        .metric("frame_upper", rep.frame_bounds.1);
    r.check(Check::at_most("rates.slope", (rep.slope - expected).abs(), 0.1));
    r.table = Some(t);
    Ok(r)
}

fn diagnose_series(cfg: &RunConfig, k: usize) -> NonharmonicSeries {
    match cfg.function {
        FunctionKind::Zero => NonharmonicSeries::zero(k),
        FunctionKind::Constant => {
            NonharmonicSeries::pair(k, 0, Complex64::new(cfg.radius, 0.0)).expect("real zeroth coefficient")
        }
        FunctionKind::Series => {
            let s = random_series(k, cfg.alpha + 0.5, cfg.seed());
            let norm = s.sobolev_norm_sq(cfg.alpha).sqrt();
            s.scale(cfg.radius / norm)
        }
    }
}

pub fn cmd_diagnose(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = cfg.one_hurst()?;
    let k = cfg.count.unwrap_or(20);
    let grid = cfg.grid_or("16:256:x2");
    let table = BasisTable::build(h, k)?;
    let theta = diagnose_series(cfg, k);
    let f = match cfg.function {
        FunctionKind::Constant => {
            let c = cfg.radius;
            RegressionFunction::from_fn(move |_| c)
        }
        _ => RegressionFunction::from_series(theta.clone(), &table)?,
    };
    let mut t = Table::new(&["n", "condition_i", "condition_ii", "projection_gap"]);
    for &n in &grid {
        let ci = condition_i_diagnostic(|s| f.eval(s), h, n)?;
        let interp = Interpolator::new(h, n)?;
        let cii = condition_ii_with(&theta, &table, &interp)?;
        t.push(vec![n.into(), ci.into(), cii.residual.into(), cii.gap.into()]);
    }
    let mut r = Report::new("diagnose", cfg.seed);
    r.param("hurst", h)
        .param("count", k)
        .param("alpha", cfg.alpha)
        .param("ball_radius", cfg.radius)
        .param("function", format!("{:?}", cfg.function).to_lowercase())
        .param("n_grid", grid);
    r.table = Some(t);
    Ok(r)
}

pub fn cmd_bounds(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = cfg.one_hurst()?;
    let n = cfg.n.unwrap_or(256);
    let lo = eig_lower_bound(h, n)?;
    let hi = eig_upper_bound(h, n)?;
    let mut r = Report::new("bounds", None);
    r.param("hurst", h).param("n", n);
    r.metric("lower_bound", lo).metric("upper_bound", hi);
    if n <= DENSE_CHECK_MAX {
        let eig = fgn_equiv::nalgebra::SymmetricEigen::new(ToeplitzCov::fgn(h, n)?.dense()).eigenvalues;
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        r.metric("lambda_min", min).metric("lambda_max", max);
        r.check(Check::flag("bounds.lower", lo, min, lo <= min));
        r.check(Check::flag("bounds.upper", hi, max, hi >= max));
    }
    Ok(r)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = cfg.one_hurst()?;
    let n = cfg.n.unwrap_or(1024);
    let x = simulate_fgn(h, n, cfg.seed())?;
    let mut t = Table::new(&["i", "value"]);
    for (i, v) in x.iter().enumerate() {
        t.push(vec![(i + 1).into(), (*v).into()]);
    }
    let mut r = Report::new("simulate", cfg.seed);
    r.param("hurst", h).param("n", n);
    r.table = Some(t);
    Ok(r)
}

pub fn cmd_separation(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = cfg.one_hurst()?;
    let grid = cfg.grid_or("64:1024:x2");
    let case = if cfg.alpha >= 0.5 { SeparationCase::AlphaHalf } else { SeparationCase::AlphaLow };
    let top = *grid.last().expect("non-empty grid");
    let size = match case {
        SeparationCase::AlphaHalf => 2 * top,
        SeparationCase::AlphaLow => top + (top as f64).ln().floor() as usize + 1,
    };
    let table = BasisTable::build(h, size)?;
    let mut t = Table::new(&["n", "kl_e1", "e3_separation"]);
    let mut c = 0.0;
    for &n in &grid {
        let rep = separation_experiment(&table, n, case, cfg.radius)?;
        c = rep.c;
        t.push(vec![n.into(), rep.kl_e1.into(), rep.e3_separation.into()]);
    }
    let mut r = Report::new("separation", None);
    r.param("hurst", h)
        .param("case", if case == SeparationCase::AlphaHalf { "alpha_half" } else { "alpha_low" })
        .param("ball_radius", cfg.radius)
        .param("n_grid", grid);
    r.metric("c", c);
    r.table = Some(t);
    Ok(r)
}
