//! Discrete regression (E1) and sequence-model (E3) experiments, the
//! interpolation operator `L`, approximation diagnostics and Monte Carlo
//! rate studies.
//!
//! Monte Carlo loops derive one seed per replicate with
//! [`sub_seed`](crate::fracnoise::sub_seed), collect per-replicate results by
//! index and reduce them sequentially, so results do not depend on the number
//! of worker threads.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{check_hurst, Error, Result};
use crate::fracnoise::{rng_from_seed, sub_seed, FbmKernel, FgnSampler};
use crate::nhbasis::{frame_bounds, rkhs_norm_sq, BasisTable, NonharmonicSeries, RkhsElement};
use crate::quad::GaussRule;
use crate::toeplitz::{kl_gaussian_shift, MeanShiftPair, ToeplitzCov};

/// Truncation of the reference function used by [`rate_experiment`].
pub const RATE_TRUTH_TERMS: usize = 2000;

/// Pivot ratio above which [`Interpolator`] warns about conditioning.
pub const PIVOT_RATIO_WARNING: f64 = 1e14;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Callable(RealFn),
    Series { series: NonharmonicSeries, omegas: Vec<f64> },
}

/// A regression function on `[0, 1]`, either a closure or a nonharmonic
/// series.
#[derive(Clone)]
pub struct RegressionFunction {
    kind: Kind,
    /// `(alpha, C)` of a Sobolev ball the function is known to lie in.
    pub smoothness: Option<(f64, f64)>,
    /// Whether `f = -f(1 - .)` is claimed.
    pub antisymmetric: bool,
}

impl std::fmt::Debug for RegressionFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.kind {
            Kind::Callable(_) => "callable".to_string(),
            Kind::Series { series, .. } => format!("series(K = {})", series.max_index()),
        };
        f.debug_struct("RegressionFunction")
            .field("kind", &kind)
            .field("smoothness", &self.smoothness)
            .field("antisymmetric", &self.antisymmetric)
            .finish()
    }
}

impl RegressionFunction {
    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self { kind: Kind::Callable(Arc::new(f)), smoothness: None, antisymmetric: false }
    }

    pub fn from_series(series: NonharmonicSeries, table: &BasisTable) -> Result<Self> {
        if series.max_index() > table.max_index() {
            return Err(Error::InvalidParameter("series longer than the basis table".into()));
        }
        let omegas = (0..=series.max_index() as i64).map(|k| table.omega(k)).collect();
        Ok(Self { kind: Kind::Series { series, omegas }, smoothness: None, antisymmetric: false })
    }

    pub fn with_smoothness(mut self, alpha: f64, radius: f64) -> Self {
        self.smoothness = Some((alpha, radius));
        self
    }

    /// Declares `f = -f(1 - .)`; fails if a grid check disagrees.
    pub fn antisymmetric(mut self) -> Result<Self> {
        let r = self.antisymmetry_residual(257);
        if r > 1e-10 {
            return Err(Error::Consistency { what: "antisymmetry f = -f(1 - .)", value: r });
        }
        self.antisymmetric = true;
        Ok(self)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Callable(f) => f(t),
            Kind::Series { series, omegas } => {
                let mut acc = series.get(0).re;
                for (k, w) in omegas.iter().enumerate().skip(1) {
                    acc += 2.0 * (series.get(k as i64) * Complex64::from_polar(1.0, 2.0 * w * t)).re;
                }
                acc
            }
        }
    }

    /// `max |f(t) + f(1 - t)|` over an equispaced grid.
    pub fn antisymmetry_residual(&self, points: usize) -> f64 {
        (0..points)
            .map(|i| {
                let t = i as f64 / (points - 1) as f64;
                (self.eval(t) + self.eval(1.0 - t)).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn series(&self) -> Option<&NonharmonicSeries> {
        match &self.kind {
            Kind::Series { series, .. } => Some(series),
            Kind::Callable(_) => None,
        }
    }
}

/// `Y_i = f(i/n) + N_i`, `i = 1..n`, with exact fGN noise.
#[derive(Debug, Clone, PartialEq)]
pub struct E1Sample {
    pub hurst: f64,
    pub n: usize,
    pub seed: u64,
    pub y: Vec<f64>,
}

pub fn simulate_e1(f: &RegressionFunction, hurst: f64, n: usize, seed: u64) -> Result<E1Sample> {
    let sampler = FgnSampler::new(hurst, n)?;
    Ok(e1_with_sampler(f, &sampler, seed))
}

fn e1_with_sampler(f: &RegressionFunction, sampler: &FgnSampler, seed: u64) -> E1Sample {
    let m = sampler.model();
    let mut rng = rng_from_seed(seed);
    let noise = sampler.sample(&mut rng);
    let nf = m.n as f64;
    let y = noise.iter().enumerate().map(|(i, e)| f.eval((i + 1) as f64 / nf) + e).collect();
    E1Sample { hurst: m.hurst, n: m.n, seed, y }
}

/// `Z_k = Re(theta_k)/sigma_k + n^{H-1} eps_k` (`k >= 0`) and
/// `Z'_k = Im(theta_k)/sigma_k + n^{H-1} eps'_k` (`k >= 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct E3Sample {
    pub hurst: f64,
    pub n: usize,
    pub max_index: usize,
    pub seed: u64,
    /// `Z_0, ..., Z_K`.
    pub z: Vec<f64>,
    /// `Z'_1, ..., Z'_K`.
    pub z_prime: Vec<f64>,
}

/// Draws the sequence model. `eps` and `eps'` come from two independent
/// streams seeded with `sub_seed(seed, 0)` and `sub_seed(seed, 1)`.
pub fn simulate_e3(theta: &NonharmonicSeries, table: &BasisTable, n: usize, seed: u64) -> Result<E3Sample> {
    let kk = theta.max_index();
    if kk > table.max_index() {
        return Err(Error::InvalidParameter(format!(
            "series index {kk} exceeds the basis table ({})",
            table.max_index()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be positive".into()));
    }
    let h = table.hurst();
    let level = (n as f64).powf(h - 1.0);
    let mut re = rng_from_seed(sub_seed(seed, 0));
    let mut im = rng_from_seed(sub_seed(seed, 1));
    let z = (0..=kk as i64)
        .map(|k| theta.get(k).re / table.sigma(k) + level * re.sample::<f64, _>(StandardNormal))
        .collect();
    let z_prime = (1..=kk as i64)
        .map(|k| theta.get(k).im / table.sigma(k) + level * im.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(E3Sample { hurst: h, n, max_index: kk, seed, z, z_prime })
}

/// Spectral cutoff estimator `theta_k = sigma_k (Z_k + i Z'_k)` for `k <= M`.
pub fn estimate_cutoff(sample: &E3Sample, table: &BasisTable, cutoff: usize) -> Result<NonharmonicSeries> {
    if cutoff > sample.max_index {
        return Err(Error::InvalidParameter(format!("cutoff {cutoff} exceeds the sample size {}", sample.max_index)));
    }
    let pos: Vec<Complex64> = (0..=cutoff)
        .map(|k| {
            let zp = if k == 0 { 0.0 } else { sample.z_prime[k - 1] };
            Complex64::new(sample.z[k], zp) * table.sigma(k as i64)
        })
        .collect();
    NonharmonicSeries::from_nonnegative(&pos)
}

/// Kullback-Leibler divergence between the sequence-model laws of two
/// coefficient sequences.
pub fn e3_kl(a: &NonharmonicSeries, b: &NonharmonicSeries, table: &BasisTable, n: usize) -> f64 {
    let h = table.hurst();
    let var = (n as f64).powf(2.0 * h - 2.0);
    let kk = a.max_index().max(b.max_index());
    let mut acc = 0.0;
    for k in 0..=kk as i64 {
        let d = a.get(k) - b.get(k);
        let s2 = table.sigma(k).powi(2);
        acc += if k == 0 { d.re * d.re } else { d.norm_sqr() } / s2;
    }
    0.5 * acc / var
}

/// `1/2 n^{2-2H} sum |theta_k|^2 / a_k^2`.
pub fn e3_kl_closed_form(theta: &NonharmonicSeries, table: &BasisTable, n: usize) -> f64 {
    0.5 * (n as f64).powf(2.0 - 2.0 * table.hurst()) * rkhs_norm_sq(theta, table)
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Runs `f(i)` for `i in 0..count`, on `jobs` threads when `jobs > 1`,
/// returning results in index order.
pub fn run_indexed<T, F>(count: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if jobs <= 1 {
        return Ok((0..count).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Simulation(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..count).into_par_iter().map(f).collect()))
}

/// Settings of a Monte Carlo rate study.
#[derive(Debug, Clone, PartialEq)]
pub struct RateConfig {
    pub hurst: f64,
    pub beta: f64,
    pub radius: f64,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub cutoff_const: f64,
    pub jobs: usize,
}

impl RateConfig {
    pub fn new(hurst: f64, beta: f64, n_grid: Vec<usize>, replicates: usize, seed: u64) -> Self {
        Self { hurst, beta, radius: 1.0, n_grid, replicates, seed, cutoff_const: 1.0, jobs: 1 }
    }

    /// `-2 beta (1 - H) / (beta + 1 - H)`.
    pub fn expected_slope(&self) -> f64 {
        -2.0 * self.beta * (1.0 - self.hurst) / (self.beta + 1.0 - self.hurst)
    }

    /// `M_n = ceil(c0 n^{(1-H)/(beta+1-H)})`.
    pub fn cutoff(&self, n: usize) -> usize {
        let e = (1.0 - self.hurst) / (self.beta + 1.0 - self.hurst);
        (self.cutoff_const * (n as f64).powf(e)).ceil().max(0.0) as usize
    }
}

/// One row of a [`RiskReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct RiskRow {
    pub n: usize,
    pub cutoff: usize,
    pub mean_risk: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub config: RateConfig,
    pub rows: Vec<RiskRow>,
    pub slope: f64,
    pub slope_ci: (f64, f64),
    /// Frame constants of the exponentials up to the largest cutoff used.
    pub frame_bounds: (f64, f64),
}

/// Ordinary least squares fit of `y` on `x`: `(slope, standard error)`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let se = if x.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, se)
}

/// Reference function of a rate study: `theta_k = s_k (1 + k)^{-beta-1/2-0.01}`
/// for `0 <= k <= 2000` with seeded random signs, rescaled so that
/// `sum (1 + |k|)^{2 beta} |theta_k|^2 = C^2`.
pub fn rate_test_function(beta: f64, radius: f64, seed: u64) -> NonharmonicSeries {
    let mut rng = rng_from_seed(sub_seed(seed, u64::MAX));
    let pos: Vec<Complex64> = (0..=RATE_TRUTH_TERMS)
        .map(|k| {
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Complex64::new(s * (1.0 + k as f64).powf(-beta - 0.51), 0.0)
        })
        .collect();
    let series = NonharmonicSeries::from_nonnegative(&pos).expect("real coefficients");
    let norm = series.sobolev_norm_sq(beta).sqrt();
    series.scale(radius / norm)
}

/// Monte Carlo risk `E sum_k |theta_hat_k - theta_k|^2` of the spectral
/// cutoff estimator over `n_grid`, and the fitted log-log slope.
pub fn rate_experiment(config: &RateConfig, table: &BasisTable) -> Result<RiskReport> {
    check_hurst(config.hurst)?;
    if !(config.beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive (got {})", config.beta)));
    }
    if config.n_grid.len() < 2 || config.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("n grid must be increasing with at least two points".into()));
    }
    if config.replicates < 2 {
        return Err(Error::InvalidParameter("at least two replicates are needed".into()));
    }
    if (table.hurst() - config.hurst).abs() > 0.0 {
        return Err(Error::InvalidParameter("basis table built for another Hurst index".into()));
    }
    let truth = rate_test_function(config.beta, config.radius, config.seed);
    let max_cut = config.n_grid.iter().map(|n| config.cutoff(*n)).max().unwrap_or(0);
    if max_cut > table.max_index() || max_cut > RATE_TRUTH_TERMS {
        return Err(Error::InvalidParameter(format!("cutoff {max_cut} exceeds the basis table")));
    }
    let mut rows = Vec::with_capacity(config.n_grid.len());
    for (gi, &n) in config.n_grid.iter().enumerate() {
        let m = config.cutoff(n);
        let head = truth.truncate(m);
        let bias: f64 = truth.iter().filter(|(k, _)| k.unsigned_abs() as usize > m).map(|(_, t)| t.norm_sqr()).sum();
        let grid_seed = sub_seed(config.seed, gi as u64);
        let risks = run_indexed(config.replicates, config.jobs, |r| -> Result<f64> {
            let sample = simulate_e3(&head, table, n, sub_seed(grid_seed, r as u64))?;
            let est = estimate_cutoff(&sample, table, m)?;
            Ok(est.sub(&head).l2_coeff_norm_sq() + bias)
        })?
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
        let reps = risks.len() as f64;
        let mean = pairwise_sum(&risks) / reps;
        let dev: Vec<f64> = risks.iter().map(|v| (v - mean).powi(2)).collect();
        let var = pairwise_sum(&dev) / (reps - 1.0);
        rows.push(RiskRow { n, cutoff: m, mean_risk: mean, std_error: (var / reps).sqrt() });
    }
    let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.mean_risk.ln()).collect();
    let (slope, se) = fit_slope(&x, &y);
    let frame = frame_bounds(table.zeros(), max_cut.max(1));
    Ok(RiskReport {
        config: config.clone(),
        rows,
        slope,
        slope_ci: (slope - 2.0 * se, slope + 2.0 * se),
        frame_bounds: frame,
    })
}

/// Weights proportional to `g_0(i/n) = (i/n - (i/n)^2)^{1/2-H}`, `i < n`,
/// summing to one.
pub fn mean_weights(hurst: f64, n: usize) -> Result<Vec<f64>> {
    let h = check_hurst(hurst)?;
    if n < 2 {
        return Err(Error::InvalidParameter("weighted mean needs n >= 2".into()));
    }
    let nf = n as f64;
    let raw: Vec<f64> = (1..n)
        .map(|i| {
            let s = i as f64 / nf;
            (s - s * s).powf(0.5 - h)
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// `sum_{i < n} w_i Y_i` with [`mean_weights`].
pub fn weighted_mean_estimator(sample: &E1Sample) -> Result<f64> {
    let w = mean_weights(sample.hurst, sample.n)?;
    Ok(w.iter().zip(&sample.y).map(|(a, b)| a * b).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeanReport {
    pub hurst: f64,
    pub n: usize,
    pub replicates: usize,
    pub var_weighted: f64,
    pub var_plain: f64,
    pub ratio: f64,
    /// Delta-method standard error of `ratio`.
    pub ratio_se: f64,
    /// Same ratio from the exact fGN covariance.
    pub exact_ratio: f64,
    pub sigma0_sq: f64,
}

/// `Var(weighted mean) / Var(plain mean)` computed from the fGN covariance.
pub fn weighted_mean_exact_ratio(hurst: f64, n: usize) -> Result<f64> {
    let cov = ToeplitzCov::fgn(hurst, n)?;
    let mut w = mean_weights(hurst, n)?;
    w.push(0.0);
    let ones = vec![1.0 / n as f64; n];
    let quad = |v: &[f64]| pairwise_sum(&cov.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).collect::<Vec<_>>());
    Ok(quad(&w) / quad(&ones))
}

/// Monte Carlo variances of the weighted and the plain mean under `f = 0`.
pub fn weighted_mean_experiment(
    table: &BasisTable,
    n: usize,
    replicates: usize,
    seed: u64,
    jobs: usize,
) -> Result<WeightedMeanReport> {
    let h = table.hurst();
    let sampler = FgnSampler::new(h, n)?;
    let zero = RegressionFunction::from_fn(|_| 0.0);
    let pairs = run_indexed(replicates, jobs, |r| -> Result<(f64, f64)> {
        let s = e1_with_sampler(&zero, &sampler, sub_seed(seed, r as u64));
        let plain = s.y.iter().sum::<f64>() / n as f64;
        Ok((weighted_mean_estimator(&s)?, plain))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    // the mean is known to be zero
    let reps = pairs.len() as f64;
    let sq = |f: fn(&(f64, f64)) -> f64| pairwise_sum(&pairs.iter().map(|p| f(p).powi(2)).collect::<Vec<_>>()) / reps;
    let var_weighted = sq(|p| p.0);
    let var_plain = sq(|p| p.1);
    let lin: Vec<f64> = pairs.iter().map(|p| p.0 * p.0 / var_weighted - p.1 * p.1 / var_plain).collect();
    let lin_mean = pairwise_sum(&lin) / reps;
    let lin_var = pairwise_sum(&lin.iter().map(|v| (v - lin_mean).powi(2)).collect::<Vec<_>>()) / (reps - 1.0).max(1.0);
    Ok(WeightedMeanReport {
        hurst: h,
        n,
        replicates,
        var_weighted,
        var_plain,
        ratio: var_weighted / var_plain,
        ratio_se: var_weighted / var_plain * (lin_var / reps).sqrt(),
        exact_ratio: weighted_mean_exact_ratio(h, n)?,
        sigma0_sq: table.sigma(0).powi(2),
    })
}

/// The conditional-mean interpolator
/// `L(t | x) = (K(t, 1/n), ..., K(t, 1)) Cov(B_{1/n}, ..., B_1)^{-1} x`.
pub struct Interpolator {
    kernel: FbmKernel,
    n: usize,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl Interpolator {
    pub fn new(hurst: f64, n: usize) -> Result<Self> {
        let kernel = FbmKernel::new(hurst)?;
        if n == 0 {
            return Err(Error::InvalidParameter("grid size must be positive".into()));
        }
        let cov = kernel.grid_matrix(n);
        let chol = cov.cholesky().ok_or(Error::NotPositiveDefinite { index: 0, pivot: f64::NAN })?;
        let diag = chol.l_dirty().diagonal();
        let piv: Vec<f64> = diag.iter().map(|d| d * d).collect();
        let ratio = piv.iter().copied().fold(0.0, f64::max) / piv.iter().copied().fold(f64::INFINITY, f64::min);
        if ratio > PIVOT_RATIO_WARNING {
            log::warn!("fBM grid covariance is ill-conditioned (pivot ratio {ratio:e}, H = {hurst}, n = {n})");
        }
        Ok(Self { kernel, n, chol })
    }

    /// `C^{-1} x`.
    pub fn weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(self.chol.solve(&DVector::from_column_slice(x)).iter().copied().collect())
    }

    /// `x' C^{-1} x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        let w = self.weights(x)?;
        Ok(w.iter().zip(x).map(|(a, b)| a * b).sum())
    }

    pub fn apply(&self, x: &[f64], ts: &[f64]) -> Result<Vec<f64>> {
        let w = self.weights(x)?;
        let nf = self.n as f64;
        Ok(ts
            .iter()
            .map(|&t| w.iter().enumerate().map(|(j, c)| self.kernel.eval(t, (j + 1) as f64 / nf) * c).sum())
            .collect())
    }
}

pub fn interpolate_l(hurst: f64, n: usize, x: &[f64], ts: &[f64]) -> Result<Vec<f64>> {
    Interpolator::new(hurst, n)?.apply(x, ts)
}

/// `(n^{1-2H} v 1) sum_i (n int_{cell i} f - f(i/n))^2`.
pub fn condition_i_diagnostic<F: Fn(f64) -> f64>(f: F, hurst: f64, n: usize) -> Result<f64> {
    let h = check_hurst(hurst)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let rule = GaussRule::legendre(16)?;
    let nf = n as f64;
    let mut acc = 0.0;
    for i in 1..=n {
        let lo = (i - 1) as f64 / nf;
        let hi = i as f64 / nf;
        let end = f(hi);
        // n int_cell (f - f(i/n)); exact for constants
        let d = 0.5 * rule.integrate(-1.0, 1.0, |x| f(lo + 0.5 * (x + 1.0) / nf) - end);
        acc += d * d;
    }
    Ok(nf.powf(1.0 - 2.0 * h).max(1.0) * acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionResidual {
    pub n: usize,
    /// `||F||_H^2 - F_n' C^{-1} F_n`, clamped at zero.
    pub gap: f64,
    /// `n^{1-H} sqrt(gap)`.
    pub residual: f64,
}

/// Distance in the Cameron-Martin space between `F_f` and its projection
/// onto the span of `K(., l/n)`, `l = 1..n`.
pub fn condition_ii_residual(theta: &NonharmonicSeries, table: &BasisTable, n: usize) -> Result<ProjectionResidual> {
    let interp = Interpolator::new(table.hurst(), n)?;
    condition_ii_with(theta, table, &interp)
}

pub fn condition_ii_with(
    theta: &NonharmonicSeries,
    table: &BasisTable,
    interp: &Interpolator,
) -> Result<ProjectionResidual> {
    if theta.max_index() > table.max_index() {
        return Err(Error::InvalidParameter("series longer than the basis table".into()));
    }
    let n = interp.n;
    let elem = RkhsElement::new(theta.clone());
    let nf = n as f64;
    let values: Vec<f64> = (1..=n).map(|l| elem.eval(table.zeros(), l as f64 / nf)).collect();
    let norm = rkhs_norm_sq(theta, table);
    let gap = norm - interp.quadratic_form(&values)?;
    if gap < -1e-8 * norm.max(1.0) {
        return Err(Error::Consistency { what: "projection exceeds the RKHS norm", value: gap });
    }
    let gap = gap.max(0.0);
    Ok(ProjectionResidual { n, gap, residual: nf.powf(1.0 - table.hurst()) * gap.sqrt() })
}

/// Constructions of the separation lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationCase {
    /// `f_0 = c n^{-1/2} sin(omega_n (2t - 1))`, `f_1` the same with `omega_{2n}`.
    AlphaHalf,
    /// `f_0 = 0`, `f_1 = c n^{H-1} k^{1/2-H} [sin(omega_k (2t-1)) - sin(omega_{k+n} (2t-1))]`
    /// with `k` the smallest integer above `ln n`.
    AlphaLow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub n: usize,
    pub case: SeparationCase,
    pub c: f64,
    pub kl_e1: f64,
    pub e3_separation: f64,
}

// c sin(omega_k (2t - 1)) as the pair theta_k = c e^{-i omega_k} / (2i)
fn sine_pair(table: &BasisTable, k: usize, c: f64, len: usize) -> Result<NonharmonicSeries> {
    let w = table.omega(k as i64);
    let v = Complex64::from_polar(c, -w) / Complex64::new(0.0, 2.0);
    NonharmonicSeries::pair(len, k, v)
}

/// Both divergences between the pair `(f_0, f_1)` of the chosen construction:
/// the exact discrete KL under fGN noise and the sequence-model KL.
/// The constant is `c = radius / 2`.
pub fn separation_experiment(
    table: &BasisTable,
    n: usize,
    case: SeparationCase,
    radius: f64,
) -> Result<SeparationReport> {
    let h = table.hurst();
    let c = 0.5 * radius;
    let nf = n as f64;
    let (theta0, theta1) = match case {
        SeparationCase::AlphaHalf => {
            let len = 2 * n;
            if len > table.max_index() {
                return Err(Error::InvalidParameter(format!("need omega_{len} in the basis table")));
            }
            let amp = c / nf.sqrt();
            (sine_pair(table, n, amp, len)?, sine_pair(table, 2 * n, amp, len)?)
        }
        SeparationCase::AlphaLow => {
            let k = nf.ln().floor() as usize + 1;
            let len = k + n;
            if len > table.max_index() {
                return Err(Error::InvalidParameter(format!("need omega_{len} in the basis table")));
            }
            let amp = c * nf.powf(h - 1.0) * (k as f64).powf(0.5 - h);
            let f1 = sine_pair(table, k, amp, len)?.sub(&sine_pair(table, len, amp, len)?);
            (NonharmonicSeries::zero(len), f1)
        }
    };
    let f0 = RegressionFunction::from_series(theta0.clone(), table)?;
    let f1 = RegressionFunction::from_series(theta1.clone(), table)?;
    let v: Vec<f64> = (1..=n).map(|j| f0.eval(j as f64 / nf)).collect();
    let w: Vec<f64> = (1..=n).map(|j| f1.eval(j as f64 / nf)).collect();
    let cov = ToeplitzCov::fgn(h, n)?;
    let kl_e1 = kl_gaussian_shift(&cov, &MeanShiftPair::new(v, w)?)?;
    let e3_separation = e3_kl(&theta0, &theta1, table, n);
    Ok(SeparationReport { n, case, c, kl_e1, e3_separation })
}

/// `int_0^1 f^{(l)}(s) (s - s^2)^{1/2-H} ds` for each supplied derivative
/// `f', f'', ..., f^{(beta)}`.
pub fn sobolev_constraint_check(derivatives: &[&dyn Fn(f64) -> f64], hurst: f64) -> Result<Vec<f64>> {
    let h = check_hurst(hurst)?;
    let g = 0.5 - h;
    let rule = GaussRule::jacobi(256, g, g)?;
    Ok(derivatives.iter().map(|d| rule.integrate(0.0, 1.0, d)).collect())
}

/// `B(a, b)`.
pub fn beta_fn(a: f64, b: f64) -> f64 {
    use crate::specfun::gamma_positive as g;
    g(a) * g(b) / g(a + b)
}

/// Random conjugate-symmetric coefficients with `|theta_k| <~ (1 + k)^{-decay}`.
pub fn random_series(max_index: usize, decay: f64, seed: u64) -> NonharmonicSeries {
    let mut rng = rng_from_seed(seed);
    let pos: Vec<Complex64> = (0..=max_index)
        .map(|k| {
            let s = (1.0 + k as f64).powf(-decay);
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if k == 0 { 0.0 } else { rng.sample(StandardNormal) };
            Complex64::new(re * s, im * s)
        })
        .collect();
    NonharmonicSeries::from_nonnegative(&pos).expect("real zeroth coefficient")
}
