//! Fractional Gaussian noise and fractional Brownian motion.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_hurst, Error, Result};
use crate::specfun::gamma_positive;

/// Number of aliasing terms summed explicitly on each side in the spectral
/// density before switching to the integral tail.
pub const SPECTRAL_TERMS: usize = 200;

/// Smallest frequency at which the spectral density is evaluated.
pub const SPECTRAL_FLOOR: f64 = 1e-8;

/// `c_H = sin(pi H) Gamma(2H + 1)`.
pub fn c_hurst(hurst: f64) -> f64 {
    (PI * hurst).sin() * gamma_positive(2.0 * hurst + 1.0)
}

/// Autocovariance of unit-variance fGN at lag `k`.
pub fn fgn_autocov(hurst: f64, k: i64) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k.unsigned_abs() as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// First `n` autocovariances `gamma(0), ..., gamma(n - 1)`.
pub fn fgn_autocov_row(hurst: f64, n: usize) -> Vec<f64> {
    (0..n as i64).map(|k| fgn_autocov(hurst, k)).collect()
}

/// `Cov(B_s, B_t)` for fractional Brownian motion.
pub fn fbm_cov(hurst: f64, s: f64, t: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (t.abs().powf(h2) + s.abs().powf(h2) - (t - s).abs().powf(h2))
}

/// The fBM covariance kernel for a fixed Hurst index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbmKernel {
    hurst: f64,
}

impl FbmKernel {
    pub fn new(hurst: f64) -> Result<Self> {
        Ok(Self { hurst: check_hurst(hurst)? })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        fbm_cov(self.hurst, s, t)
    }

    /// Dense covariance of `(B_{1/n}, ..., B_1)`.
    pub fn grid_matrix(&self, n: usize) -> DMatrix<f64> {
        let nf = n as f64;
        DMatrix::from_fn(n, n, |i, j| self.eval((i + 1) as f64 / nf, (j + 1) as f64 / nf))
    }
}

/// Spectral density of fGN on `(0, pi]`, normalised so that
/// `(1/pi) int_0^pi f(l) cos(k l) dl = gamma(k)`.
pub fn fgn_spectral_density(hurst: f64, lambda: f64) -> Result<f64> {
    let h = check_hurst(hurst)?;
    if !(SPECTRAL_FLOOR..=PI).contains(&lambda) {
        return Err(Error::Domain { what: "fgn_spectral_density", value: lambda });
    }
    Ok(spectral_unchecked(h, lambda))
}

pub(crate) fn spectral_unchecked(hurst: f64, lambda: f64) -> f64 {
    let e = -1.0 - 2.0 * hurst;
    let tp = 2.0 * PI;
    let mut sum = lambda.abs().powf(e);
    for j in 1..=SPECTRAL_TERMS {
        let x = tp * j as f64;
        sum += (x + lambda).powf(e) + (x - lambda).powf(e);
    }
    // j > J on both sides: midpoint integral plus its first Euler-Maclaurin correction
    let edge = tp * (SPECTRAL_TERMS as f64 + 0.5);
    let (up, down) = (edge + lambda, edge - lambda);
    let tail = (up.powf(-2.0 * hurst) + down.powf(-2.0 * hurst)) / (tp * 2.0 * hurst)
        - (1.0 + 2.0 * hurst) * tp * (up.powf(e - 1.0) + down.powf(e - 1.0)) / 24.0;
    let half_sin = (0.5 * lambda).sin();
    4.0 * c_hurst(hurst) * half_sin * half_sin * (sum + tail)
}

/// Stationary fGN model of length `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgnModel {
    pub hurst: f64,
    pub n: usize,
}

impl FgnModel {
    pub fn new(hurst: f64, n: usize) -> Result<Self> {
        let hurst = check_hurst(hurst)?;
        if n == 0 {
            return Err(Error::InvalidParameter("sample size must be positive".into()));
        }
        Ok(Self { hurst, n })
    }

    pub fn autocov_row(&self) -> Vec<f64> {
        fgn_autocov_row(self.hurst, self.n)
    }

    pub fn dense_cov(&self) -> DMatrix<f64> {
        let row = self.autocov_row();
        DMatrix::from_fn(self.n, self.n, |i, j| row[i.abs_diff(j)])
    }
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for replicate `index` of a run seeded with `seed`.
///
/// Defined as `splitmix64(seed ^ splitmix64(index))`, so streams depend only
/// on `(seed, index)` and never on scheduling.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

enum Method {
    Trivial,
    Circulant { sqrt_eig: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    Cholesky(DMatrix<f64>),
}

/// Reusable exact fGN generator for a fixed `(H, n)`.
pub struct FgnSampler {
    model: FgnModel,
    method: Method,
}

impl std::fmt::Debug for FgnSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let method = match self.method {
            Method::Trivial => "trivial",
            Method::Circulant { .. } => "circulant",
            Method::Cholesky(_) => "cholesky",
        };
        f.debug_struct("FgnSampler").field("model", &self.model).field("method", &method).finish()
    }
}

impl FgnSampler {
    pub fn new(hurst: f64, n: usize) -> Result<Self> {
        let model = FgnModel::new(hurst, n)?;
        if n == 1 {
            return Ok(Self { model, method: Method::Trivial });
        }
        match circulant(&model) {
            Some(method) => Ok(Self { model, method }),
            None => {
                log::warn!("circulant embedding failed for H = {hurst}, n = {n}; using Cholesky");
                Self::with_cholesky(hurst, n)
            }
        }
    }

    /// Forces the dense Cholesky method.
    pub fn with_cholesky(hurst: f64, n: usize) -> Result<Self> {
        let model = FgnModel::new(hurst, n)?;
        let chol = model
            .dense_cov()
            .cholesky()
            .ok_or_else(|| Error::Simulation(format!("fGN covariance not positive definite (H = {hurst}, n = {n})")))?;
        Ok(Self { model, method: Method::Cholesky(chol.l()) })
    }

    pub fn model(&self) -> FgnModel {
        self.model
    }

    pub fn uses_circulant(&self) -> bool {
        matches!(self.method, Method::Circulant { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.model.n;
        match &self.method {
            Method::Trivial => vec![rng.sample(StandardNormal)],
            Method::Circulant { sqrt_eig, fft } => {
                let mut buf: Vec<Complex64> = sqrt_eig
                    .iter()
                    .map(|s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf[..n].iter().map(|z| z.re).collect()
            }
            Method::Cholesky(l) => {
                let z = nalgebra::DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                (l * z).iter().copied().collect()
            }
        }
    }
}

fn circulant(model: &FgnModel) -> Option<Method> {
    let n = model.n;
    let m = 2 * (n - 1);
    let row = model.autocov_row();
    let mut c: Vec<Complex64> = (0..m).map(|j| Complex64::new(if j < n { row[j] } else { row[m - j] }, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut c);
    let mut sqrt_eig = Vec::with_capacity(m);
    for z in &c {
        if z.re < -1e-9 {
            return None;
        }
        sqrt_eig.push((z.re.max(0.0) / m as f64).sqrt());
    }
    Some(Method::Circulant { sqrt_eig, fft })
}

/// Exact fGN draw of length `n`, deterministic in `seed`.
pub fn simulate_fgn(hurst: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = FgnSampler::new(hurst, n)?;
    let mut rng = rng_from_seed(seed);
    Ok(sampler.sample(&mut rng))
}

/// Partial sums `S_k = sum_{j <= k} x_j`.
pub fn fbm_from_fgn(fgn: &[f64]) -> Result<Vec<f64>> {
    if fgn.is_empty() {
        return Err(Error::InvalidParameter("partial sums of an empty vector".into()));
    }
    let mut acc = 0.0;
    Ok(fgn
        .iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect())
}
