//! Symmetric positive definite Toeplitz systems, eigenvalue bounds for fGN
//! covariance matrices and Gaussian mean-shift divergences.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_hurst, Error, Result};
use crate::fracnoise::{c_hurst, fgn_autocov_row, spectral_unchecked};
use crate::quad::GaussRule;

/// Reflection coefficients at or beyond this magnitude count as singular.
pub const REFLECTION_LIMIT: f64 = 1.0 - 1e-12;

/// Largest size for which [`ToeplitzCov::solve`] cross-checks against a dense
/// Cholesky solve.
pub const DENSE_CHECK_MAX: usize = 1024;

/// Minimum number of grid points used to bracket extrema of the spectral
/// density.
pub const EXTREMUM_GRID: usize = 10_000;

/// Symmetric Toeplitz covariance given by its first row.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzCov {
    row: Vec<f64>,
}

impl ToeplitzCov {
    /// Validates positive definiteness through the Durbin recursion: the
    /// matrix is positive definite iff every reflection coefficient has
    /// magnitude below one.
    pub fn new(first_row: Vec<f64>) -> Result<Self> {
        if first_row.is_empty() {
            return Err(Error::InvalidParameter("empty Toeplitz row".into()));
        }
        if !(first_row[0] > 0.0) {
            return Err(Error::NotPositiveDefinite { index: 0, pivot: first_row[0] });
        }
        let cov = Self { row: first_row };
        cov.reflection_coefficients()?;
        Ok(cov)
    }

    /// Unit-variance fGN covariance of size `n`.
    pub fn fgn(hurst: f64, n: usize) -> Result<Self> {
        check_hurst(hurst)?;
        Self::new(fgn_autocov_row(hurst, n))
    }

    pub fn len(&self) -> usize {
        self.row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row.is_empty()
    }

    pub fn first_row(&self) -> &[f64] {
        &self.row
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| self.row[i.abs_diff(j)])
    }

    /// Toeplitz matrix-vector product.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.row[i.abs_diff(j)] * x[j]).sum()).collect()
    }

    /// Reflection coefficients of the Durbin recursion.
    pub fn reflection_coefficients(&self) -> Result<Vec<f64>> {
        let n = self.len();
        let g0 = self.row[0];
        let r: Vec<f64> = self.row[1..].iter().map(|v| v / g0).collect();
        let mut out = Vec::with_capacity(n.saturating_sub(1));
        if n == 1 {
            return Ok(out);
        }
        let mut y = vec![-r[0]];
        let mut alpha = -r[0];
        let mut beta = 1.0;
        check_reflection(0, alpha)?;
        out.push(alpha);
        for k in 1..n - 1 {
            beta *= 1.0 - alpha * alpha;
            let dot: f64 = (0..k).map(|i| r[i] * y[k - 1 - i]).sum();
            alpha = -(r[k] + dot) / beta;
            check_reflection(k, alpha)?;
            out.push(alpha);
            let z: Vec<f64> = (0..k).map(|i| y[i] + alpha * y[k - 1 - i]).collect();
            y = z;
            y.push(alpha);
        }
        Ok(out)
    }

    /// Solves `T x = b` by the Levinson recursion.
    ///
    /// For `n <= DENSE_CHECK_MAX` the result is compared with a dense
    /// Cholesky solve; in all cases the residual must stay below
    /// `1e-8 ||b||`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let x = self.levinson(b)?;
        let tx = self.mul_vec(&x);
        let bn = norm(b);
        let res = norm(&tx.iter().zip(b).map(|(u, v)| u - v).collect::<Vec<_>>());
        let limit = 1e-8 * bn.max(f64::MIN_POSITIVE);
        if res > limit {
            return Err(Error::Residual { residual: res, limit });
        }
        if self.len() <= DENSE_CHECK_MAX && bn > 0.0 {
            let xd = self.solve_dense(b)?;
            let diff = norm(&x.iter().zip(&xd).map(|(u, v)| u - v).collect::<Vec<_>>());
            let scale = norm(&xd).max(f64::MIN_POSITIVE);
            if diff > 1e-8 * scale {
                return Err(Error::Consistency { what: "Levinson and Cholesky solves", value: diff / scale });
            }
        }
        Ok(x)
    }

    /// Bare Levinson recursion without verification.
    pub fn levinson(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let g0 = self.row[0];
        let r: Vec<f64> = self.row[1..].iter().map(|v| v / g0).collect();
        let b: Vec<f64> = b.iter().map(|v| v / g0).collect();
        if n == 1 {
            return Ok(b);
        }
        let mut y = vec![-r[0]];
        let mut x = vec![b[0]];
        let mut beta = 1.0;
        let mut alpha = -r[0];
        check_reflection(0, alpha)?;
        for k in 1..n {
            beta *= 1.0 - alpha * alpha;
            let dot: f64 = (0..k).map(|i| r[i] * x[k - 1 - i]).sum();
            let mu = (b[k] - dot) / beta;
            for i in 0..k {
                x[i] += mu * y[k - 1 - i];
            }
            x.push(mu);
            if k < n - 1 {
                let dot: f64 = (0..k).map(|i| r[i] * y[k - 1 - i]).sum();
                alpha = -(r[k] + dot) / beta;
                check_reflection(k, alpha)?;
                let z: Vec<f64> = (0..k).map(|i| y[i] + alpha * y[k - 1 - i]).collect();
                y = z;
                y.push(alpha);
            }
        }
        Ok(x)
    }

    /// Dense Cholesky solve.
    pub fn solve_dense(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let chol = self.dense().cholesky().ok_or(Error::NotPositiveDefinite { index: 0, pivot: f64::NAN })?;
        Ok(chol.solve(&DVector::from_column_slice(b)).iter().copied().collect())
    }
}

fn check_reflection(step: usize, alpha: f64) -> Result<()> {
    if alpha.abs() >= REFLECTION_LIMIT || !alpha.is_finite() {
        Err(Error::Singular { step, reflection: alpha })
    } else {
        Ok(())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Two mean vectors of a Gaussian shift experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanShiftPair {
    v: Vec<f64>,
    w: Vec<f64>,
}

impl MeanShiftPair {
    pub fn new(v: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if v.len() != w.len() {
            return Err(Error::DimensionMismatch { expected: v.len(), got: w.len() });
        }
        Ok(Self { v, w })
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn difference(&self) -> Vec<f64> {
        self.v.iter().zip(&self.w).map(|(a, b)| a - b).collect()
    }
}

/// `KL(N(v, S), N(w, S)) = (v - w)' S^{-1} (v - w) / 2`.
pub fn kl_gaussian_shift(cov: &ToeplitzCov, pair: &MeanShiftPair) -> Result<f64> {
    let d = pair.difference();
    if d.len() != cov.len() {
        return Err(Error::DimensionMismatch { expected: cov.len(), got: d.len() });
    }
    if d.iter().all(|x| *x == 0.0) {
        return Ok(0.0);
    }
    let x = cov.solve(&d)?;
    Ok(0.5 * d.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().max(0.0))
}

/// Exact fGN shift divergence and the shape `(n^{1-2H} v 1) ||v - w||^2`.
pub fn kl_fgn_shift_bound(hurst: f64, pair: &MeanShiftPair) -> Result<(f64, f64)> {
    let n = pair.len();
    let cov = ToeplitzCov::fgn(hurst, n)?;
    let exact = kl_gaussian_shift(&cov, pair)?;
    let d = pair.difference();
    let shape = (n as f64).powf(1.0 - 2.0 * hurst).max(1.0) * d.iter().map(|x| x * x).sum::<f64>();
    Ok((exact, shape))
}

#[derive(Clone, Copy)]
enum Extremum {
    Min,
    Max,
}

// Log-spaced grid on [lo, hi] followed by golden-section refinement around
// the best grid point.
fn spectral_extremum(hurst: f64, lo: f64, hi: f64, which: Extremum) -> f64 {
    let f = |l: f64| spectral_unchecked(hurst, l);
    let better = |a: f64, b: f64| match which {
        Extremum::Min => a < b,
        Extremum::Max => a > b,
    };
    let m = EXTREMUM_GRID;
    let ratio = (hi / lo).ln();
    let grid: Vec<f64> = (0..=m).map(|i| lo * (ratio * i as f64 / m as f64).exp()).collect();
    let mut best = 0;
    let mut best_val = f(grid[0]);
    for (i, &l) in grid.iter().enumerate().skip(1) {
        let v = f(l);
        if better(v, best_val) {
            best = i;
            best_val = v;
        }
    }
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(m)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if b - a < 1e-14 * b {
            break;
        }
        if better(fc, fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    [best_val, fc, fd, f(lo), f(hi)].into_iter().fold(best_val, |acc, v| if better(v, acc) { v } else { acc })
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidParameter(format!("eigenvalue bounds need n >= 2 (got {n})")))
    } else {
        Ok(())
    }
}

/// `(1 - 1/pi) inf_{[1/n, pi]} f_H`, a lower bound for the smallest
/// eigenvalue of the `n x n` fGN covariance.
pub fn eig_lower_bound(hurst: f64, n: usize) -> Result<f64> {
    let h = check_hurst(hurst)?;
    check_size(n)?;
    Ok((1.0 - 1.0 / PI) * spectral_extremum(h, 1.0 / n as f64, PI, Extremum::Min))
}

/// `sup_{[1/n, pi]} f_H + (n/pi) int_0^{1/n} f_H`, an upper bound for the
/// largest eigenvalue of the `n x n` fGN covariance.
pub fn eig_upper_bound(hurst: f64, n: usize) -> Result<f64> {
    let h = check_hurst(hurst)?;
    check_size(n)?;
    let eps = 1.0 / n as f64;
    let sup = spectral_extremum(h, eps, PI, Extremum::Max);
    let c = c_hurst(h);
    // c_H l^{1-2H} integrated exactly; the smooth remainder by Gauss-Legendre
    let leading = c * eps.powf(2.0 - 2.0 * h) / (2.0 - 2.0 * h);
    let rule = GaussRule::legendre(32)?;
    let rest = rule.integrate(0.0, eps, |l| spectral_unchecked(h, l) - c * l.powf(1.0 - 2.0 * h));
    Ok(sup + (n as f64 / PI) * (leading + rest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd_row(n: usize, seed: u64) -> Vec<f64> {
        // autocovariance of a random MA(3) process plus a nugget
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        (0..n)
            .map(|k| {
                let ma: f64 = (0..4).filter(|i| i + k < 4).map(|i| c[i] * c[i + k]).sum();
                ma + if k == 0 { 0.5 } else { 0.0 }
            })
            .collect()
    }

    #[test]
    fn identity_row() {
        let cov = ToeplitzCov::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let b = [1.5, -2.0, 0.25, 4.0];
        assert_eq!(cov.solve(&b).unwrap(), b.to_vec());
        let w = ToeplitzCov::fgn(0.5, 50).unwrap();
        let b: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let x = w.solve(&b).unwrap();
        assert!(x.iter().zip(&b).all(|(a, c)| (a - c).abs() < 1e-12));
    }

    #[test]
    fn levinson_matches_dense_lu() {
        let row = random_spd_row(64, 3);
        let cov = ToeplitzCov::new(row).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = cov.levinson(&b).unwrap();
        let lu = cov.dense().lu().solve(&DVector::from_column_slice(&b)).unwrap();
        for (a, c) in x.iter().zip(lu.iter()) {
            assert!((a - c).abs() < 1e-8 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn levinson_and_cholesky_agree_on_fgn() {
        for i in 1..=9 {
            let h = i as f64 / 10.0;
            for &n in &[16usize, 128, 600] {
                let cov = ToeplitzCov::fgn(h, n).unwrap();
                let b: Vec<f64> = (0..n).map(|k| ((k * 7 % 13) as f64 - 6.0) / 6.0).collect();
                let x = cov.levinson(&b).unwrap();
                let y = cov.solve_dense(&b).unwrap();
                let d = norm(&x.iter().zip(&y).map(|(a, c)| a - c).collect::<Vec<_>>());
                assert!(d <= 1e-8 * norm(&y), "H {h} n {n}: {d}");
            }
        }
    }

    #[test]
    fn rejects_indefinite_and_mismatch() {
        assert!(matches!(ToeplitzCov::new(vec![1.0, 1.0]), Err(Error::Singular { .. })));
        assert!(ToeplitzCov::new(vec![1.0, 0.9, -0.9]).is_err());
        assert!(ToeplitzCov::new(vec![0.0, 0.0]).is_err());
        let cov = ToeplitzCov::fgn(0.7, 4).unwrap();
        assert!(matches!(cov.solve(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn kl_basic_values() {
        let cov = ToeplitzCov::new(vec![1.0, 0.0, 0.0]).unwrap();
        let p = MeanShiftPair::new(vec![1.0, 0.0, 0.0], vec![0.0; 3]).unwrap();
        assert!((kl_gaussian_shift(&cov, &p).unwrap() - 0.5).abs() < 1e-15);
        let same = MeanShiftPair::new(vec![0.3; 3], vec![0.3; 3]).unwrap();
        assert_eq!(kl_gaussian_shift(&cov, &same).unwrap(), 0.0);
        assert!(MeanShiftPair::new(vec![1.0], vec![]).is_err());

        let mut e1 = vec![0.0; 40];
        e1[0] = 1.0;
        let p = MeanShiftPair::new(e1, vec![0.0; 40]).unwrap();
        let (exact, shape) = kl_fgn_shift_bound(0.5, &p).unwrap();
        assert!((exact - 0.5).abs() < 1e-14);
        assert_eq!(shape, 1.0);
        let z = MeanShiftPair::new(vec![0.0; 8], vec![0.0; 8]).unwrap();
        assert_eq!(kl_fgn_shift_bound(0.3, &z).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn kl_matches_dense_inverse() {
        let n = 128;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cov = ToeplitzCov::fgn(0.7, n).unwrap();
        let p = MeanShiftPair::new(v.clone(), w.clone()).unwrap();
        let kl = kl_gaussian_shift(&cov, &p).unwrap();
        let inv = cov.dense().try_inverse().unwrap();
        let d = DVector::from_vec(p.difference());
        let oracle = 0.5 * (d.transpose() * inv * &d)[(0, 0)];
        assert!((kl - oracle).abs() < 1e-8 * oracle);
    }

    #[test]
    fn kl_shift_ratio_stays_bounded() {
        let mut flat = Vec::new();
        for &n in &[64usize, 128, 256, 512, 1024] {
            let d = vec![1.0 / (n as f64).sqrt(); n];
            let p = MeanShiftPair::new(d, vec![0.0; n]).unwrap();
            let (exact, shape) = kl_fgn_shift_bound(0.7, &p).unwrap();
            flat.push(exact / shape);

            let mut spikes = vec![0.0; n];
            spikes[0] = 1.0;
            spikes[n - 1] = 1.0;
            let p = MeanShiftPair::new(spikes, vec![0.0; n]).unwrap();
            let (exact, shape) = kl_fgn_shift_bound(0.7, &p).unwrap();
            assert!(exact / shape < 1.0);
        }
        for w in flat.windows(2) {
            assert!(w[1] <= w[0], "{flat:?}");
        }
    }

    #[test]
    fn white_noise_bounds() {
        for &n in &[2usize, 17, 1000] {
            let lo = eig_lower_bound(0.5, n).unwrap();
            let hi = eig_upper_bound(0.5, n).unwrap();
            assert!((lo - (1.0 - 1.0 / PI)).abs() < 1e-10);
            assert!((hi - (1.0 + 1.0 / PI)).abs() < 1e-10);
        }
        assert!(eig_lower_bound(0.5, 1).is_err());
    }

    #[test]
    fn bounds_bracket_dense_spectrum() {
        for i in 1..=9 {
            let h = i as f64 / 10.0;
            for &n in &[16usize, 64, 256] {
                let cov = ToeplitzCov::fgn(h, n).unwrap();
                let eig = SymmetricEigen::new(cov.dense()).eigenvalues;
                let min = eig.min();
                let max = eig.max();
                let lo = eig_lower_bound(h, n).unwrap();
                let hi = eig_upper_bound(h, n).unwrap();
                assert!(lo <= min, "H {h} n {n}: {lo} > {min}");
                assert!(hi >= max, "H {h} n {n}: {hi} < {max}");
            }
        }
    }
}
