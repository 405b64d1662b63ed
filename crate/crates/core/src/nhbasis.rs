//! Nonharmonic Fourier analysis built on the zeros of `J_{1-H}`.
//!
//! The frequencies are `omega_k` (with `omega_0 = 0`), the exponentials are
//! `e_k(t) = exp(2 i omega_k t)` on `[0, 1]`, and the biorthogonal system is
//! `a_k exp(i omega_k) g_k / c'_k` with
//! `g_k(s) = d/ds int_0^s exp(2 i omega_k (s - u)) (u - u^2)^{1/2-H} du`.
//!
//! The coefficients `a_k` are stored positive. The sign of
//! `omega_k^H J'_{1-H}(omega_k)` is kept separately and applied wherever the
//! phase of `phi_k(2 omega_k)` matters (biorthogonality and analysis).

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{check_hurst, Error, Result};
use crate::fracnoise::c_hurst;
use crate::quad::GaussRule;
use crate::specfun::{bessel_zeros, gamma_positive, j_unchecked, jp_unchecked, odd_bessel_product, ZeroTable};

/// Default number of quadrature nodes for inner products with `g_k`.
pub const DEFAULT_NODES: usize = 256;

/// Node count of the refinement used to validate analysis coefficients.
pub const CHECK_NODES: usize = 512;

/// Largest admissible change of a coefficient between the two rules.
pub const ANALYSIS_TOLERANCE: f64 = 1e-6;

/// Largest imaginary part tolerated when synthesising a real function,
/// relative to `max(1, sum |theta_k|)`.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// Hurst index together with the constants `c_H` and `c'_H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurstConfig {
    pub hurst: f64,
    pub c_h: f64,
    pub c_prime_0: f64,
    pub c_prime_k: f64,
}

impl HurstConfig {
    pub fn new(hurst: f64) -> Result<Self> {
        let h = check_hurst(hurst)?;
        let c_h = c_hurst(h);
        let c_prime_k = gamma_positive(1.5 - h) * c_h.sqrt();
        let c_prime_0 = c_prime_k / (2.0 - 2.0 * h).sqrt();
        Ok(Self { hurst: h, c_h, c_prime_0, c_prime_k })
    }

    /// `c'_H` for index `k`.
    pub fn c_prime(&self, k: i64) -> f64 {
        if k == 0 {
            self.c_prime_0
        } else {
            self.c_prime_k
        }
    }

    /// Left and right sides of
    /// `c_H / (2 pi) = 2^{4H-3} H Gamma(H + 1/2) Gamma(3 - 2H) / ((1 - H) Gamma(1 - H)^2 Gamma(3/2 - H))`.
    pub fn identity_sides(&self) -> (f64, f64) {
        let h = self.hurst;
        let g = gamma_positive;
        let lhs = self.c_h / (2.0 * PI);
        let rhs = 2f64.powf(4.0 * h - 3.0) * h * g(h + 0.5) * g(3.0 - 2.0 * h)
            / ((1.0 - h) * g(1.0 - h).powi(2) * g(1.5 - h));
        (lhs, rhs)
    }

    /// Relative residual of the identity above.
    pub fn identity_residual(&self) -> f64 {
        let (l, r) = self.identity_sides();
        (l - r).abs() / l.abs()
    }

    fn phi_prefactor(&self, k: i64) -> f64 {
        let h = self.hurst;
        let m = if k == 0 { (2.0 - 2.0 * h).sqrt() } else { 1.0 };
        (PI / self.c_h).sqrt() * 2f64.powf(h - 1.0) * m
    }
}

/// Frequencies, coefficients `a_k` and noise scalings `sigma_k` for `|k| <= K`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTable {
    config: HurstConfig,
    zeros: ZeroTable,
    a: Vec<f64>,
    sign: Vec<f64>,
    sigma: Vec<f64>,
}

impl BasisTable {
    pub fn build(hurst: f64, max_index: usize) -> Result<Self> {
        let config = HurstConfig::new(hurst)?;
        let h = config.hurst;
        let zeros = bessel_zeros(h, max_index)?;
        let root = (PI / config.c_h).sqrt();
        let mut a = Vec::with_capacity(max_index + 1);
        let mut sign = Vec::with_capacity(max_index + 1);
        a.push(1.0 / (root * (1.0 - h).sqrt() * 2f64.powf(2.0 * h - 1.5) / gamma_positive(2.0 - h)));
        sign.push(1.0);
        for &w in zeros.positive() {
            let inv = root * 2f64.powf(h - 1.0) * w.powf(h) * jp_unchecked(1.0 - h, w);
            a.push(1.0 / inv.abs());
            sign.push(inv.signum());
        }
        let sigma = a.iter().enumerate().map(|(k, v)| if k == 0 { *v } else { v / 2f64.sqrt() }).collect();
        Ok(Self { config, zeros, a, sign, sigma })
    }

    /// Copy with every `a_k` scaled by `1 + eps` while `sigma_k` keep their
    /// original values. Only useful for fault-injection checks.
    pub fn with_perturbed_a(&self, eps: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.a {
            *v *= 1.0 + eps;
        }
        out
    }

    pub fn config(&self) -> &HurstConfig {
        &self.config
    }

    pub fn hurst(&self) -> f64 {
        self.config.hurst
    }

    pub fn zeros(&self) -> &ZeroTable {
        &self.zeros
    }

    pub fn max_index(&self) -> usize {
        self.zeros.max_index()
    }

    pub fn omega(&self, k: i64) -> f64 {
        self.zeros.omega(k)
    }

    /// `a_k = a_{-k} > 0`.
    pub fn a(&self, k: i64) -> f64 {
        self.a[k.unsigned_abs() as usize]
    }

    /// `a_k` with the sign of `phi_k(2 omega_k)` restored.
    pub fn signed_a(&self, k: i64) -> f64 {
        let i = k.unsigned_abs() as usize;
        self.sign[i] * self.a[i]
    }

    pub fn sigma(&self, k: i64) -> f64 {
        self.sigma[k.unsigned_abs() as usize]
    }

    /// `a_0, ..., a_K`.
    pub fn a_values(&self) -> &[f64] {
        &self.a
    }

    pub fn sigma_values(&self) -> &[f64] {
        &self.sigma
    }

    fn check_index(&self, k: i64) -> Result<()> {
        if k.unsigned_abs() as usize > self.max_index() {
            Err(Error::InvalidParameter(format!("index {k} outside the basis table (K = {})", self.max_index())))
        } else {
            Ok(())
        }
    }
}

/// `d/dx [x^H J_{1-H}(x)]`, an even function.
fn odd_product_derivative(hurst: f64, x: f64) -> f64 {
    let ax = x.abs();
    if ax == 0.0 {
        return 2f64.powf(hurst - 1.0) / gamma_positive(2.0 - hurst);
    }
    let nu = 1.0 - hurst;
    hurst * ax.powf(hurst - 1.0) * j_unchecked(nu, ax) + ax.powf(hurst) * jp_unchecked(nu, ax)
}

/// `phi_k` at the point `x` (so `lambda = x / 2`).
pub fn phi_k(table: &BasisTable, k: i64, x: f64) -> Result<Complex64> {
    table.check_index(k)?;
    let h = table.hurst();
    let lambda = 0.5 * x;
    let w = table.omega(k);
    let d = lambda - w;
    let ratio =
        if d.abs() < 1e-9 * (1.0 + w.abs()) { odd_product_derivative(h, w) } else { odd_bessel_product(h, lambda) / d };
    Ok(Complex64::from_polar(table.config.phi_prefactor(k) * ratio, w - lambda))
}

/// `||phi_k||^2` in `L^2(mu)` with `mu(dx) = (c_H / 2 pi) |x|^{1-2H} dx`.
///
/// Returns the truncated integral over `|lambda| <= cutoff` plus an analytic
/// estimate of the tail, together with that tail estimate.
pub fn phi_norm_sq(table: &BasisTable, k: i64, cutoff: f64) -> Result<(f64, f64)> {
    table.check_index(k)?;
    let h = table.hurst();
    let c = table.config.c_h;
    let w = table.omega(k);
    if cutoff <= 2.0 * w.abs() {
        return Err(Error::InvalidParameter("cutoff must exceed twice the frequency".into()));
    }
    let rule = GaussRule::legendre(24)?;
    // the |l|^{1-2H} factor goes into the weight on the two panels touching 0
    let origin = GaussRule::jacobi(24, 0.0, 1.0 - 2.0 * h)?;
    let scale = c / (2.0 * PI) * 2f64.powf(1.0 - 2.0 * h) * 2.0;
    let phi_sq = |lambda: f64| phi_k(table, k, 2.0 * lambda).map(|z| z.norm_sqr()).unwrap_or(0.0);
    let panels = (cutoff / (0.25 * PI)).ceil() as usize;
    let width = cutoff / panels as f64;
    let mut acc = 0.0;
    for side in [1.0, -1.0] {
        acc += scale * origin.integrate(0.0, width, |l| phi_sq(side * l));
        for p in 1..panels {
            let lo = p as f64 * width;
            acc += scale * rule.integrate(lo, lo + width, |l| phi_sq(side * l) * l.powf(1.0 - 2.0 * h));
        }
    }
    // |phi_k(2l)|^2 |2l|^{1-2H} averages to m^2 / (2 pi (l - w)^2) for large |l|
    let m2 = table.config.phi_prefactor(k).powi(2) / ((PI / c) * 2f64.powf(2.0 * h - 2.0));
    let tail = 0.5 * m2 / PI * (1.0 / (cutoff - w) + 1.0 / (cutoff + w));
    Ok((acc + tail, tail))
}

/// Quadrature rules for inner products with `g_k`.
#[derive(Debug, Clone)]
pub struct GkQuadrature {
    hurst: f64,
    gamma: f64,
    // (s - s^2)^gamma weighted rule on [0, 1]
    full_nodes: Vec<f64>,
    full_weights: Vec<f64>,
    // u^gamma weight, mapped onto [0, s]
    left: GaussRule,
    // (1 - u)^gamma weight, mapped onto [s, 1]
    right: GaussRule,
    // plain rule on [0, 1] after s = (1 - cos(pi v)) / 2
    outer_nodes: Vec<f64>,
    outer_weights: Vec<f64>,
}

impl GkQuadrature {
    pub fn new(hurst: f64, nodes: usize) -> Result<Self> {
        let h = check_hurst(hurst)?;
        let gamma = 0.5 - h;
        let (full_nodes, full_weights) = GaussRule::jacobi(nodes, gamma, gamma)?.mapped(0.0, 1.0);
        let left = GaussRule::jacobi(nodes, 0.0, gamma)?;
        let right = GaussRule::jacobi(nodes, gamma, 0.0)?;
        let leg = GaussRule::legendre(nodes)?;
        let (vs, ws) = leg.mapped(0.0, 1.0);
        let outer_nodes = vs.iter().map(|v| 0.5 * (1.0 - (PI * v).cos())).collect();
        let outer_weights = vs.iter().zip(&ws).map(|(v, w)| w * 0.5 * PI * (PI * v).sin()).collect();
        Ok(Self { hurst: h, gamma, full_nodes, full_weights, left, right, outer_nodes, outer_weights })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn len(&self) -> usize {
        self.full_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.full_nodes.is_empty()
    }

    /// Nodes at which `f` enters the `(s - s^2)^{1/2-H}` part of `<f, g_k>`.
    pub fn weighted_nodes(&self) -> &[f64] {
        &self.full_nodes
    }

    /// Nodes at which `f` enters the remaining part of `<f, g_k>`.
    pub fn outer_nodes(&self) -> &[f64] {
        &self.outer_nodes
    }

    fn weight(&self, u: f64) -> f64 {
        (u - u * u).powf(self.gamma)
    }

    fn full_integral(&self, omega: f64) -> Complex64 {
        self.full_nodes.iter().zip(&self.full_weights).map(|(u, w)| Complex64::from_polar(*w, -2.0 * omega * u)).sum()
    }

    /// `I(s) = int_0^s exp(-2 i omega u) (u - u^2)^{1/2-H} du`.
    pub fn partial_integral(&self, omega: f64, s: f64) -> Complex64 {
        self.partial_with_total(omega, s, None)
    }

    fn partial_with_total(&self, omega: f64, s: f64, total: Option<Complex64>) -> Complex64 {
        let g = self.gamma;
        if s <= 0.5 {
            let scale = (0.5 * s).powf(g + 1.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, w) in self.left.nodes().iter().zip(self.left.weights()) {
                let u = 0.5 * s * (x + 1.0);
                acc += Complex64::from_polar(w * (1.0 - u).powf(g), -2.0 * omega * u);
            }
            acc * scale
        } else {
            let total = total.unwrap_or_else(|| self.full_integral(omega));
            let half = 0.5 * (1.0 - s);
            let scale = half.powf(g + 1.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, w) in self.right.nodes().iter().zip(self.right.weights()) {
                let u = s + half * (x + 1.0);
                acc += Complex64::from_polar(w * u.powf(g), -2.0 * omega * u);
            }
            total - acc * scale
        }
    }

    /// `g(s)` for frequency `omega`, `0 < s < 1`.
    pub fn g_value(&self, omega: f64, s: f64) -> Complex64 {
        let i = self.partial_integral(omega, s);
        self.weight(s) + Complex64::new(0.0, 2.0 * omega) * Complex64::from_polar(1.0, 2.0 * omega * s) * i
    }

    /// `<f, g> = int_0^1 f conj(g)` given `f` at [`Self::weighted_nodes`]
    /// and [`Self::outer_nodes`].
    pub fn inner_product(&self, f_weighted: &[Complex64], f_outer: &[Complex64], omega: f64) -> Complex64 {
        self.kernel(omega).apply(f_weighted, f_outer)
    }

    /// Precomputes the frequency-dependent part of [`Self::inner_product`].
    pub fn kernel(&self, omega: f64) -> GkKernel<'_> {
        let outer = if omega == 0.0 {
            Vec::new()
        } else {
            let total = self.full_integral(omega);
            self.outer_nodes
                .iter()
                .zip(&self.outer_weights)
                .map(|(s, w)| {
                    let i = self.partial_with_total(omega, *s, Some(total));
                    let g2 = Complex64::new(0.0, 2.0 * omega) * Complex64::from_polar(1.0, 2.0 * omega * s) * i;
                    g2.conj() * w
                })
                .collect()
        };
        GkKernel { quad: self, outer }
    }
}

/// `conj(g)` at the quadrature nodes of a [`GkQuadrature`], with weights.
#[derive(Debug, Clone)]
pub struct GkKernel<'a> {
    quad: &'a GkQuadrature,
    outer: Vec<Complex64>,
}

impl GkKernel<'_> {
    pub fn apply(&self, f_weighted: &[Complex64], f_outer: &[Complex64]) -> Complex64 {
        let a: Complex64 = f_weighted.iter().zip(&self.quad.full_weights).map(|(f, w)| f * w).sum();
        let b: Complex64 = f_outer.iter().zip(&self.outer).map(|(f, g)| f * g).sum();
        a + b
    }
}

/// `g_k(s)` for `0 < s < 1`.
pub fn g_k_eval(quad: &GkQuadrature, table: &BasisTable, k: i64, s: f64) -> Result<Complex64> {
    table.check_index(k)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain { what: "g_k", value: s });
    }
    Ok(quad.g_value(table.omega(k), s))
}

fn exp_values(nodes: &[f64], omega: f64) -> Vec<Complex64> {
    nodes.iter().map(|t| Complex64::from_polar(1.0, 2.0 * omega * t)).collect()
}

/// Matrix with entries `<a_k e^{i omega_k} g_k / c'_k, e_l>` for
/// `-kmax <= k, l <= kmax`; row and column `k + kmax`.
pub fn biorth_matrix(quad: &GkQuadrature, table: &BasisTable, kmax: usize) -> Result<DMatrix<Complex64>> {
    if kmax > table.max_index() {
        return Err(Error::InvalidParameter(format!("kmax {kmax} exceeds the table size {}", table.max_index())));
    }
    let size = 2 * kmax + 1;
    let km = kmax as i64;
    let exps: Vec<(Vec<Complex64>, Vec<Complex64>)> = (-km..=km)
        .map(|l| {
            let w = table.omega(l);
            (exp_values(quad.weighted_nodes(), w), exp_values(quad.outer_nodes(), w))
        })
        .collect();
    let mut m = DMatrix::from_element(size, size, Complex64::new(0.0, 0.0));
    for k in -km..=km {
        let w = table.omega(k);
        let pre = Complex64::from_polar(table.signed_a(k) / table.config.c_prime(k), w);
        let kernel = quad.kernel(w);
        for l in -km..=km {
            let (fw, fo) = &exps[(l + km) as usize];
            // <g_k, e_l> = conj(<e_l, g_k>)
            let ip = kernel.apply(fw, fo).conj();
            m[((k + km) as usize, (l + km) as usize)] = pre * ip;
        }
    }
    Ok(m)
}

/// Largest deviation of a matrix from the identity, split into diagonal and
/// off-diagonal parts.
pub fn identity_deviation(m: &DMatrix<Complex64>) -> (f64, f64) {
    let mut diag: f64 = 0.0;
    let mut off: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i == j {
                diag = diag.max((m[(i, j)] - 1.0).norm());
            } else {
                off = off.max(m[(i, j)].norm());
            }
        }
    }
    (diag, off)
}

/// Coefficients `theta_k`, `|k| <= K`, with `theta_{-k} = conj(theta_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonharmonicSeries {
    theta: Vec<Complex64>,
}

impl NonharmonicSeries {
    pub fn zero(max_index: usize) -> Self {
        Self { theta: vec![Complex64::new(0.0, 0.0); 2 * max_index + 1] }
    }

    /// Builds the series from `theta_0, ..., theta_K`; `theta_0` must be real.
    pub fn from_nonnegative(theta: &[Complex64]) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidParameter("empty coefficient list".into()));
        }
        if theta[0].im.abs() > 1e-12 * (1.0 + theta[0].re.abs()) {
            return Err(Error::SymmetryViolation { residue: theta[0].im.abs() });
        }
        let k = theta.len() - 1;
        let mut out = Self::zero(k);
        out.theta[k] = Complex64::new(theta[0].re, 0.0);
        for (j, t) in theta.iter().enumerate().skip(1) {
            out.theta[k + j] = *t;
            out.theta[k - j] = t.conj();
        }
        Ok(out)
    }

    /// Builds the series from `theta_{-K}, ..., theta_K`, checking symmetry.
    pub fn from_full(theta: Vec<Complex64>) -> Result<Self> {
        if theta.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter("coefficient list must have odd length".into()));
        }
        let k = theta.len() / 2;
        let scale = theta.iter().map(|t| t.norm()).fold(1.0, f64::max);
        let residue = (0..=k).map(|j| (theta[k + j] - theta[k - j].conj()).norm()).fold(0.0, f64::max);
        if residue > 1e-12 * scale {
            return Err(Error::SymmetryViolation { residue });
        }
        Ok(Self { theta })
    }

    /// Single conjugate pair `theta_k = value`, `theta_{-k} = conj(value)`.
    pub fn pair(max_index: usize, k: usize, value: Complex64) -> Result<Self> {
        if k > max_index {
            return Err(Error::InvalidParameter(format!("index {k} beyond truncation {max_index}")));
        }
        let mut theta = vec![Complex64::new(0.0, 0.0); max_index + 1];
        theta[k] = if k == 0 { Complex64::new(value.re, 0.0) } else { value };
        Self::from_nonnegative(&theta)
    }

    pub fn max_index(&self) -> usize {
        self.theta.len() / 2
    }

    pub fn get(&self, k: i64) -> Complex64 {
        let kk = self.max_index() as i64;
        if k.abs() > kk {
            Complex64::new(0.0, 0.0)
        } else {
            self.theta[(k + kk) as usize]
        }
    }

    /// `(k, theta_k)` for `k = -K..=K`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let kk = self.max_index() as i64;
        self.theta.iter().enumerate().map(move |(i, t)| (i as i64 - kk, *t))
    }

    /// `theta_0, ..., theta_K`.
    pub fn nonnegative(&self) -> &[Complex64] {
        &self.theta[self.max_index()..]
    }

    pub fn truncate(&self, m: usize) -> Self {
        let m = m.min(self.max_index());
        Self::from_nonnegative(&self.nonnegative()[..=m]).expect("already symmetric")
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { theta: self.theta.iter().map(|t| t * c).collect() }
    }

    /// `self - other`, padded to the larger truncation.
    pub fn sub(&self, other: &Self) -> Self {
        let k = self.max_index().max(other.max_index());
        let pos: Vec<Complex64> = (0..=k as i64).map(|j| self.get(j) - other.get(j)).collect();
        Self::from_nonnegative(&pos).expect("difference of symmetric series")
    }

    /// `sum (1 + |k|)^{2 alpha} |theta_k|^2`.
    pub fn sobolev_norm_sq(&self, alpha: f64) -> f64 {
        self.iter().map(|(k, t)| (1.0 + k.abs() as f64).powf(2.0 * alpha) * t.norm_sqr()).sum()
    }

    /// Membership in the ball `sum (1 + |k|)^{2 alpha} |theta_k|^2 <= C^2`.
    pub fn in_sobolev_ball(&self, alpha: f64, radius: f64) -> bool {
        self.sobolev_norm_sq(alpha) <= radius * radius
    }

    pub fn l2_coeff_norm_sq(&self) -> f64 {
        self.theta.iter().map(|t| t.norm_sqr()).sum()
    }
}

/// Coefficients `theta_k = a_k e^{-i omega_k} <f, g_k> / c'_k`.
pub struct Analyzer {
    coarse: GkQuadrature,
    fine: GkQuadrature,
}

impl Analyzer {
    pub fn new(hurst: f64) -> Result<Self> {
        Ok(Self { coarse: GkQuadrature::new(hurst, DEFAULT_NODES)?, fine: GkQuadrature::new(hurst, CHECK_NODES)? })
    }

    pub fn coarse(&self) -> &GkQuadrature {
        &self.coarse
    }

    /// Coefficients up to `kmax` of a real function `f`. Values from the
    /// default rule are returned after checking them against the refined
    /// rule.
    pub fn analyze<F: Fn(f64) -> f64>(&self, f: F, table: &BasisTable, kmax: usize) -> Result<NonharmonicSeries> {
        if kmax > table.max_index() {
            return Err(Error::InvalidParameter(format!("kmax {kmax} exceeds the table size {}", table.max_index())));
        }
        let eval = |q: &GkQuadrature| {
            let fw: Vec<Complex64> = q.weighted_nodes().iter().map(|t| Complex64::new(f(*t), 0.0)).collect();
            let fo: Vec<Complex64> = q.outer_nodes().iter().map(|t| Complex64::new(f(*t), 0.0)).collect();
            (fw, fo)
        };
        let (cw, co) = eval(&self.coarse);
        let (fw, fo) = eval(&self.fine);
        let coef = |q: &GkQuadrature, w: &[Complex64], o: &[Complex64], k: i64| {
            let om = table.omega(k);
            let pre = Complex64::from_polar(table.signed_a(k) / table.config.c_prime(k), -om);
            pre * q.inner_product(w, o, om)
        };
        let km = kmax as i64;
        let mut pos = Vec::with_capacity(kmax + 1);
        for k in 0..=km {
            let plus = coef(&self.coarse, &cw, &co, k);
            let check = coef(&self.fine, &fw, &fo, k);
            let difference = (plus - check).norm();
            if difference > ANALYSIS_TOLERANCE * (1.0 + check.norm()) {
                return Err(Error::QuadratureNonConvergence { k, difference });
            }
            let value = if k == 0 {
                Complex64::new(plus.re, 0.0)
            } else {
                let minus = coef(&self.coarse, &cw, &co, -k);
                0.5 * (plus + minus.conj())
            };
            pos.push(value);
        }
        NonharmonicSeries::from_nonnegative(&pos)
    }
}

/// One-shot analysis with freshly built quadrature rules.
pub fn analyze<F: Fn(f64) -> f64>(f: F, table: &BasisTable, kmax: usize) -> Result<NonharmonicSeries> {
    Analyzer::new(table.hurst())?.analyze(f, table, kmax)
}

/// `f(t) = sum theta_k exp(2 i omega_k t)` at each `t`.
pub fn synthesize(series: &NonharmonicSeries, zeros: &ZeroTable, ts: &[f64]) -> Result<Vec<f64>> {
    if series.max_index() > zeros.max_index() {
        return Err(Error::InvalidParameter("series longer than the zero table".into()));
    }
    let scale = series.iter().map(|(_, t)| t.norm()).sum::<f64>().max(1.0);
    ts.iter()
        .map(|&t| {
            let z: Complex64 =
                series.iter().map(|(k, th)| th * Complex64::from_polar(1.0, 2.0 * zeros.omega(k) * t)).sum();
            if z.im.abs() > IMAGINARY_TOLERANCE * scale {
                Err(Error::SymmetryViolation { residue: z.im.abs() })
            } else {
                Ok(z.re)
            }
        })
        .collect()
}

/// `conj(F(1_{[0,t]})(2 omega)) = int_0^t exp(2 i omega u) du`.
pub fn indicator_transform_conj(omega: f64, t: f64) -> Complex64 {
    if omega == 0.0 {
        Complex64::new(t, 0.0)
    } else {
        (Complex64::from_polar(1.0, 2.0 * omega * t) - 1.0) / Complex64::new(0.0, 2.0 * omega)
    }
}

/// Element `F(t) = sum theta_k conj(F(1_t)(2 omega_k))` of the Cameron-Martin
/// space of fBM, i.e. `F(t) = int_0^t f`.
#[derive(Debug, Clone, PartialEq)]
pub struct RkhsElement {
    pub series: NonharmonicSeries,
}

impl RkhsElement {
    pub fn new(series: NonharmonicSeries) -> Self {
        Self { series }
    }

    pub fn eval(&self, zeros: &ZeroTable, t: f64) -> f64 {
        self.series.iter().map(|(k, th)| th * indicator_transform_conj(zeros.omega(k), t)).sum::<Complex64>().re
    }
}

/// `||F||_H^2 = sum |theta_k|^2 / a_k^2`.
pub fn rkhs_norm_sq(series: &NonharmonicSeries, table: &BasisTable) -> f64 {
    series.iter().map(|(k, t)| t.norm_sqr() / table.a(k).powi(2)).sum()
}

/// `KL(P_f, P_g) = ||F_f - F_g||_H^2 / (2 noise^2)`.
pub fn kl_rkhs(f: &RkhsElement, g: &RkhsElement, noise_level: f64, table: &BasisTable) -> Result<f64> {
    if !(noise_level > 0.0) {
        return Err(Error::InvalidParameter(format!("noise level must be positive (got {noise_level})")));
    }
    Ok(0.5 * rkhs_norm_sq(&f.series.sub(&g.series), table) / (noise_level * noise_level))
}

/// `sum_{|k| <= K} a_k^2 F(1_s)(2 omega_k) conj(F(1_t)(2 omega_k))`, which
/// converges to `Cov(B_s, B_t)`.
pub fn kernel_parseval_check(table: &BasisTable, s: f64, t: f64) -> f64 {
    let mut acc = table.a(0).powi(2) * s * t;
    for k in 1..=table.max_index() as i64 {
        let w = table.omega(k);
        acc += 2.0 * table.a(k).powi(2) * (w * (s - t)).cos() * (w * s).sin() * (w * t).sin() / (w * w);
    }
    acc
}

/// Bound on the neglected part `sum_{|k| > K}` of [`kernel_parseval_check`].
///
/// Uses `a_k <= abar (1 + k)^{1/2-H}` with `abar` fitted on the upper half of
/// the table and `omega_k >= (k - 1/4) pi`.
pub fn kernel_tail_bound(table: &BasisTable) -> f64 {
    let h = table.hurst();
    let kk = table.max_index();
    let abar = (kk / 2..=kk).map(|k| table.a(k as i64) * (1.0 + k as f64).powf(h - 0.5)).fold(0.0, f64::max) * 1.01;
    let kf = kk as f64;
    let r = (kf + 2.0) / (kf + 0.75);
    2.0 * abar * abar / (PI * PI) * r * r * (1.0 + kf).powf(-2.0 * h) / (2.0 * h)
}

/// Gram matrix `int_0^1 e_k conj(e_l)` of the exponentials, `|k|, |l| <= K`.
pub fn gram_matrix(zeros: &ZeroTable, max_index: usize) -> DMatrix<Complex64> {
    let km = max_index as i64;
    let size = 2 * max_index + 1;
    DMatrix::from_fn(size, size, |i, j| {
        let d = zeros.omega(i as i64 - km) - zeros.omega(j as i64 - km);
        indicator_transform_conj(d, 1.0)
    })
}

/// Frame constants `(A, B)` of the exponentials truncated at `K`: the extreme
/// eigenvalues of their Gram matrix.
pub fn frame_bounds(zeros: &ZeroTable, max_index: usize) -> (f64, f64) {
    let eig = SymmetricEigen::new(gram_matrix(zeros, max_index)).eigenvalues;
    (eig.min(), eig.max())
}

/// `||sum theta_k e_k||^2_{L^2[0,1]}` in closed form.
pub fn series_l2_norm_sq(series: &NonharmonicSeries, zeros: &ZeroTable) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, a) in series.iter() {
        for (l, b) in series.iter() {
            acc += a * b.conj() * indicator_transform_conj(zeros.omega(k) - zeros.omega(l), 1.0);
        }
    }
    acc.re
}
