//! Real-order special functions: Gamma, Bessel functions of the first kind
//! for orders in (-1, 2), and the positive zeros of `J_{1-H}`.
//!
//! Bessel values use the ascending power series up to a per-order crossover
//! and the Hankel asymptotic expansion beyond it. Both branches agree to
//! roughly 1e-12 around the crossover, which is what the zero finder and
//! the downstream coefficient tables need.

use std::f64::consts::PI;

use crate::error::{check_hurst, Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Absolute tolerance used when locating zeros of `J_{1-H}`.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Gamma function for positive arguments.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { what: "gamma", value: x });
    }
    Ok(gamma_positive(x))
}

pub(crate) fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // Shift up rather than reflect; x > 0 here.
        return gamma_positive(x + 1.0) / x;
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let half_power = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half_power * (-t).exp() * half_power * acc
}

/// Order of a Bessel function of the first kind, restricted to (-1, 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if nu > -1.0 && nu < 2.0 {
            Ok(Self(nu))
        } else {
            Err(Error::Domain { what: "Bessel order", value: nu })
        }
    }

    pub fn nu(self) -> f64 {
        self.0
    }

    /// The three orders used with a given Hurst index: `-H`, `1-H`, `2-H`.
    pub fn family(hurst: f64) -> Result<[Self; 3]> {
        let h = check_hurst(hurst)?;
        Ok([Self(-h), Self(1.0 - h), Self(2.0 - h)])
    }

    /// Argument beyond which the Hankel expansion is used.
    ///
    /// Below it the ascending series loses at most ~1e-12 to cancellation;
    /// above it the smallest asymptotic term is below ~1e-12.
    pub fn crossover(self) -> f64 {
        // The asymptotic series degrades slightly as |nu| grows.
        13.5 + 0.5 * self.0.abs()
    }
}

/// `J_nu(x)` for `x >= 0`.
///
/// Negative arguments are rejected; callers use the odd extension of
/// `x^H J_{1-H}(x)` where needed. `x = 0` is rejected for negative orders,
/// where the function is unbounded.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain { what: "bessel_j", value: x });
    }
    if x == 0.0 && order.0 < 0.0 {
        return Err(Error::Domain { what: "bessel_j at 0 with negative order", value: order.0 });
    }
    Ok(j_unchecked(order.0, x))
}

/// Derivative `J'_{nu}(x)` via `2 J'_nu = J_{nu-1} - J_{nu+1}`, for `nu` in (0, 1).
pub fn bessel_j_prime(order: BesselOrder, x: f64) -> Result<f64> {
    let nu = order.0;
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Domain { what: "bessel_j_prime order", value: nu });
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { what: "bessel_j_prime", value: x });
    }
    Ok(jp_unchecked(nu, x))
}

pub(crate) fn jp_unchecked(nu: f64, x: f64) -> f64 {
    0.5 * (j_unchecked(nu - 1.0, x) - j_unchecked(nu + 1.0, x))
}

pub(crate) fn j_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= BesselOrder(nu).crossover() {
        j_series(nu, x)
    } else {
        j_hankel(nu, x)
    }
}

/// Ascending power series.
pub(crate) fn j_series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half.powf(nu) / gamma_positive(nu + 1.0);
    let mut sum = term;
    let mut largest = term.abs();
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + nu));
        sum += term;
        largest = largest.max(term.abs());
        if term.abs() <= 1e-18 * largest.max(sum.abs()) || m > 500.0 {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion, truncated at its smallest term.
pub(crate) fn j_hankel(nu: f64, x: f64) -> f64 {
    let (p, q) = hankel_pq(nu, x);
    let phase = (0.5 * nu + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        // the expansion diverges past its smallest term
        if k > 2 && next.abs() > term.abs() {
            break;
        }
        term = next;
        // P collects even k with sign (-1)^{k/2}, Q odd k with sign (-1)^{(k-1)/2}
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

/// Table of the positive zeros of `J_{1-H}`.
///
/// `omega(0) = 0` and `omega(-k) = -omega(k)`; only positive zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTable {
    hurst: f64,
    omegas: Vec<f64>,
}

impl ZeroTable {
    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Largest index stored.
    pub fn max_index(&self) -> usize {
        self.omegas.len()
    }

    /// Positive zeros `omega_1 < omega_2 < ...`.
    pub fn positive(&self) -> &[f64] {
        &self.omegas
    }

    /// `omega_k` for any `|k| <= K`.
    ///
    /// # Panics
    /// If `|k|` exceeds the table size.
    pub fn omega(&self, k: i64) -> f64 {
        match k {
            0 => 0.0,
            k if k > 0 => self.omegas[k as usize - 1],
            k => -self.omegas[(-k) as usize - 1],
        }
    }

    /// Half-width, in units of pi, of the band that contains every zero.
    pub fn band_half_width(hurst: f64) -> f64 {
        (0.125_f64).max((1.0 - 2.0 * hurst).abs() / 4.0)
    }
}

/// Locates the first `count` positive zeros of `J_{1-H}`.
///
/// Each zero is bracketed inside its band around `k*pi`, bisected to width
/// [`ROOT_TOLERANCE`] (or a few units in the last place for large zeros) and
/// polished by one Newton step.
pub fn bessel_zeros(hurst: f64, count: usize) -> Result<ZeroTable> {
    let h = check_hurst(hurst)?;
    if count == 0 {
        return Err(Error::InvalidParameter("zero count must be positive".into()));
    }
    let nu = 1.0 - h;
    let band = ZeroTable::band_half_width(h).min(0.25);
    let mut omegas = Vec::with_capacity(count);
    for k in 1..=count {
        let kf = k as f64;
        let mut lo = (kf - band) * PI;
        let mut hi = (kf + band) * PI;
        let mut f_lo = j_unchecked(nu, lo);
        let f_hi = j_unchecked(nu, hi);
        if f_lo == 0.0 {
            omegas.push(lo);
            continue;
        }
        if f_hi == 0.0 {
            omegas.push(hi);
            continue;
        }
        if f_lo.signum() == f_hi.signum() {
            return Err(Error::BracketNoSignChange { k, lo, hi });
        }
        // past omega ~ 4500 the spacing of doubles exceeds the tolerance
        let width = ROOT_TOLERANCE.max(4.0 * f64::EPSILON * hi);
        while hi - lo > width {
            let mid = 0.5 * (lo + hi);
            let f_mid = j_unchecked(nu, mid);
            if f_mid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        let mid = 0.5 * (lo + hi);
        let newton = mid - j_unchecked(nu, mid) / jp_unchecked(nu, mid);
        let root = if (newton - mid).abs() <= width { newton } else { mid };
        omegas.push(root);
    }
    Ok(ZeroTable { hurst: h, omegas })
}

/// Leading asymptotic location `(k + (1 - 2H)/4) pi` of the k-th zero.
pub fn zero_asymptote(hurst: f64, k: usize) -> f64 {
    (k as f64 + 0.25 * (1.0 - 2.0 * hurst)) * PI
}

/// The odd function `x^H J_{1-H}(x)` on the whole real line.
pub(crate) fn odd_bessel_product(hurst: f64, x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax == 0.0 { 0.0 } else { ax.powf(hurst) * j_unchecked(1.0 - hurst, ax) };
    if x < 0.0 {
        -v
    } else {
        v
    }
}
