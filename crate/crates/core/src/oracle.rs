//! Test-only reference implementations in double-double arithmetic.
//!
//! Nothing here shares code with the production special functions: the
//! Gamma function comes from a shifted Stirling series with 15 Bernoulli
//! terms and the Bessel function from the ascending series summed with
//! ~32 significant digits, so cancellation at large arguments is harmless.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn scale(self, p: f64) -> Self {
        Self { hi: self.hi * p, lo: self.lo * p }
    }

    pub fn exp(self) -> Self {
        const LN2: Dd = Dd::new(std::f64::consts::LN_2, 2.319_046_813_846_299_6e-17);
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Dd::from(k)).scale(1.0 / 1024.0);
        let mut term = Dd::from(1.0);
        let mut sum = Dd::from(1.0);
        for i in 1..30 {
            term = term * r / Dd::from(i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        sum.scale(2f64.powi(k as i32))
    }

    pub fn ln(self) -> Self {
        let mut y = Dd::from(self.hi.ln());
        for _ in 0..3 {
            y = y + self * (-y).exp() - Dd::from(1.0);
        }
        y
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }
}

const PI_DD: Dd = Dd::new(std::f64::consts::PI, 1.224_646_799_147_353_2e-16);

// (numerator, denominator) of B_2, B_4, ..., B_30
const BERNOULLI: [(f64, f64); 15] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174_611.0, 330.0),
    (854_513.0, 138.0),
    (-236_364_091.0, 2730.0),
    (8_553_103.0, 6.0),
    (-23_749_461_029.0, 870.0),
    (8_615_841_276_005.0, 14322.0),
];

/// `ln Gamma(x)` for `x > 0` in double-double precision.
pub fn ln_gamma_dd(x: f64) -> Dd {
    let mut shift = Dd::from(1.0);
    let mut z = x;
    while z < 40.0 {
        shift = shift * Dd::from(z);
        z += 1.0;
    }
    let zd = Dd::from(z);
    let mut s = (zd - Dd::from(0.5)) * zd.ln() - zd + (PI_DD.scale(2.0)).ln().scale(0.5);
    let z2 = zd * zd;
    let mut zpow = zd;
    for (i, &(num, den)) in BERNOULLI.iter().enumerate() {
        let k2 = 2.0 * (i as f64 + 1.0);
        s = s + Dd::from(num) / (Dd::from(den * k2 * (k2 - 1.0)) * zpow);
        zpow = zpow * z2;
    }
    s - shift.ln()
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma_dd(x).exp().to_f64()
}

/// `J_nu(x)` from the ascending series in double-double arithmetic.
pub fn bessel_j_dd(nu: f64, x: f64) -> Dd {
    let half = Dd::from(0.5 * x);
    let q = -(half * half);
    let lead = (Dd::from(nu) * half.ln() - ln_gamma_dd(nu + 1.0)).exp();
    let mut term = lead;
    let mut sum = term;
    let mut largest = term.abs().to_f64();
    let mut m = 0.0;
    loop {
        m += 1.0;
        term = term * q / (Dd::from(m) * (Dd::from(m) + Dd::from(nu)));
        sum = sum + term;
        largest = largest.max(term.abs().to_f64());
        if term.abs().to_f64() < 1e-34 * largest || m > 2000.0 {
            break;
        }
    }
    sum
}

pub fn bessel_j(nu: f64, x: f64) -> f64 {
    bessel_j_dd(nu, x).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_sanity() {
        let third = Dd::from(1.0) / Dd::from(3.0);
        let back = third * Dd::from(3.0) - Dd::from(1.0);
        assert!(back.to_f64().abs() < 1e-31);
        let e = Dd::from(1.0).exp();
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
        assert!((e.ln().to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn gamma_integers_and_half() {
        assert!((gamma(6.0) - 120.0).abs() < 1e-12);
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn half_order_bessel() {
        for &x in &[0.5, 10.0, 35.0] {
            let closed = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin();
            assert!((bessel_j(0.5, x) - closed).abs() < 1e-15);
        }
    }
}
