//! Gauss rules built by Golub-Welsch and polished by Newton steps on the
//! orthonormal three-term recurrence.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::specfun::gamma_positive;

/// A Gauss rule on `[-1, 1]` for the weight `(1 - x)^alpha (1 + x)^beta`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    alpha: f64,
    beta: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn recurrence(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    // diag[k] = a_k, off[k] = sqrt(b_{k+1}), monic Jacobi recurrence
    let ab = alpha + beta;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n);
    for k in 0..n {
        let kf = k as f64;
        let a = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        diag.push(a);
        let j = kf + 1.0;
        let s = 2.0 * j + ab;
        let b = if k == 0 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0))
        } else {
            4.0 * j * (j + alpha) * (j + beta) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        off.push(b.sqrt());
    }
    (diag, off)
}

impl GaussRule {
    /// Gauss-Jacobi rule with `n` nodes; `alpha, beta > -1`.
    pub fn jacobi(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("a Gauss rule needs at least one node".into()));
        }
        if !(alpha > -1.0 && beta > -1.0) {
            return Err(Error::InvalidParameter(format!("Jacobi exponents must exceed -1 (got {alpha}, {beta})")));
        }
        let (diag, off) = recurrence(n, alpha, beta);
        let mut jm = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            jm[(i, i)] = diag[i];
            if i + 1 < n {
                jm[(i, i + 1)] = off[i];
                jm[(i + 1, i)] = off[i];
            }
        }
        let eig = SymmetricEigen::new(jm);
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.total_cmp(b));

        let mu0 = 2f64.powf(alpha + beta + 1.0) * gamma_positive(alpha + 1.0) * gamma_positive(beta + 1.0)
            / gamma_positive(alpha + beta + 2.0);
        let p0 = 1.0 / mu0.sqrt();
        let mut weights = Vec::with_capacity(n);
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let (pn, dpn, _) = orthonormal_eval(*x, n, p0, &diag, &off);
                if dpn == 0.0 {
                    break;
                }
                let step = pn / dpn;
                *x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, _, sumsq) = orthonormal_eval(*x, n, p0, &diag, &off);
            weights.push(1.0 / sumsq);
        }
        Ok(Self { alpha, beta, nodes, weights })
    }

    /// Gauss-Legendre rule with `n` nodes.
    pub fn legendre(n: usize) -> Result<Self> {
        Self::jacobi(n, 0.0, 0.0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights for `int_a^b (b - y)^alpha (y - a)^beta f(y) dy`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let scale = half.powf(self.alpha + self.beta + 1.0);
        let ys = self.nodes.iter().map(|x| a + half * (x + 1.0)).collect();
        let ws = self.weights.iter().map(|w| w * scale).collect();
        (ys, ws)
    }

    /// `int_a^b (b - y)^alpha (y - a)^beta f(y) dy`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let scale = half.powf(self.alpha + self.beta + 1.0);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(a + half * (x + 1.0));
        }
        acc * scale
    }
}

// Returns (p_n(x), p_n'(x), sum_{k<n} p_k(x)^2) for the orthonormal family.
fn orthonormal_eval(x: f64, n: usize, p0: f64, diag: &[f64], off: &[f64]) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut p = p0;
    let mut d_prev = 0.0;
    let mut d = 0.0;
    let mut sumsq = 0.0;
    for k in 0..n {
        sumsq += p * p;
        let b_prev = if k == 0 { 0.0 } else { off[k - 1] };
        let p_next = ((x - diag[k]) * p - b_prev * p_prev) / off[k];
        let d_next = (p + (x - diag[k]) * d - b_prev * d_prev) / off[k];
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d, sumsq)
}

/// Composite Gauss-Legendre integration over equal panels.
pub fn composite_legendre<F: Fn(f64) -> f64>(rule: &GaussRule, a: f64, b: f64, panels: usize, f: F) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            rule.integrate(lo, lo + h, &f)
        })
        .sum()
}
