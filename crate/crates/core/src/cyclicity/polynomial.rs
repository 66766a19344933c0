use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C = Complex64;

/// Complex polynomial `c_0 + c_1 ξ + ... + c_d ξ^d` (ascending coefficients).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolynomialCoeffs {
    pub coeffs: Vec<C>,
}

impl PolynomialCoeffs {
    pub fn new(coeffs: Vec<C>) -> Self {
        let mut p = PolynomialCoeffs { coeffs };
        p.trim();
        p
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C::new(c, 0.0)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, s: C) -> C {
        self.coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * s + c)
    }

    /// Drops trailing exact zeros.
    pub fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.re == 0.0 && c.im == 0.0) {
            self.coeffs.pop();
        }
    }

    /// Zeroes coefficients whose largest contribution on `|s| ≤ s_max` is
    /// below `rel` times the total, then trims.
    pub fn prune(&mut self, s_max: f64, rel: f64) {
        let contrib: Vec<f64> = self.coeffs.iter().enumerate().map(|(m, c)| c.norm() * s_max.powi(m as i32)).collect();
        let total: f64 = contrib.iter().sum();
        for (c, w) in self.coeffs.iter_mut().zip(&contrib) {
            if *w < rel * total {
                *c = C::new(0.0, 0.0);
            }
        }
        self.trim();
    }
}

/// `Q(ξ) = Σ_j Q_j(ξ^q) ξ^j`: the coefficient of `ξ^{mq+j}` is coefficient `m` of `Q_j`.
pub fn assemble_polynomial(parts: &[PolynomialCoeffs], q: usize) -> Result<PolynomialCoeffs> {
    if q < 2 {
        return Err(Error::precondition("assembly needs q >= 2"));
    }
    if parts.len() != q {
        return Err(Error::precondition(format!("expected {q} component polynomials, got {}", parts.len())));
    }
    let max_len = parts.iter().map(|p| p.coeffs.len()).max().unwrap_or(0);
    let mut out = vec![C::new(0.0, 0.0); max_len * q];
    for (j, part) in parts.iter().enumerate() {
        for (m, c) in part.coeffs.iter().enumerate() {
            out[m * q + j] = *c;
        }
    }
    Ok(PolynomialCoeffs::new(out))
}

/// Rewrites `Σ_k b_k T_k(u)`, `u = (2s − lo − hi)/(hi − lo)`, in monomials of `s`.
pub fn chebyshev_to_monomial(cheb: &[C], lo: f64, hi: f64) -> Vec<C> {
    let d = cheb.len();
    if d == 0 {
        return vec![];
    }
    // monomial coefficients in u, by the three-term recurrence
    let mut in_u = vec![C::new(0.0, 0.0); d];
    let mut t_prev = vec![0.0; d];
    let mut t_cur = vec![0.0; d];
    t_prev[0] = 1.0;
    if d > 1 {
        t_cur[1] = 1.0;
    }
    for (k, b) in cheb.iter().enumerate() {
        let tk: &[f64] = if k == 0 { &t_prev } else { &t_cur };
        for (m, &t) in tk.iter().enumerate() {
            in_u[m] += b * t;
        }
        if k >= 1 && k + 1 < d {
            let mut next = vec![0.0; d];
            for m in 0..d {
                let shifted = if m > 0 { 2.0 * t_cur[m - 1] } else { 0.0 };
                next[m] = shifted - t_prev[m];
            }
            t_prev = std::mem::replace(&mut t_cur, next);
        }
    }
    // substitute u = a s + b
    let a = 2.0 / (hi - lo);
    let b = -(lo + hi) / (hi - lo);
    let mut out = vec![C::new(0.0, 0.0); d];
    let mut power = vec![0.0; d];
    power[0] = 1.0;
    for (m, c) in in_u.iter().enumerate() {
        for (k, p) in power.iter().enumerate().take(m + 1) {
            out[k] += c * p;
        }
        if m + 1 < d {
            let mut next = vec![0.0; d];
            for k in 0..=m {
                next[k + 1] += a * power[k];
                next[k] += b * power[k];
            }
            power = next;
        }
    }
    out
}

/// `T_0(u), ..., T_degree(u)`.
pub fn chebyshev_row(u: f64, degree: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(degree + 1);
    row.push(1.0);
    if degree >= 1 {
        row.push(u);
    }
    for k in 2..=degree {
        let v = 2.0 * u * row[k - 1] - row[k - 2];
        row.push(v);
    }
    row
}
