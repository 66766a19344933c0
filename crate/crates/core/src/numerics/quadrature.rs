use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rotation::frac_exact;
use super::AlphaValue;
use crate::error::{Error, Result};
use crate::expr::FuncExpr;

/// Midpoint grid `x_j = (j + 1/2)/N`, `j = 0..N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::precondition(format!("grid needs at least 2 points, got {n}")));
        }
        Ok(GridSpec { n })
    }

    /// The grid with twice as many points; its nodes are disjoint from this grid's.
    pub fn refined(&self) -> Self {
        GridSpec { n: 2 * self.n }
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        (2 * j + 1) as f64 / (2 * self.n) as f64
    }

    pub fn point_exact(&self, j: usize) -> BigRational {
        BigRational::new(BigInt::from(2 * j + 1), BigInt::from(2 * self.n))
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: &FuncExpr) -> Result<Vec<Complex64>> {
        (0..self.n).into_par_iter().map(|j| f.evaluate(self.point(j))).collect()
    }

    /// True when some node coincides with a shifted breakpoint `{c − k α}`,
    /// `0 <= k < k_max`, for rational `α`. Always false for the midpoint
    /// scheme unless `2N` shares the right factors with the denominators.
    pub fn hits_breakpoint(&self, breakpoints: &[BigRational], alpha: &AlphaValue, k_max: u64) -> bool {
        let two_n = BigRational::from_integer(BigInt::from(2 * self.n));
        let period = alpha.value().denom().clone();
        let k_max = match num_traits::ToPrimitive::to_u64(&period) {
            Some(q) => k_max.min(q),
            None => k_max,
        };
        breakpoints.iter().any(|c| {
            (0..k_max).any(|k| {
                let y = frac_exact(&(c - alpha.value() * BigInt::from(k))) * &two_n;
                y.is_integer() && (y.numer() % BigInt::from(2)) == BigInt::one()
            })
        })
    }
}

/// `(∫ |s|^p)^{1/p}` by the midpoint rule; `p ∈ (1, ∞)`.
pub fn lp_norm(samples: &[Complex64], p: f64) -> Result<f64> {
    let (scale, sum) = scaled_power_sum(samples, p)?;
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(scale * (sum / samples.len() as f64).powf(1.0 / p))
}

/// `∫ |s|^p` by the midpoint rule.
pub fn lp_norm_pow(samples: &[Complex64], p: f64) -> Result<f64> {
    let (scale, sum) = scaled_power_sum(samples, p)?;
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(scale.powf(p) * sum / samples.len() as f64)
}

// Sum of (|s|/max)^p, accumulated in index order; the scaling makes
// the norm exactly homogeneous up to rounding and immune to underflow.
fn scaled_power_sum(samples: &[Complex64], p: f64) -> Result<(f64, f64)> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::precondition(format!("exponent p = {p} must lie in (1, inf)")));
    }
    if samples.is_empty() {
        return Err(Error::precondition("no samples"));
    }
    let mut scale = 0.0f64;
    for (j, s) in samples.iter().enumerate() {
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::numerical(format!("non-finite sample at index {j}")));
        }
        scale = scale.max(s.norm());
    }
    if scale == 0.0 {
        return Ok((0.0, 0.0));
    }
    let sum = if p == 2.0 {
        samples.iter().map(|s| (s / scale).norm_sqr()).fold(0.0, |acc, v| acc + v)
    } else {
        samples.iter().map(|s| (s.norm() / scale).powf(p)).fold(0.0, |acc, v| acc + v)
    };
    Ok((scale, sum))
}

/// Grid estimate of a Lebesgue measure with its quadrature tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub tolerance: f64,
}

impl MeasureEstimate {
    /// Fraction `count/total` with tolerance `(breakpoints + 2)/total`.
    pub fn from_count(count: usize, total: usize, breakpoints: usize) -> Self {
        MeasureEstimate {
            value: count as f64 / total as f64,
            tolerance: (breakpoints + 2) as f64 / total as f64,
        }
    }
}

/// Measure of `{Re s > 0}` from grid samples.
pub fn measure_positive_samples(samples: &[Complex64], breakpoints: usize) -> MeasureEstimate {
    let count = samples.iter().filter(|s| s.re > 0.0).count();
    MeasureEstimate::from_count(count, samples.len(), breakpoints)
}

/// Measure of `{Re f > 0}` on the grid.
pub fn measure_positive_real(f: &FuncExpr, grid: GridSpec) -> Result<MeasureEstimate> {
    let samples = grid.sample(f)?;
    Ok(measure_positive_samples(&samples, f.indicator_breakpoints().len()))
}
