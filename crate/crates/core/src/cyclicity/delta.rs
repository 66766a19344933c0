use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::FuncExpr;
use crate::linalg::{LogComplex, Lu, Square};
use crate::numerics::{coprime_pair, exact_from_f64, frac_exact, AlphaValue};
use crate::operator::{orbit_row, OperatorSpec};

type C = Complex64;

/// The operator `φ(x) f({x + r/q})` for a reduced fraction.
pub(crate) fn rational_spec(weight: &FuncExpr, r: u64, q: u64) -> Result<(OperatorSpec, u64, u64)> {
    let (r, q) = coprime_pair(r, q)?;
    let alpha = AlphaValue::rational(r as i64, q as i64)?;
    Ok((OperatorSpec::weighted(weight.clone(), alpha), r, q))
}

/// The matrix `[T^j f({t + i r/q})]_{i,j}` at an exact `t`.
pub(crate) fn delta_matrix(spec: &OperatorSpec, f: &FuncExpr, r: u64, q: u64, t: &BigRational) -> Result<Square> {
    let mut m = Square::zeros(q as usize);
    for i in 0..q {
        let x = frac_exact(&(t + BigRational::new(BigInt::from(i * r), BigInt::from(q))));
        let row = orbit_row(spec, f, q as usize, &x)?;
        for (j, v) in row.into_iter().enumerate() {
            m.set(i as usize, j, v);
        }
    }
    Ok(m)
}

/// `Δ(f, r/q)(t)` in log-magnitude/phase form. `r/q` is reduced first.
pub fn delta_sample(f: &FuncExpr, weight: &FuncExpr, r: u64, q: u64, t: f64) -> Result<LogComplex> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::precondition(format!("t = {t} outside [0, 1)")));
    }
    let (spec, r, q) = rational_spec(weight, r, q)?;
    delta_at(&spec, f, r, q, &exact_from_f64(t))
}

pub(crate) fn delta_at(spec: &OperatorSpec, f: &FuncExpr, r: u64, q: u64, t: &BigRational) -> Result<LogComplex> {
    Ok(Lu::factor(&delta_matrix(spec, f, r, q, t)?).log_det())
}

/// The closed form of `Δ(f, r/q)(0)` for a weight with `φ(0) = 0`:
/// `(−1)^{(q−2)(q−1)/2} f(0)^q ∏_{i=0}^{q−2} ∏_{m=q−1−i}^{q−1} φ({m r/q})`.
pub fn delta_at_zero_closed_form(f: &FuncExpr, weight: &FuncExpr, r: u64, q: u64) -> Result<C> {
    let (r, q) = coprime_pair(r, q)?;
    let phi0 = weight.evaluate(0.0)?;
    if phi0.norm() != 0.0 {
        return Err(Error::precondition(format!("closed form needs weight(0) = 0, got {phi0}")));
    }
    let f0 = f.evaluate(0.0)?;
    let mut acc = LogComplex::from_complex(f0.powu(q as u32));
    for i in 0..q.saturating_sub(1) {
        for m in (q - 1 - i)..q {
            let y = BigRational::new(BigInt::from(m * r), BigInt::from(q));
            let y = num_traits::ToPrimitive::to_f64(&frac_exact(&y)).unwrap();
            acc = acc.mul(LogComplex::from_complex(weight.evaluate(y)?));
        }
    }
    let exponent = (q - 2) * (q - 1) / 2;
    let sign = if exponent % 2 == 1 { -1.0 } else { 1.0 };
    Ok(acc.to_complex() * sign)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Cyclic,
    NotCyclic,
    Inconclusive,
}

/// Sampled `Δ(f, r/q)` over `t ∈ [0, 1/q)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaProfile {
    pub r: u64,
    pub q: u64,
    pub t: Vec<f64>,
    pub log_abs: Vec<f64>,
    pub phase: Vec<C>,
    /// `min |Δ|` (may underflow to 0; see `min_log_abs`).
    pub min_abs: f64,
    pub min_log_abs: f64,
    pub argmin: f64,
    /// Fraction of samples with `|Δ| ≤ tol`.
    pub zero_fraction: f64,
    /// Longest run of consecutive samples with `|Δ| ≤ tol`.
    pub longest_zero_run: usize,
    pub tol: f64,
}

impl DeltaProfile {
    pub fn values(&self) -> Vec<C> {
        self.log_abs
            .iter()
            .zip(&self.phase)
            .map(|(l, p)| LogComplex { log_magnitude: *l, phase: *p }.to_complex())
            .collect()
    }
}

/// Samples `Δ` at `t_k = (k + 1/2)/(samples · q)`.
pub fn delta_profile(f: &FuncExpr, weight: &FuncExpr, r: u64, q: u64, samples: usize, tol: f64) -> Result<DeltaProfile> {
    if samples < 1 {
        return Err(Error::precondition("need at least one sample"));
    }
    if !(tol >= 0.0) {
        return Err(Error::precondition("tol must be >= 0"));
    }
    let (spec, r, q) = rational_spec(weight, r, q)?;
    let den = BigInt::from(2 * samples as u64 * q);
    let values: Vec<LogComplex> = (0..samples)
        .into_par_iter()
        .map(|k| delta_at(&spec, f, r, q, &BigRational::new(BigInt::from(2 * k + 1), den.clone())))
        .collect::<Result<_>>()?;
    let t: Vec<f64> = (0..samples).map(|k| (2 * k + 1) as f64 / (2 * samples as u64 * q) as f64).collect();
    let log_tol = if tol == 0.0 { f64::NEG_INFINITY } else { tol.ln() };
    let below = |v: &LogComplex| v.is_zero() || v.log_magnitude <= log_tol;
    let (mut run, mut longest, mut count) = (0usize, 0usize, 0usize);
    let mut argmin = 0;
    for (k, v) in values.iter().enumerate() {
        if v.log_magnitude < values[argmin].log_magnitude {
            argmin = k;
        }
        if below(v) {
            count += 1;
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    let min_log_abs = values[argmin].log_magnitude;
    Ok(DeltaProfile {
        r,
        q,
        t: t.clone(),
        log_abs: values.iter().map(|v| v.log_magnitude).collect(),
        phase: values.iter().map(|v| v.phase).collect(),
        min_abs: min_log_abs.exp(),
        min_log_abs,
        argmin: t[argmin],
        zero_fraction: count as f64 / samples as f64,
        longest_zero_run: longest,
        tol,
    })
}

/// Cyclicity verdict from sampled determinants.
///
/// Cyclic when every sample has `|Δ| > tol`; not cyclic when more than ten
/// consecutive samples (an interval of relative length above `10/samples`)
/// have `|Δ| ≤ tol`; inconclusive otherwise.
pub fn cyclicity_test(f: &FuncExpr, weight: &FuncExpr, r: u64, q: u64, samples: usize, tol: f64) -> Result<(Verdict, DeltaProfile)> {
    let profile = delta_profile(f, weight, r, q, samples, tol)?;
    let verdict = if profile.zero_fraction == 0.0 {
        Verdict::Cyclic
    } else if profile.longest_zero_run > 10 {
        Verdict::NotCyclic
    } else {
        Verdict::Inconclusive
    };
    Ok((verdict, profile))
}
