//! Numerical probes of structural facts: the periodic weight `w`, level sets of
//! `w`, rational spectral radii, the convex-product measure bound, measure
//! invariance of `{Re T^n f > 0}`, the zero-weight obstruction, and the unit
//! determinant `Δ(1, r/q)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclicity::{delta_at_zero_closed_form, delta_profile, delta_sample};
use crate::error::{Error, Result};
use crate::expr::{parse_function, FuncExpr};
use crate::numerics::{frac_exact, lp_norm_pow, measure_positive_samples, AlphaValue, GridSpec};
use crate::operator::{cocycle_at, iterate, iterate_scaled_at, OperatorSpec};

type C = Complex64;

/// Forward differences at or below this fraction of `max |values|` count as violations.
pub const MONOTONICITY_THRESHOLD: f64 = 1e-12;

/// `w(x) = ∏_{k<q} φ({x + k/q})` on the left-endpoint grid `x_i = i/(qN)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodicWeightProduct {
    pub q: u64,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub min_forward_difference: f64,
    pub violations: usize,
    pub strictly_increasing: bool,
}

fn w_at(q: u64, weight: &FuncExpr, x: &BigRational) -> Result<f64> {
    let mut w = 1.0;
    for k in 0..q {
        let y = frac_exact(&(x + BigRational::new(BigInt::from(k), BigInt::from(q))));
        w *= weight.evaluate_real(y.to_f64().unwrap())?;
    }
    Ok(w)
}

pub fn periodic_weight(q: u64, weight: &FuncExpr, grid: GridSpec) -> Result<PeriodicWeightProduct> {
    if q < 2 {
        return Err(Error::precondition("periodic weight needs q >= 2"));
    }
    let den = BigInt::from(q * grid.n as u64);
    let w: Vec<f64> = (0..grid.n)
        .into_par_iter()
        .map(|i| w_at(q, weight, &BigRational::new(BigInt::from(i), den.clone())))
        .collect::<Result<_>>()?;
    let x = (0..grid.n).map(|i| i as f64 / (q as f64 * grid.n as f64)).collect();
    let scale = w.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let diffs: Vec<f64> = w.windows(2).map(|p| p[1] - p[0]).collect();
    let min_forward_difference = diffs.iter().copied().fold(f64::INFINITY, f64::min);
    let violations = diffs.iter().filter(|d| **d <= MONOTONICITY_THRESHOLD * scale).count();
    Ok(PeriodicWeightProduct { q, x, w, min_forward_difference, violations, strictly_increasing: violations == 0 && scale > 0.0 })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenEntry {
    pub lambda: C,
    /// `λ^q`.
    pub level: C,
    /// Sampled measure of `{x ∈ [0, 1) : |w(x) − λ^q| < tol}`.
    pub measure: f64,
    /// `q · 2 tol / min slope + 2/N`.
    pub bound: f64,
    /// Measure of the same set from the roots of `w = λ^q ± tol`, found by bisection.
    pub predicted: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenProbe {
    pub q: u64,
    pub tol: f64,
    pub grid_n: usize,
    pub min_slope: f64,
    pub sup_w: f64,
    pub entries: Vec<EigenEntry>,
}

/// Polar grid of `radial × angular` points in the closed unit disk, plus 0.
pub fn lambda_grid(radial: usize, angular: usize) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0)];
    for i in 1..=radial {
        let r = i as f64 / radial as f64;
        for k in 0..angular {
            out.push(C::from_polar(r, std::f64::consts::TAU * k as f64 / angular as f64));
        }
    }
    out
}

/// `count` points drawn uniformly from the unit disk.
pub fn random_lambdas(count: usize, seed: u64) -> Vec<C> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r: f64 = rng.gen::<f64>().sqrt();
            C::from_polar(r, std::f64::consts::TAU * rng.gen::<f64>())
        })
        .collect()
}

// Smallest x in [0, 1/q) with w(x) >= level, for increasing w.
fn w_inverse(q: u64, weight: &FuncExpr, level: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0 / q as f64);
    let eval = |x: f64| w_at(q, weight, &crate::numerics::exact_from_f64(x));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eval(mid)? < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Measures of the near-level-sets `{|w − λ^q| < tol}` on `[0, 1)`.
pub fn eigen_levelset_probe(q: u64, weight: &FuncExpr, lambdas: &[C], tol: f64, grid: GridSpec) -> Result<EigenProbe> {
    if !(tol > 0.0) {
        return Err(Error::precondition("tol must be positive"));
    }
    // midpoint samples on [0, 1/q)
    let den = BigInt::from(2 * q * grid.n as u64);
    let w: Vec<f64> = (0..grid.n)
        .into_par_iter()
        .map(|i| w_at(q, weight, &BigRational::new(BigInt::from(2 * i + 1), den.clone())))
        .collect::<Result<_>>()?;
    let h = 1.0 / (q as f64 * grid.n as f64);
    let min_slope = w.windows(2).map(|p| (p[1] - p[0]) / h).fold(f64::INFINITY, f64::min);
    let near_end = BigRational::new(BigInt::from(1), BigInt::from(q)) - BigRational::new(BigInt::from(1), BigInt::from(1u64 << 52));
    let sup_w = w_at(q, weight, &near_end)?
        .max(w.iter().copied().fold(0.0, f64::max));
    let entries = lambdas
        .par_iter()
        .map(|&lambda| {
            let level = lambda.powu(q as u32);
            let count = w.iter().filter(|&&v| (C::new(v, 0.0) - level).norm() < tol).count();
            let measure = count as f64 / grid.n as f64;
            let bound = if min_slope > 0.0 { q as f64 * 2.0 * tol / min_slope + 2.0 / grid.n as f64 } else { f64::INFINITY };
            let predicted = if level.im.abs() >= tol {
                0.0
            } else {
                let rho = (tol * tol - level.im * level.im).sqrt();
                let lo = (level.re - rho).max(0.0);
                let hi = (level.re + rho).min(sup_w);
                if hi <= lo {
                    0.0
                } else {
                    let x_lo = if lo <= 0.0 { 0.0 } else { w_inverse(q, weight, lo)? };
                    let x_hi = if hi >= sup_w { 1.0 / q as f64 } else { w_inverse(q, weight, hi)? };
                    q as f64 * (x_hi - x_lo).max(0.0)
                }
            };
            Ok(EigenEntry { lambda, level, measure, bound, predicted })
        })
        .collect::<Result<_>>()?;
    Ok(EigenProbe { q, tol, grid_n: grid.n, min_slope, sup_w, entries })
}

/// `sup w^{1/q} = (q!/q^q)^{1/q}`, the spectral radius of the Bishop operator at `α = r/q`.
pub fn rational_spectral_radius(q: u64) -> Result<f64> {
    if q < 1 {
        return Err(Error::precondition("q must be >= 1"));
    }
    let qf = q as f64;
    let log_fact: f64 = (2..=q).map(|k| (k as f64).ln()).sum();
    Ok(((log_fact - qf * qf.ln()) / qf).exp())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexCheck {
    pub function: String,
    pub a: f64,
    pub b: f64,
    pub grid_n: usize,
    /// Sampled measure of `{x ∈ [a, b] : |1 − f(x)| > 1/2}`.
    pub measure: f64,
    /// `(b − a)/3 − 10/N`.
    pub bound: f64,
    pub preconditions_hold: bool,
    pub precondition_failures: Vec<String>,
    /// Whether the measure check ran (it is skipped when a precondition fails).
    pub checked: bool,
    pub pass: bool,
}

/// Checks `m({|1 − f| > 1/2}) ≥ (b − a)/3` for `f` increasing, convex,
/// non-negative on `[a, b]` with `f(a) = 0`; the hypotheses are verified by sampling.
pub fn convex_product_bound_check(f: &FuncExpr, a: f64, b: f64, grid: GridSpec) -> Result<ConvexCheck> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::precondition(format!("need 0 <= a < b <= 1, got [{a}, {b}]")));
    }
    let n = grid.n;
    let step = (b - a) / n as f64;
    let values: Vec<f64> = (0..n).into_par_iter().map(|i| f.evaluate_real(a + (i as f64 + 0.5) * step)).collect::<Result<_>>()?;
    let fa = f.evaluate_real(a)?;
    let scale = values.iter().map(|v| v.abs()).fold(fa.abs(), f64::max).max(1.0);
    let mut failures = Vec::new();
    if fa.abs() > 1e-12 * scale {
        failures.push(format!("f(a) = {fa} is not 0"));
    }
    if values.iter().any(|v| *v < -1e-12 * scale) {
        failures.push("f is negative somewhere".into());
    }
    if values.windows(2).any(|p| p[1] - p[0] < -1e-12 * scale) {
        failures.push("f is not increasing".into());
    }
    if values.windows(3).any(|p| p[2] - 2.0 * p[1] + p[0] < -1e-9 * scale) {
        failures.push("f is not convex".into());
    }
    let count = values.iter().filter(|v| (1.0 - **v).abs() > 0.5).count();
    let measure = count as f64 * step;
    let bound = (b - a) / 3.0 - 10.0 / n as f64;
    let preconditions_hold = failures.is_empty();
    Ok(ConvexCheck {
        function: f.to_string(),
        a,
        b,
        grid_n: n,
        measure,
        bound,
        preconditions_hold,
        precondition_failures: failures,
        checked: preconditions_hold,
        pass: preconditions_hold && measure >= bound,
    })
}

/// Seeded product of 2–4 increasing convex non-negative factors on a random
/// `[a, b] ⊂ [0, 1]`, the first of which vanishes at `a`.
pub fn random_convex_product(rng: &mut impl Rng) -> (FuncExpr, f64, f64) {
    let ai = rng.gen_range(0..15u32);
    let bi = rng.gen_range(ai + 3..=20u32);
    let a = format!("{ai}/20");
    let mut factors = Vec::new();
    let count = rng.gen_range(2..=4);
    for k in 0..count {
        let c = format!("{}/10", rng.gen_range(5..=60u32));
        let s = format!("{}/4", rng.gen_range(1..=12u32));
        let kind = if k == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..4) };
        factors.push(match kind {
            0 => format!("{c}*(x - {a})^{}", rng.gen_range(1..=3)),
            1 => format!("{c}*(exp({s}*(x - {a})) - 1)"),
            2 => format!("{c}*(x - {a}) + {}/10", rng.gen_range(0..=20u32)),
            _ => format!("{c}*exp({s}*(x - {a}))"),
        });
    }
    let text = factors.iter().map(|f| format!("({f})")).collect::<Vec<_>>().join("*");
    (parse_function(&text).expect("generated expression parses"), ai as f64 / 20.0, bi as f64 / 20.0)
}

pub fn random_convex_checks(count: usize, seed: u64, grid: GridSpec) -> Result<Vec<ConvexCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(FuncExpr, f64, f64)> = (0..count).map(|_| random_convex_product(&mut rng)).collect();
    cases.iter().map(|(f, a, b)| convex_product_bound_check(f, *a, *b, grid)).collect()
}

/// The bound for `|F_q|(x) = ∏_{k<q} {x + kα} / |λ|^q` on each interval between
/// consecutive points of `{0, 1} ∪ {1 − {kα} : 0 < k < q}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CocycleConvexCheck {
    pub q: u64,
    pub lambda_modulus: f64,
    pub grid_n: usize,
    pub measure: f64,
    /// `1/3 − 10/N`.
    pub bound: f64,
    pub intervals: usize,
    /// Intervals whose own measure falls below `length/3 − 2/N`.
    pub interval_failures: usize,
    pub min_interval_ratio: f64,
    pub pass: bool,
}

pub fn cocycle_convex_check(alpha: &AlphaValue, q: u64, lambda_modulus: f64, grid: GridSpec) -> Result<CocycleConvexCheck> {
    if q < 1 {
        return Err(Error::precondition("q must be >= 1"));
    }
    if !(lambda_modulus > 0.0) {
        return Err(Error::precondition("|lambda| must be positive"));
    }
    let spec = OperatorSpec::bishop(alpha.clone());
    let shift = q as f64 * lambda_modulus.ln();
    let inside: Vec<bool> = (0..grid.n)
        .into_par_iter()
        .map(|j| {
            let log_f = cocycle_at(&spec, q, &grid.point_exact(j))?.log_magnitude - shift;
            Ok((1.0 - log_f.exp()).abs() > 0.5)
        })
        .collect::<Result<_>>()?;
    let count = inside.iter().filter(|b| **b).count();
    let measure = count as f64 / grid.n as f64;
    let mut cuts: Vec<f64> = (1..q)
        .map(|k| {
            let v = frac_exact(&(alpha.value() * BigInt::from(k)));
            (BigRational::from_integer(1.into()) - v).to_f64().unwrap()
        })
        .collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let points = grid.points();
    let mut interval_failures = 0;
    let mut min_ratio = f64::INFINITY;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let len = hi - lo;
        let hits = points.iter().zip(&inside).filter(|(x, b)| **x >= lo && **x < hi && **b).count();
        let m = hits as f64 / grid.n as f64;
        if m < len / 3.0 - 2.0 / grid.n as f64 {
            interval_failures += 1;
        }
        if len > 4.0 / grid.n as f64 {
            min_ratio = min_ratio.min(m / len);
        }
    }
    let bound = 1.0 / 3.0 - 10.0 / grid.n as f64;
    Ok(CocycleConvexCheck {
        q,
        lambda_modulus,
        grid_n: grid.n,
        measure,
        bound,
        intervals: cuts.len() - 1,
        interval_failures,
        min_interval_ratio: min_ratio,
        pass: measure >= bound,
    })
}

/// `m({Re(a T^n f) > 0})` against `m({Re f > 0})`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvarianceResult {
    pub n: u64,
    pub a: f64,
    pub measure_f: f64,
    pub measure_iterate: f64,
    pub deviation: f64,
    /// `(breakpoints(n) + 2)/N`.
    pub tolerance: f64,
    pub breakpoints: usize,
    pub pass: bool,
}

pub fn supercyclicity_invariance(f: &FuncExpr, spec: &OperatorSpec, n: u64, a: f64, grid: GridSpec) -> Result<InvarianceResult> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::precondition("scale a must be positive"));
    }
    if !spec.is_bishop() {
        for (j, x) in grid.points().into_iter().enumerate() {
            let v = spec.weight.evaluate(x)?;
            if !(v.im == 0.0 && v.re > 0.0) {
                return Err(Error::precondition(format!("weight is not positive at grid node {j} (x = {x})")));
            }
        }
    }
    let f_breaks = f.indicator_breakpoints().len();
    // T^n f jumps where one of the n rotations wraps and where f's own breakpoints land
    let breakpoints = n as usize + f_breaks;
    let base = measure_positive_samples(&grid.sample(f)?, f_breaks);
    // scaled per node so that tiny cocycles keep their sign
    let scaled: Vec<C> = (0..grid.n)
        .into_par_iter()
        .map(|j| iterate_scaled_at(spec, f, n, &grid.point_exact(j)).map(|v| v * a))
        .collect::<Result<_>>()?;
    let moved = measure_positive_samples(&scaled, breakpoints);
    let deviation = (moved.value - base.value).abs();
    let tolerance = moved.tolerance;
    Ok(InvarianceResult { n, a, measure_f: base.value, measure_iterate: moved.value, deviation, tolerance, breakpoints, pass: deviation <= tolerance })
}

/// `‖T^n f − 1_{φ=0}‖_p^p` against `m({φ = 0})`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObstructionResult {
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    /// The sampled zero set is empty, so the check says nothing.
    pub vacuous: bool,
    pub pass: bool,
}

pub fn orbit_obstruction(spec: &OperatorSpec, f: &FuncExpr, n: u64, grid: GridSpec) -> Result<ObstructionResult> {
    if n == 0 {
        return Err(Error::precondition("the obstruction needs n >= 1"));
    }
    let phi = grid.sample(&spec.weight)?;
    let zero: Vec<bool> = phi.iter().map(|v| v.norm() == 0.0).collect();
    let rhs = zero.iter().filter(|z| **z).count() as f64 / grid.n as f64;
    let it = iterate(spec, f, n, grid)?;
    let diff: Vec<C> = it.values.iter().zip(&zero).map(|(v, z)| if *z { v - 1.0 } else { *v }).collect();
    let lhs = lp_norm_pow(&diff, spec.p)?;
    let tolerance = (spec.weight.indicator_breakpoints().len() + 2) as f64 / grid.n as f64;
    let vacuous = rhs == 0.0;
    Ok(ObstructionResult { n, lhs, rhs, tolerance, vacuous, pass: !vacuous && lhs >= rhs - tolerance })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnitDeltaRow {
    pub r: u64,
    pub q: u64,
    pub min_abs: f64,
    pub min_log_abs: f64,
    pub argmin: f64,
    /// `+1` if `Re Δ` rises across `[0, 1/q)`, `−1` if it falls.
    pub direction: i8,
    pub monotonicity_violations: usize,
    pub delta0: C,
    pub delta0_closed_form: C,
    pub delta0_agrees: bool,
}

/// `Δ(1, r/q)` for every coprime `r/q` with `q ≤ q_max` under the Bishop operator.
pub fn unit_delta_conjecture_probe(q_max: u64, samples: usize) -> Result<Vec<UnitDeltaRow>> {
    if q_max < 2 {
        return Err(Error::precondition("q_max must be >= 2"));
    }
    let one = FuncExpr::constant(1);
    let x = FuncExpr::identity();
    let pairs: Vec<(u64, u64)> =
        (2..=q_max).flat_map(|q| (1..q).filter(move |r| num_integer::gcd(*r, q) == 1).map(move |r| (r, q))).collect();
    pairs
        .par_iter()
        .map(|&(r, q)| {
            let profile = delta_profile(&one, &x, r, q, samples, 0.0)?;
            let re: Vec<f64> = profile.values().iter().map(|v| v.re).collect();
            let scale = re.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let direction: i8 = if re.last() >= re.first() { 1 } else { -1 };
            let monotonicity_violations =
                re.windows(2).filter(|p| (p[1] - p[0]) * f64::from(direction) < -MONOTONICITY_THRESHOLD * scale).count();
            let delta0 = delta_sample(&one, &x, r, q, 0.0)?.to_complex();
            let closed = delta_at_zero_closed_form(&one, &x, r, q)?;
            let delta0_agrees = (delta0 - closed).norm() <= 1e-9 * closed.norm().max(f64::MIN_POSITIVE);
            Ok(UnitDeltaRow {
                r,
                q,
                min_abs: profile.min_abs,
                min_log_abs: profile.min_log_abs,
                argmin: profile.argmin,
                direction,
                monotonicity_violations,
                delta0,
                delta0_closed_form: closed,
                delta0_agrees,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn func(s: &str) -> FuncExpr {
        parse_function(s).unwrap()
    }

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n).unwrap()
    }

    #[test]
    fn weight_examples() {
        let pw = periodic_weight(2, &FuncExpr::identity(), grid(8)).unwrap();
        assert_eq!(pw.w[0], 0.0);
        // x_4 = 4/16 = 0.25
        assert!((pw.w[4] - 0.1875).abs() < 1e-15);
        for q in 2..=10 {
            let pw = periodic_weight(q, &FuncExpr::identity(), grid(2000)).unwrap();
            assert!(pw.strictly_increasing && pw.min_forward_difference > 0.0, "q = {q}");
        }
    }

    #[test]
    fn iterate_q_times_is_multiplication_by_w() {
        let f = func("exp(x) + i*x");
        let wt = func("x + x^2");
        for (r, q) in [(1u64, 3u64), (2, 5)] {
            let spec = OperatorSpec::weighted(wt.clone(), AlphaValue::rational(r as i64, q as i64).unwrap());
            let g = grid(300);
            let it = iterate(&spec, &f, q, g).unwrap();
            for (j, v) in it.values.iter().enumerate() {
                let x = g.point_exact(j);
                let expected = w_at(q, &wt, &x).unwrap() * f.evaluate(g.point(j)).unwrap();
                assert!((v - expected).norm() <= 1e-12 * expected.norm());
            }
        }
    }

    #[test]
    fn eigen_examples() {
        let x = FuncExpr::identity();
        // root of x^2 + x/2 = 0.09
        let root = (-0.5 + (0.25f64 + 0.36).sqrt()) / 2.0;
        assert!((root - 0.1405).abs() < 1e-4);
        let p = eigen_levelset_probe(2, &x, &[C::new(0.3, 0.0), C::new(0.9, 0.0)], 1e-4, grid(20000)).unwrap();
        assert!(p.entries[0].measure > 0.0 && p.entries[0].measure <= p.entries[0].bound);
        assert!((p.entries[0].predicted - 2.0 * 2.0 * 1e-4 / (2.0 * root + 0.5)).abs() < 1e-5);
        assert_eq!(p.entries[1].measure, 0.0);
        assert_eq!(p.entries[1].predicted, 0.0);
    }

    #[test]
    fn spectral_radius_values() {
        assert_eq!(rational_spectral_radius(1).unwrap(), 1.0);
        assert!((rational_spectral_radius(3).unwrap() - (6.0f64 / 27.0).cbrt()).abs() < 1e-14);
        let mut previous = f64::INFINITY;
        for q in 2..=60u64 {
            let v = rational_spectral_radius(q).unwrap();
            assert!(v <= previous);
            previous = v;
            let qf = q as f64;
            let stirling = (-1.0f64).exp() * (std::f64::consts::TAU * qf).powf(0.5 / qf) * (1.0 / (12.0 * qf * qf)).exp();
            let rel = (v - stirling).abs() / v;
            assert!(rel < 1.0 / (300.0 * qf.powi(4)) + 1e-14, "q = {q}: {rel}");
        }
        assert!((rational_spectral_radius(50).unwrap() - (-1.0f64).exp()).abs() / (-1.0f64).exp() < 0.1);
    }

    #[test]
    fn convex_examples() {
        let g = grid(10000);
        let c = convex_product_bound_check(&FuncExpr::identity(), 0.0, 1.0, g).unwrap();
        assert!((c.measure - 0.5).abs() < 1e-3 && c.pass);
        let c = convex_product_bound_check(&func("0"), 0.0, 0.3, g).unwrap();
        assert!((c.measure - 0.3).abs() < 1e-12 && c.pass);
        let c = convex_product_bound_check(&func("x^2"), 0.0, 1.0, g).unwrap();
        assert!((c.measure - 0.5f64.sqrt()).abs() < 1e-3 && c.pass);
        let c = convex_product_bound_check(&func("sqrt(x)"), 0.0, 1.0, g).unwrap();
        assert!(!c.preconditions_hold && !c.checked);
    }

    #[test]
    fn random_products_satisfy_hypotheses() {
        for c in random_convex_checks(20, 7, grid(4000)).unwrap() {
            assert!(c.preconditions_hold, "{}: {:?}", c.function, c.precondition_failures);
            assert!(c.pass);
        }
    }

    #[test]
    fn invariance_examples() {
        let g = grid(20000);
        let spec = OperatorSpec::bishop(AlphaValue::rational(1, 3).unwrap());
        let r = supercyclicity_invariance(&func("1"), &spec, 5, 3.0, g).unwrap();
        assert_eq!(r.deviation, 0.0);
        let r = supercyclicity_invariance(&func("x - 1/2"), &spec, 7, 2.0, g).unwrap();
        assert!(r.deviation <= 5.0 / g.n as f64 && r.pass);
        assert!(supercyclicity_invariance(&func("x"), &spec, 1, 0.0, g).is_err());
    }

    #[test]
    fn obstruction_examples() {
        let g = grid(1000);
        let w = func("indicator(1/2, 1)*(x - 1/2)");
        let spec = OperatorSpec::weighted(w, AlphaValue::rational(1, 3).unwrap());
        let r = orbit_obstruction(&spec, &func("exp(x)"), 3, g).unwrap();
        assert!(r.pass && r.lhs >= 0.5 - r.tolerance);
        let r = orbit_obstruction(&spec, &func("0"), 2, g).unwrap();
        assert_eq!(r.lhs, r.rhs);
        assert!(orbit_obstruction(&spec, &func("1"), 0, g).is_err());
        let spec = OperatorSpec::bishop(AlphaValue::rational(1, 3).unwrap());
        assert!(orbit_obstruction(&spec, &func("1"), 1, g).unwrap().vacuous);
    }

    #[test]
    fn unit_delta_small() {
        let rows = unit_delta_conjecture_probe(3, 200).unwrap();
        let half = rows.iter().find(|r| r.q == 2).unwrap();
        assert!((half.min_abs - 0.5).abs() < 1e-14);
        assert_eq!(half.monotonicity_violations, 0);
        let third = rows.iter().find(|r| r.q == 3 && r.r == 1).unwrap();
        assert!(third.delta0_agrees);
        assert!((third.delta0.re + 4.0 / 27.0).abs() < 1e-15);
    }
}
