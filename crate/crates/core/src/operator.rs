//! Weighted translation operators `T f(x) = φ(x) f({x + α})` on `L^p([0, 1])`.
//!
//! Iterates use the closed form
//! `T^n f(x) = φ(x) φ({x + α}) ⋯ φ({x + (n−1)α}) f({x + nα})`
//! along an exact rotation walk; the weight product is carried as a mantissa
//! with a separate binary exponent so that it never underflows.

use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::FuncExpr;
use crate::linalg::LogComplex;
use crate::numerics::{lp_norm, AlphaValue, CircleWalk, GridSpec};

type C = Complex64;

/// Weight product `∏_{k<n} φ({x + kα})` in log-magnitude/phase form.
pub type CocycleProduct = LogComplex;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub weight: FuncExpr,
    pub alpha: AlphaValue,
    pub p: f64,
}

impl OperatorSpec {
    /// The Bishop operator `x f({x + α})` on `L^2`.
    pub fn bishop(alpha: AlphaValue) -> Self {
        OperatorSpec { weight: FuncExpr::identity(), alpha, p: 2.0 }
    }

    pub fn weighted(weight: FuncExpr, alpha: AlphaValue) -> Self {
        OperatorSpec { weight, alpha, p: 2.0 }
    }

    pub fn with_p(mut self, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::precondition(format!("exponent p = {p} must lie in (1, inf)")));
        }
        self.p = p;
        Ok(self)
    }

    pub fn is_bishop(&self) -> bool {
        self.weight.is_identity()
    }
}

/// Product of complex factors kept as `mantissa · 2^exponent`.
#[derive(Clone, Copy, Debug)]
struct Accumulator {
    mantissa: C,
    exponent: i32,
}

const RESCALE_LOW: f64 = 1e-150;
const RESCALE_HIGH: f64 = 1e150;

impl Accumulator {
    const ONE: Accumulator = Accumulator { mantissa: C { re: 1.0, im: 0.0 }, exponent: 0 };

    #[inline]
    fn mul(&mut self, z: C) {
        self.mantissa = cmul(self.mantissa, z);
        let m = self.mantissa.re.abs().max(self.mantissa.im.abs());
        if m != 0.0 && !(RESCALE_LOW..=RESCALE_HIGH).contains(&m) {
            let e = exponent_of(m);
            self.mantissa = C::new(ldexp(self.mantissa.re, -e), ldexp(self.mantissa.im, -e));
            self.exponent += e;
        }
    }

    #[inline]
    fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    fn to_log(self) -> CocycleProduct {
        if self.is_zero() {
            return LogComplex::ZERO;
        }
        let r = self.mantissa.norm();
        LogComplex {
            log_magnitude: r.ln() + self.exponent as f64 * std::f64::consts::LN_2,
            phase: self.mantissa / r,
        }
    }

    /// `product · z` as an ordinary double (underflow to zero is possible).
    fn times(self, z: C) -> C {
        let v = cmul(self.mantissa, z);
        if self.exponent == 0 {
            return v;
        }
        C::new(ldexp(v.re, self.exponent), ldexp(v.im, self.exponent))
    }
}

// Real operands stay real, matching expression evaluation.
#[inline]
fn cmul(a: C, b: C) -> C {
    if a.im == 0.0 && b.im == 0.0 {
        C::new(a.re * b.re, 0.0)
    } else {
        a * b
    }
}

fn exponent_of(m: f64) -> i32 {
    ((m.to_bits() >> 52) & 0x7ff) as i32 - 1023
}

/// `x · 2^e`, in steps so that intermediate powers stay representable.
pub(crate) fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= f64::from_bits(((1000 + 1023) as u64) << 52);
        e -= 1000;
    }
    while e < -1000 {
        x *= f64::from_bits(((-1000 + 1023) as u64) << 52);
        e += 1000;
    }
    x * f64::from_bits(((e + 1023) as u64) << 52)
}

/// Evaluates the weight, with the identity handled without the tree walk.
#[inline]
fn weight_at(weight: &FuncExpr, bishop: bool, y: f64) -> Result<C> {
    if bishop {
        Ok(C::new(y, 0.0))
    } else {
        weight.evaluate(y)
    }
}

/// `T^n f(x)` and its cocycle at an exact point `x ∈ [0, 1)`.
pub fn iterate_at(spec: &OperatorSpec, f: &FuncExpr, n: u64, x: &BigRational) -> Result<(C, CocycleProduct)> {
    let (acc, fv) = iterate_parts(spec, f, n, x)?;
    Ok((acc.times(fv), acc.to_log()))
}

/// `T^n f(x) · 2^{-e}` for a point-dependent `e`: the phase of `T^n f(x)` without underflow.
pub fn iterate_scaled_at(spec: &OperatorSpec, f: &FuncExpr, n: u64, x: &BigRational) -> Result<C> {
    let (acc, fv) = iterate_parts(spec, f, n, x)?;
    Ok(cmul(acc.mantissa, fv))
}

fn iterate_parts(spec: &OperatorSpec, f: &FuncExpr, n: u64, x: &BigRational) -> Result<(Accumulator, C)> {
    let bishop = spec.is_bishop();
    let mut walk = CircleWalk::rotation(x, &spec.alpha);
    let mut acc = Accumulator::ONE;
    for _ in 0..n {
        acc.mul(weight_at(&spec.weight, bishop, walk.value())?);
        if acc.is_zero() {
            return Ok((acc, C::new(0.0, 0.0)));
        }
        walk.advance();
    }
    let fv = f.evaluate(walk.value())?;
    Ok((acc, fv))
}

/// Log-magnitude of `|W_n(x)| = ∏_{k<n} |φ({x + kα})|` at an exact point.
pub fn cocycle_at(spec: &OperatorSpec, n: u64, x: &BigRational) -> Result<CocycleProduct> {
    let bishop = spec.is_bishop();
    let mut walk = CircleWalk::rotation(x, &spec.alpha);
    let mut acc = Accumulator::ONE;
    for _ in 0..n {
        acc.mul(weight_at(&spec.weight, bishop, walk.value())?);
        if acc.is_zero() {
            return Ok(LogComplex::ZERO);
        }
        walk.advance();
    }
    Ok(acc.to_log())
}

/// Grid samples of an operator image.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Samples {
    pub x: Vec<f64>,
    pub values: Vec<C>,
}

/// Iterate samples together with the cocycle at every node.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterateSamples {
    pub x: Vec<f64>,
    pub values: Vec<C>,
    pub cocycles: Vec<CocycleProduct>,
}

/// `T f` on the grid. Shares the iterate code path, so it agrees with `iterate(f, 1)` bit for bit.
pub fn apply(spec: &OperatorSpec, f: &FuncExpr, grid: GridSpec) -> Result<Samples> {
    let it = iterate(spec, f, 1, grid)?;
    Ok(Samples { x: it.x, values: it.values })
}

/// `T^n f` on the grid by the closed-form product.
pub fn iterate(spec: &OperatorSpec, f: &FuncExpr, n: u64, grid: GridSpec) -> Result<IterateSamples> {
    let pairs: Vec<(C, CocycleProduct)> = (0..grid.n)
        .into_par_iter()
        .map(|j| iterate_at(spec, f, n, &grid.point_exact(j)))
        .collect::<Result<_>>()?;
    let (values, cocycles) = pairs.into_iter().unzip();
    Ok(IterateSamples { x: grid.points(), values, cocycles })
}

/// `T* f(x) = φ({x − α}) f({x − α})` on the grid.
pub fn apply_adjoint(spec: &OperatorSpec, f: &FuncExpr, grid: GridSpec) -> Result<Samples> {
    let values = (0..grid.n)
        .into_par_iter()
        .map(|j| {
            let mut walk = CircleWalk::backward(&grid.point_exact(j), &spec.alpha);
            walk.advance();
            let y = walk.value();
            Ok(cmul(weight_at(&spec.weight, spec.is_bishop(), y)?, f.evaluate(y)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Samples { x: grid.points(), values })
}

/// Grid estimate of `‖T^n‖ = ess sup |W_n|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerNorm {
    pub n: u64,
    /// `log ‖T^n‖`, the larger of the two grid maxima.
    pub log_norm: f64,
    /// `exp(log_norm)`; may underflow to zero for large `n`.
    pub value: f64,
    pub log_norm_coarse: f64,
    pub log_norm_fine: f64,
    pub argmax: f64,
    /// The grids `N` and `2N` agree within 1%.
    pub converged: bool,
}

fn max_log_cocycle(spec: &OperatorSpec, n: u64, grid: GridSpec) -> Result<(f64, f64)> {
    let logs: Vec<f64> = (0..grid.n)
        .into_par_iter()
        .map(|j| cocycle_at(spec, n, &grid.point_exact(j)).map(|c| c.log_magnitude))
        .collect::<Result<_>>()?;
    let mut best = (f64::NEG_INFINITY, grid.point(0));
    for (j, v) in logs.into_iter().enumerate() {
        if v > best.0 {
            best = (v, grid.point(j));
        }
    }
    Ok(best)
}

/// `‖T^n‖` as the grid maximum of `|W_n|` on `N` and `2N` points (a lower bound for the ess sup).
pub fn power_norm(spec: &OperatorSpec, n: u64, grid: GridSpec) -> Result<PowerNorm> {
    if n == 0 {
        return Err(Error::precondition("power_norm needs n >= 1"));
    }
    let (coarse, _) = max_log_cocycle(spec, n, grid)?;
    let (fine, argmax_fine) = max_log_cocycle(spec, n, grid.refined())?;
    let log_norm = coarse.max(fine);
    let converged = if coarse == f64::NEG_INFINITY && fine == f64::NEG_INFINITY {
        true
    } else {
        (fine - coarse).abs() <= 0.01f64.ln_1p()
    };
    Ok(PowerNorm {
        n,
        log_norm,
        value: log_norm.exp(),
        log_norm_coarse: coarse,
        log_norm_fine: fine,
        argmax: argmax_fine,
        converged,
    })
}

/// Spectral radius estimate `‖T^n‖^{1/n}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub n: u64,
    pub estimate: f64,
    pub power_norm: PowerNorm,
}

pub fn spectral_radius_estimate(spec: &OperatorSpec, n: u64, grid: GridSpec) -> Result<SpectralEstimate> {
    let pn = power_norm(spec, n, grid)?;
    Ok(SpectralEstimate { n, estimate: (pn.log_norm / n as f64).exp(), power_norm: pn })
}

/// `T^k f(x)` for `k = 0..k_count` from a single rotation walk.
pub fn orbit_row(spec: &OperatorSpec, f: &FuncExpr, k_count: usize, x: &BigRational) -> Result<Vec<C>> {
    let bishop = spec.is_bishop();
    let mut walk = CircleWalk::rotation(x, &spec.alpha);
    let mut acc = Accumulator::ONE;
    let mut row = Vec::with_capacity(k_count);
    for k in 0..k_count {
        if acc.is_zero() {
            row.push(C::new(0.0, 0.0));
            continue;
        }
        let y = walk.value();
        row.push(acc.times(f.evaluate(y)?));
        if k + 1 < k_count {
            acc.mul(weight_at(&spec.weight, bishop, y)?);
            walk.advance();
        }
    }
    Ok(row)
}

/// Columns `T^k f` for `k = 0..k_count` sampled at the given exact points.
pub fn orbit_columns(spec: &OperatorSpec, f: &FuncExpr, k_count: usize, points: &[BigRational]) -> Result<Vec<Vec<C>>> {
    let rows: Vec<Vec<C>> = points.par_iter().map(|x| orbit_row(spec, f, k_count, x)).collect::<Result<_>>()?;
    Ok((0..k_count).map(|k| rows.iter().map(|r| r[k]).collect()).collect())
}

/// `Q(T) f = Σ_k c_k T^k f` at the given points, summed in ascending `k`.
pub fn apply_polynomial(spec: &OperatorSpec, f: &FuncExpr, coeffs: &[C], points: &[BigRational]) -> Result<Vec<C>> {
    let bishop = spec.is_bishop();
    points
        .par_iter()
        .map(|x| {
            let mut walk = CircleWalk::rotation(x, &spec.alpha);
            let mut acc = Accumulator::ONE;
            let mut sum = C::new(0.0, 0.0);
            for (k, c) in coeffs.iter().enumerate() {
                if acc.is_zero() {
                    break;
                }
                let y = walk.value();
                if c.re != 0.0 || c.im != 0.0 {
                    sum += c * acc.times(f.evaluate(y)?);
                }
                if k + 1 < coeffs.len() {
                    acc.mul(weight_at(&spec.weight, bishop, y)?);
                    walk.advance();
                }
            }
            Ok(sum)
        })
        .collect()
}

/// `‖Q(T) f − g‖_p` on the grid.
pub fn polynomial_residual(spec: &OperatorSpec, f: &FuncExpr, coeffs: &[C], g: &FuncExpr, grid: GridSpec) -> Result<f64> {
    let points: Vec<BigRational> = (0..grid.n).map(|j| grid.point_exact(j)).collect();
    let qf = apply_polynomial(spec, f, coeffs, &points)?;
    let diff = qf
        .iter()
        .enumerate()
        .map(|(j, v)| Ok(v - g.evaluate(grid.point(j))?))
        .collect::<Result<Vec<_>>>()?;
    lp_norm(&diff, spec.p)
}

/// `‖T^n f‖_p` on the grid.
pub fn iterate_norm(spec: &OperatorSpec, f: &FuncExpr, n: u64, grid: GridSpec) -> Result<f64> {
    lp_norm(&iterate(spec, f, n, grid)?.values, spec.p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_function;
    use proptest::prelude::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn bishop(r: i64, q: i64) -> OperatorSpec {
        OperatorSpec::bishop(AlphaValue::rational(r, q).unwrap())
    }

    fn func(s: &str) -> FuncExpr {
        parse_function(s).unwrap()
    }

    #[test]
    fn apply_examples() {
        let spec = bishop(1, 4);
        assert_eq!(iterate_at(&spec, &func("1"), 1, &ratio(1, 2)).unwrap().0, C::new(0.5, 0.0));
        let v = iterate_at(&spec, &func("x"), 1, &ratio(9, 10)).unwrap().0;
        assert!((v.re - 0.135).abs() < 1e-15);
        let sq = OperatorSpec::weighted(func("x^2"), AlphaValue::rational(1, 2).unwrap());
        let v = iterate_at(&sq, &func("1"), 1, &ratio(3, 10)).unwrap().0;
        assert!((v.re - 0.09).abs() < 1e-15);
    }

    #[test]
    fn iterate_examples() {
        let spec = bishop(1, 2);
        let v = iterate_at(&spec, &func("1"), 2, &ratio(1, 4)).unwrap().0;
        assert_eq!(v.re, 0.1875);
        let f = func("exp(x)");
        let x = ratio(3, 7);
        assert_eq!(iterate_at(&spec, &f, 0, &x).unwrap().0, f.evaluate(3.0 / 7.0).unwrap());
    }

    #[test]
    fn long_iterates_stay_in_log_form() {
        let spec = OperatorSpec::bishop(AlphaValue::golden(40));
        let (v, c) = iterate_at(&spec, &func("1"), 2000, &ratio(1, 3)).unwrap();
        assert_eq!(v, C::new(0.0, 0.0));
        assert!(c.log_magnitude.is_finite());
        assert!(c.log_magnitude < -1500.0);
    }

    #[test]
    fn apply_equals_first_iterate_bitwise() {
        let spec = OperatorSpec::weighted(func("x + i*x^2"), AlphaValue::golden(15));
        let f = func("sin(2*pi*x) + 1/3");
        let g = GridSpec::new(257).unwrap();
        let a = apply(&spec, &f, g).unwrap();
        let it = iterate(&spec, &f, 1, g).unwrap();
        for (u, v) in a.values.iter().zip(&it.values) {
            assert_eq!(u.re.to_bits(), v.re.to_bits());
            assert_eq!(u.im.to_bits(), v.im.to_bits());
        }
    }

    #[test]
    fn adjoint_examples() {
        let spec = bishop(1, 4);
        let g = GridSpec::new(10).unwrap();
        // x_0 = 0.05: {0.05 - 0.25} = 0.8
        let s = apply_adjoint(&spec, &func("1"), g).unwrap();
        assert!((s.values[0].re - 0.8).abs() < 1e-15);
        let sq = OperatorSpec::weighted(func("x^2"), AlphaValue::rational(1, 2).unwrap());
        let g = GridSpec::new(4).unwrap();
        // x_3 = 0.875: φ(0.375)
        let s = apply_adjoint(&sq, &func("1"), g).unwrap();
        assert_eq!(s.values[3].re, 0.375 * 0.375);
    }

    #[test]
    fn rational_q_step_is_multiplication_by_w() {
        let q = 5;
        let spec = OperatorSpec::weighted(func("x + x^3"), AlphaValue::rational(2, q).unwrap());
        let f = func("cos(3*x) + i*x");
        let grid = GridSpec::new(301).unwrap();
        let it = iterate(&spec, &f, q as u64, grid).unwrap();
        for j in 0..grid.n {
            let x = grid.point(j);
            let w: f64 = (0..q).map(|k| {
                let y = crate::numerics::frac_shift(&grid.point_exact(j), k, &AlphaValue::rational(1, q).unwrap());
                y + y * y * y
            }).product();
            let expected = f.evaluate(x).unwrap() * w;
            assert!((it.values[j] - expected).norm() <= 1e-12 * expected.norm());
        }
    }

    #[test]
    fn power_norm_examples() {
        let g = GridSpec::new(20_000).unwrap();
        let pn = power_norm(&bishop(1, 3), 3, g).unwrap();
        assert!((pn.value - 6.0 / 27.0).abs() < 1e-3);
        assert!(pn.converged);
        let pn = power_norm(&OperatorSpec::bishop(AlphaValue::golden(20)), 1, g).unwrap();
        assert!((pn.value - 1.0).abs() < 1e-4);
        let zero = OperatorSpec::bishop(AlphaValue::rational(0, 1).unwrap());
        let est = spectral_radius_estimate(&zero, 7, g).unwrap();
        assert!((est.estimate - 1.0).abs() < 1e-4);
        let est = spectral_radius_estimate(&bishop(1, 3), 6, g).unwrap();
        assert!((est.estimate - (6.0f64 / 27.0).powf(1.0 / 3.0)).abs() < 1e-3);
        assert!(power_norm(&bishop(1, 3), 0, g).is_err());
    }

    #[test]
    fn orbits_are_bounded() {
        let spec = OperatorSpec::bishop(AlphaValue::golden(25));
        let f = func("exp(x) - 2*x");
        let g = GridSpec::new(4001).unwrap();
        let base = iterate_norm(&spec, &f, 0, g).unwrap();
        for n in [1, 2, 5, 17, 60] {
            assert!(iterate_norm(&spec, &f, n, g).unwrap() <= base + 2.0 / g.n as f64);
        }
    }

    #[test]
    fn adjoint_duality() {
        let spec = OperatorSpec::weighted(func("x^2 + x"), AlphaValue::golden(18));
        let f = func("sin(5*x) + i");
        let h = func("indicator(1/5, 3/5) + x");
        let grid = GridSpec::new(40_000).unwrap();
        let tf = apply(&spec, &f, grid).unwrap().values;
        let ts = apply_adjoint(&spec, &h, grid).unwrap().values;
        let fs = grid.sample(&f).unwrap();
        let hs = grid.sample(&h).unwrap();
        let n = grid.n as f64;
        let lhs: C = tf.iter().zip(&hs).map(|(a, b)| a * b.conj()).sum::<C>() / n;
        let rhs: C = fs.iter().zip(&ts).map(|(a, b)| a * b.conj()).sum::<C>() / n;
        assert!((lhs - rhs).norm() < 20.0 / n);
    }

    #[test]
    fn polynomial_evaluation_matches_columns() {
        let spec = bishop(1, 3);
        let f = func("1 + x");
        let pts: Vec<BigRational> = (0..50).map(|j| ratio(2 * j + 1, 100)).collect();
        let cols = orbit_columns(&spec, &f, 4, &pts).unwrap();
        let coeffs = [C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(-2.0, 1.0), C::new(0.5, 0.0)];
        let vals = apply_polynomial(&spec, &f, &coeffs, &pts).unwrap();
        for (i, v) in vals.iter().enumerate() {
            let direct: C = (0..4).map(|k| coeffs[k] * cols[k][i]).sum();
            assert!((v - direct).norm() < 1e-14);
        }
        let (t2, _) = iterate_at(&spec, &f, 2, &pts[7]).unwrap();
        assert_eq!(cols[2][7], t2);
    }

    proptest! {
        #[test]
        fn norm_bounded_by_weight_sup(num in 1i64..40, q in 2i64..40, c in -3.0f64..3.0) {
            let spec = OperatorSpec::weighted(func("x^2"), AlphaValue::rational(num % q, q).unwrap());
            let f = parse_function(&format!("x - {}", (c * 100.0).round() / 100.0)).unwrap_or_else(|_| func("x"));
            let g = GridSpec::new(2000).unwrap();
            let tf = lp_norm(&apply(&spec, &f, g).unwrap().values, 2.0).unwrap();
            let nf = lp_norm(&g.sample(&f).unwrap(), 2.0).unwrap();
            prop_assert!(tf <= nf + 3.0 / g.n as f64);
        }

        #[test]
        fn accumulator_matches_plain_product(vals in prop::collection::vec(0.01f64..1.0, 1..40)) {
            let mut acc = Accumulator::ONE;
            let mut plain = 1.0f64;
            for v in &vals {
                acc.mul(C::new(*v, 0.0));
                plain *= v;
            }
            let log = acc.to_log().log_magnitude;
            prop_assert!((log - plain.ln()).abs() < 1e-10);
        }
    }
}
