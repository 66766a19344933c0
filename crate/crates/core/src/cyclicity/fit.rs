use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decompose::{CosetSystem, PeriodicComponents};
use super::polynomial::{chebyshev_row, chebyshev_to_monomial, PolynomialCoeffs};
use crate::error::{Error, Result};
use crate::expr::FuncExpr;
use crate::linalg::{irls, least_squares};

type C = Complex64;

/// Largest accepted ratio `Σ |c_m| s_max^m / max |Q_j(s_i)|` of the monomial form.
pub const MAX_AMPLIFICATION: f64 = 1e13;

/// Highest degree accepted by the fitter.
pub const FIT_DEGREE_LIMIT: usize = 256;

/// One component fit `h_j ≈ Q_j(w)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    pub j: usize,
    pub degree: usize,
    /// Monomial coefficients in `s = w(t)`.
    pub coeffs: PolynomialCoeffs,
    /// `‖(Q_j(w) − h_j) F_j‖_p` over `[0, 1/q)`, scaled to bound the contribution on `[0, 1]`.
    pub residual: f64,
    /// The same quantity evaluated in the Chebyshev basis.
    pub chebyshev_residual: f64,
    pub amplification: f64,
    /// Sampled range of `s`.
    pub s_range: (f64, f64),
}

struct FitData {
    s: Vec<f64>,
    lo: f64,
    hi: f64,
    u: Vec<f64>,
}

fn fit_data(sys: &CosetSystem) -> Result<FitData> {
    if sys.w.iter().any(|w| w.im != 0.0) {
        return Err(Error::precondition("periodic weight w must be real-valued for fitting"));
    }
    let s: Vec<f64> = sys.w.iter().map(|w| w.re).collect();
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        hi = lo + 1.0;
    }
    let u = s.iter().map(|v| (2.0 * v - lo - hi) / (hi - lo)).collect();
    Ok(FitData { s, lo, hi, u })
}

fn weighted_norm(diff: impl Iterator<Item = f64>, p: f64, total: usize) -> f64 {
    let v: Vec<f64> = diff.collect();
    let scale = v.iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = v.iter().map(|x| (x / scale).powf(p)).sum();
    scale * (sum / total as f64).powf(1.0 / p)
}

fn fit_one(data: &FitData, h: &[C], weights: &[f64], j: usize, degree: usize, p: f64, total: usize) -> Result<FitResult> {
    let rows: Vec<Vec<f64>> = data.u.iter().map(|&u| chebyshev_row(u, degree)).collect();
    let columns: Vec<Vec<C>> = (0..=degree)
        .map(|k| rows.iter().zip(weights).map(|(r, w)| C::new(r[k] * w, 0.0)).collect())
        .collect();
    let rhs: Vec<C> = h.iter().zip(weights).map(|(v, w)| v * w).collect();
    let cheb = if p == 2.0 { least_squares(&columns, &rhs)?.coeffs } else { irls(&columns, &rhs, p)?.coeffs };
    let cheb_values: Vec<C> = rows.iter().map(|r| r.iter().zip(&cheb).map(|(t, c)| c * t).sum()).collect();
    let chebyshev_residual =
        weighted_norm(cheb_values.iter().zip(h).zip(weights).map(|((q, h), w)| ((q - h) * w).norm()), p, total);

    let mut coeffs = PolynomialCoeffs::new(chebyshev_to_monomial(&cheb, data.lo, data.hi));
    let s_max = data.lo.abs().max(data.hi.abs());
    coeffs.prune(s_max, 1e-17);
    let values: Vec<C> = data.s.iter().map(|&s| coeffs.eval(C::new(s, 0.0))).collect();
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mass: f64 = coeffs.coeffs.iter().enumerate().map(|(m, c)| c.norm() * s_max.powi(m as i32)).sum();
    let amplification = if peak > 0.0 { mass / peak } else if mass == 0.0 { 1.0 } else { f64::INFINITY };
    if amplification > MAX_AMPLIFICATION {
        return Err(Error::numerical(format!(
            "ill-conditioned monomial basis at degree {degree} for component {j} (amplification {amplification:.3e}); \
             re-orthogonalize the basis or lower the degree"
        )));
    }
    let residual = weighted_norm(values.iter().zip(h).zip(weights).map(|((q, h), w)| ((q - h) * w).norm()), p, total);
    Ok(FitResult { j, degree, coeffs, residual, chebyshev_residual, amplification, s_range: (data.lo, data.hi) })
}

/// Fits every component at a fixed degree on a prepared coset system.
pub(crate) fn fit_system(sys: &CosetSystem, comps: &PeriodicComponents, degree: usize, p: f64) -> Result<Vec<FitResult>> {
    if degree > FIT_DEGREE_LIMIT {
        return Err(Error::precondition(format!("degree {degree} exceeds the cap {FIT_DEGREE_LIMIT}")));
    }
    let data = fit_data(sys)?;
    let total = sys.m * sys.q as usize;
    (0..sys.q as usize)
        .into_par_iter()
        .map(|j| fit_one(&data, &comps.h[j], &sys.column_weight(j), j, degree, p, total))
        .collect()
}

/// Fits one component at one degree on a prepared coset system.
pub(crate) fn fit_component(sys: &CosetSystem, h: &[C], weights: &[f64], j: usize, degree: usize, p: f64) -> Result<FitResult> {
    if degree > FIT_DEGREE_LIMIT {
        return Err(Error::precondition(format!("degree {degree} exceeds the cap {FIT_DEGREE_LIMIT}")));
    }
    fit_one(&fit_data(sys)?, h, weights, j, degree, p, sys.m * sys.q as usize)
}

/// Least-squares fits `h_j ≈ Q_j(w)` with `F_j`-weighted rows, for `p = 2`.
///
/// The fit runs in a Chebyshev basis on the sampled range of `s = w(t)` and
/// is converted to monomials in `s` afterwards.
pub fn fit_periodic_polynomials(
    components: &PeriodicComponents,
    f: &FuncExpr,
    weight: &FuncExpr,
    r: u64,
    q: u64,
    degree: usize,
) -> Result<Vec<FitResult>> {
    let sys = CosetSystem::build(f, weight, r, q, components.t.len() * q as usize)?;
    if sys.q != components.q || sys.m != components.t.len() {
        return Err(Error::precondition("components were sampled for a different fraction or grid"));
    }
    fit_system(&sys, components, degree, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclicity::decompose::decompose_target;
    use crate::expr::parse_function;
    use crate::numerics::GridSpec;

    fn func(s: &str) -> FuncExpr {
        parse_function(s).unwrap()
    }

    fn system() -> CosetSystem {
        CosetSystem::build(&func("1"), &FuncExpr::identity(), 1, 3, 600).unwrap()
    }

    #[test]
    fn constant_component() {
        let sys = system();
        let h = vec![C::new(2.5, 0.0); sys.m];
        let fit = fit_component(&sys, &h, &sys.column_weight(0), 0, 3, 2.0).unwrap();
        assert!(fit.residual < 1e-13);
        assert!((fit.coeffs.coeffs[0] - C::new(2.5, 0.0)).norm() < 1e-12);
        assert!(fit.coeffs.coeffs.iter().skip(1).all(|c| c.norm() < 1e-9));
    }

    #[test]
    fn identity_in_s() {
        let sys = system();
        let h = sys.w.clone();
        let fit = fit_component(&sys, &h, &sys.column_weight(1), 1, 4, 2.0).unwrap();
        assert!(fit.residual < 1e-13);
        assert!(fit.coeffs.coeffs[0].norm() < 1e-12);
        assert!((fit.coeffs.coeffs[1] - C::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn residual_non_increasing_in_degree() {
        let comps = decompose_target(&func("sin(2*pi*x)"), &func("1"), &FuncExpr::identity(), 1, 3, 1e6, GridSpec::new(900).unwrap()).unwrap();
        let mut previous = f64::INFINITY;
        for degree in 0..8 {
            let fits = fit_periodic_polynomials(&comps, &func("1"), &FuncExpr::identity(), 1, 3, degree).unwrap();
            let worst = fits.iter().map(|f| f.chebyshev_residual).fold(0.0, f64::max);
            assert!(worst <= previous * (1.0 + 1e-9) + 1e-15, "degree {degree}: {worst} > {previous}");
            previous = worst;
        }
        assert!(previous < 5e-3);
    }

    #[test]
    fn degree_cap() {
        let sys = system();
        let h = vec![C::new(1.0, 0.0); sys.m];
        assert!(fit_component(&sys, &h, &sys.column_weight(0), 0, FIT_DEGREE_LIMIT + 1, 2.0).is_err());
    }
}
