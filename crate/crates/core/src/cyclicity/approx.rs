use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::decompose::CosetSystem;
use super::delta::{cyclicity_test, rational_spec, Verdict};
use super::fit::{fit_component, FitResult};
use super::polynomial::{assemble_polynomial, PolynomialCoeffs};
use super::check_weight;
use crate::error::{Error, Result};
use crate::expr::FuncExpr;
use crate::linalg::{irls, least_squares, residual_vector};
use crate::numerics::{lp_norm, GridSpec};
use crate::operator::{apply_polynomial, orbit_columns, OperatorSpec};

type C = Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxConfig {
    /// Approximate size of the construction grid.
    pub grid_n: usize,
    pub p: f64,
    /// Largest degree tried for each component polynomial.
    pub degree_cap: usize,
    /// Samples per `[0, 1/q)` for the cyclicity precheck.
    pub cyclicity_samples: usize,
    pub cyclicity_tol: f64,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig { grid_n: 1 << 14, p: 2.0, degree_cap: 64, cyclicity_samples: 2048, cyclicity_tol: 0.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxReport {
    pub r: u64,
    pub q: u64,
    pub epsilon: f64,
    pub p: f64,
    #[serde(rename = "Q")]
    pub polynomial: PolynomialCoeffs,
    pub degree: usize,
    pub component_degrees: Vec<usize>,
    pub components: Vec<FitResult>,
    /// Truncation index `n` of `Ω_n`.
    pub truncation_n: f64,
    pub omega_fraction: f64,
    /// `‖g − h‖_p` where `h` is `g` set to zero on `Ω_n`.
    pub truncation_residual: f64,
    /// Per-component target `ε/(2q)`.
    pub component_target: f64,
    pub construction_grid_n: usize,
    /// `‖Q(T) f − g‖_p` on the construction grid.
    pub construction_residual: f64,
    pub verification_grid_n: usize,
    /// `‖Q(T) f − g‖_p` on a grid twice as fine, with exact rotations.
    pub verified_residual: f64,
    pub meets_epsilon: bool,
    pub flagged_samples: usize,
    pub reconstruction_error: f64,
    pub notes: Vec<String>,
}

/// Degrees tried for each component: 0, 1, 2, 4, 8, ... up to the cap.
fn degree_schedule(cap: usize) -> Vec<usize> {
    let mut out = vec![0];
    let mut d = 1;
    while d < cap {
        out.push(d);
        d *= 2;
    }
    if cap > 0 {
        out.push(cap);
    }
    out
}

/// Builds `Q` with `‖Q(T_{φ, r/q}) f − g‖_p < ε`.
///
/// `g` is zeroed on `Ω_n` for the smallest `n ∈ {2, 4, 8, …}` with
/// truncation error below `ε/2`, split into `1/q`-periodic components, and each
/// component is fitted in `s = w(t)` until its weighted residual is below `ε/(2q)`.
pub fn approx_polynomial(f: &FuncExpr, weight: &FuncExpr, r: u64, q: u64, g: &FuncExpr, eps: f64, config: &ApproxConfig) -> Result<ApproxReport> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::precondition("epsilon must be positive"));
    }
    let (spec, r, q) = rational_spec(weight, r, q)?;
    let spec = spec.with_p(config.p)?;
    check_weight(weight, 1024)?;
    let (verdict, _) = cyclicity_test(f, weight, r, q, config.cyclicity_samples, config.cyclicity_tol)?;
    if verdict != Verdict::Cyclic {
        return Err(Error::precondition(format!("cyclicity test for {r}/{q} returned {verdict:?}")));
    }
    let sys = CosetSystem::build(f, weight, r, q, config.grid_n)?;
    let grid = sys.grid();
    let target = grid.sample(g)?;
    let mut notes = Vec::new();

    // truncation: smallest n = 2^k with ‖g 1_Ω‖ < ε/2
    let mut n = 2.0f64;
    let (truncation_residual, truncation_n) = loop {
        let omega = sys.omega(n);
        let cut: Vec<C> = (0..grid.n).map(|idx| if omega[idx % sys.m] { target[idx] } else { C::new(0.0, 0.0) }).collect();
        let res = lp_norm(&cut, spec.p)?;
        if res < eps / 2.0 {
            break (res, n);
        }
        if n > 1e300 {
            return Err(Error::numerical("truncation set does not shrink"));
        }
        n *= 2.0;
    };
    let comps = sys.decompose(&target, truncation_n);
    if comps.flagged_samples > 0 {
        notes.push(format!("{} singular samples outside the truncation set were excluded", comps.flagged_samples));
    }

    let component_target = eps / (2.0 * q as f64);
    let schedule = degree_schedule(config.degree_cap);
    let mut fits = Vec::with_capacity(q as usize);
    for j in 0..q as usize {
        let weights = sys.column_weight(j);
        let mut best: Option<FitResult> = None;
        for &degree in &schedule {
            match fit_component(&sys, &comps.h[j], &weights, j, degree, spec.p) {
                Ok(fit) => {
                    let done = fit.residual < component_target;
                    if best.as_ref().is_none_or(|b| fit.residual < b.residual) {
                        best = Some(fit);
                    }
                    if done {
                        break;
                    }
                }
                Err(e) => {
                    notes.push(format!("component {j}: stopped escalating at degree {degree}: {e}"));
                    break;
                }
            }
        }
        let best = best.ok_or_else(|| Error::numerical(format!("no usable fit for component {j}")))?;
        if best.residual >= component_target {
            notes.push(format!(
                "component {j}: best residual {:.3e} at degree {} misses target {component_target:.3e}",
                best.residual, best.degree
            ));
        }
        fits.push(best);
    }

    // components that are rounding noise next to the others are dropped
    let mass = |f: &FitResult| {
        let s_max = f.s_range.0.abs().max(f.s_range.1.abs());
        f.coeffs.coeffs.iter().enumerate().map(|(m, c)| c.norm() * s_max.powi(m as i32)).sum::<f64>()
    };
    let total_mass: f64 = fits.iter().map(mass).sum();
    for fit in fits.iter_mut() {
        if mass(fit) < 1e-13 * total_mass {
            fit.coeffs = PolynomialCoeffs::default();
        }
    }
    let parts: Vec<PolynomialCoeffs> = fits.iter().map(|f| f.coeffs.clone()).collect();
    let polynomial = assemble_polynomial(&parts, q as usize)?;
    let construction_residual = residual_on(&spec, f, &polynomial, g, grid)?;
    let fine = GridSpec::new(2 * grid.n)?;
    let verified_residual = residual_on(&spec, f, &polynomial, g, fine)?;
    let meets_epsilon = verified_residual < eps;
    if !meets_epsilon {
        notes.push(format!("verified residual {verified_residual:.3e} does not meet epsilon {eps}"));
    }
    Ok(ApproxReport {
        r,
        q,
        epsilon: eps,
        p: spec.p,
        degree: polynomial.degree(),
        component_degrees: fits.iter().map(|f| f.coeffs.degree()).collect(),
        polynomial,
        components: fits,
        truncation_n,
        omega_fraction: comps.omega_fraction,
        truncation_residual,
        component_target,
        construction_grid_n: grid.n,
        construction_residual,
        verification_grid_n: fine.n,
        verified_residual,
        meets_epsilon,
        flagged_samples: comps.flagged_samples,
        reconstruction_error: comps.reconstruction_error,
        notes,
    })
}

fn residual_on(spec: &OperatorSpec, f: &FuncExpr, poly: &PolynomialCoeffs, g: &FuncExpr, grid: GridSpec) -> Result<f64> {
    crate::operator::polynomial_residual(spec, f, &poly.coeffs, g, grid)
}

/// Best approximation of `g` from `span{f, T f, …, T^{K−1} f}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitSpanResult {
    pub k: usize,
    pub residual: f64,
    pub rank: usize,
    pub rank_deficient: bool,
    pub warning: Option<String>,
    pub coeffs: Vec<C>,
}

/// Direct least squares over the first `K` orbit elements on the grid (IRLS for `p ≠ 2`).
pub fn orbit_span_residual(f: &FuncExpr, spec: &OperatorSpec, g: &FuncExpr, k: usize, grid: GridSpec) -> Result<OrbitSpanResult> {
    if k < 1 {
        return Err(Error::precondition("K must be >= 1"));
    }
    let points: Vec<BigRational> = (0..grid.n).map(|j| grid.point_exact(j)).collect();
    let columns = orbit_columns(spec, f, k, &points)?;
    let b = grid.sample(g)?;
    let (coeffs, rank) = if spec.p == 2.0 {
        let sol = least_squares(&columns, &b)?;
        (sol.coeffs, sol.rank)
    } else {
        let sol = irls(&columns, &b, spec.p)?;
        (sol.coeffs, sol.rank)
    };
    let residual = lp_norm(&residual_vector(&columns, &coeffs, &b), spec.p)?;
    let rank_deficient = rank < k;
    let warning = rank_deficient.then(|| format!("orbit columns have numerical rank {rank} < {k}; dependent columns were dropped"));
    Ok(OrbitSpanResult { k, residual, rank, rank_deficient, warning, coeffs })
}

/// `Q(T) f` on a grid, for callers that want the samples themselves.
pub fn polynomial_samples(spec: &OperatorSpec, f: &FuncExpr, poly: &PolynomialCoeffs, grid: GridSpec) -> Result<Vec<C>> {
    let points: Vec<BigRational> = (0..grid.n).map(|j| grid.point_exact(j)).collect();
    apply_polynomial(spec, f, &poly.coeffs, &points)
}
