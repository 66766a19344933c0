//! The determinant criterion `Δ(f, r/q)` for rational rotations and the
//! constructive approximation `‖Q(T) f − g‖_p < ε`.

mod approx;
mod decompose;
mod delta;
mod fit;
mod polynomial;

pub use approx::{approx_polynomial, orbit_span_residual, polynomial_samples, ApproxConfig, ApproxReport, OrbitSpanResult};
pub use decompose::{decompose_target, PeriodicComponents};
pub use delta::{cyclicity_test, delta_at_zero_closed_form, delta_profile, delta_sample, DeltaProfile, Verdict};
pub use fit::{fit_periodic_polynomials, FitResult, FIT_DEGREE_LIMIT, MAX_AMPLIFICATION};
pub use polynomial::{assemble_polynomial, chebyshev_row, chebyshev_to_monomial, PolynomialCoeffs};

use crate::error::{Error, Result};
use crate::expr::FuncExpr;

/// Checks by sampling that a weight is real, vanishes at 0 and is strictly increasing.
pub fn check_weight(weight: &FuncExpr, samples: usize) -> Result<()> {
    if weight.evaluate(0.0)?.norm() != 0.0 {
        return Err(Error::precondition("weight must vanish at 0"));
    }
    let mut previous = f64::NEG_INFINITY;
    for k in 0..=samples {
        let x = k as f64 / samples as f64;
        let v = weight.evaluate(x)?;
        if v.im != 0.0 {
            return Err(Error::precondition(format!("weight is not real at x = {x}")));
        }
        if v.re <= previous {
            return Err(Error::precondition(format!("weight is not strictly increasing near x = {x}")));
        }
        previous = v.re;
    }
    Ok(())
}
