//! Builds polynomials `Q` with `‖Q(T) 1 − g‖_2 < ε` at `α = 1/3` and compares
//! each with the best approximation from the same number of orbit elements.

use bishop::cyclicity::{approx_polynomial, orbit_span_residual, ApproxConfig};
use bishop::{parse_function, AlphaValue, GridSpec, OperatorSpec};

fn main() -> bishop::Result<()> {
    let f = parse_function("1")?;
    let weight = parse_function("x")?;
    let spec = OperatorSpec::bishop(AlphaValue::rational(1, 3)?);
    let config = ApproxConfig::default();
    for target in ["x", "x^2", "sin(2*pi*x)", "cos(2*pi*x)"] {
        let g = parse_function(target)?;
        let rep = approx_polynomial(&f, &weight, 1, 3, &g, 0.05, &config)?;
        let oracle = orbit_span_residual(&f, &spec, &g, rep.degree + 1, GridSpec::new(rep.verification_grid_n)?)?;
        println!(
            "{target:<12} deg Q = {:>2}  residual {:.3e}  least squares over {} orbit elements {:.3e}",
            rep.degree,
            rep.verified_residual,
            rep.degree + 1,
            oracle.residual
        );
    }
    Ok(())
}
