//! Structural probes: monotone periodic weights, level sets near `λ^q`, the
//! convex-product measure bound, sign-set invariance and `Δ(1, r/q)` minima.

use bishop::probes;
use bishop::{parse_function, AlphaValue, GridSpec, OperatorSpec};

fn main() -> bishop::Result<()> {
    let x = parse_function("x")?;
    let grid = GridSpec::new(20_000)?;

    for q in [2, 5, 10] {
        let pw = probes::periodic_weight(q, &x, grid)?;
        println!("w for q = {q:>2}: strictly increasing {}, min forward difference {:.3e}", pw.strictly_increasing, pw.min_forward_difference);
    }

    let eigen = probes::eigen_levelset_probe(3, &x, &probes::lambda_grid(2, 4), 1e-3, grid)?;
    for e in &eigen.entries {
        println!("λ = {:.3}: measure {:.2e}  bound {:.2e}", e.lambda, e.measure, e.bound);
    }

    for check in probes::random_convex_checks(4, 1, grid)? {
        println!("{}: measure {:.4} ≥ {:.4}: {}", check.function, check.measure, check.bound, check.pass);
    }

    let spec = OperatorSpec::bishop(AlphaValue::golden(40));
    let f = parse_function("cos(2*pi*x) - 0.3")?;
    for n in [1, 10, 100] {
        let r = probes::supercyclicity_invariance(&f, &spec, n, 1.0, grid)?;
        println!("n = {n:>3}: m(Re f > 0) = {:.5}, m(Re T^n f > 0) = {:.5}", r.measure_f, r.measure_iterate);
    }

    for row in probes::unit_delta_conjecture_probe(6, 256)? {
        println!("Δ(1, {}/{}): min |Δ| {:.3e} at t = {:.4}", row.r, row.q, row.min_abs, row.argmin);
    }
    Ok(())
}
