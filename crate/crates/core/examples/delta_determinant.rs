//! The determinant `Δ(f, r/q)(t)`: LU value against the closed form at `t = 0`,
//! and a profile that detects a non-cyclic vector.

use bishop::cyclicity::{cyclicity_test, delta_at_zero_closed_form, delta_sample};
use bishop::parse_function;

fn main() -> bishop::Result<()> {
    let one = parse_function("1")?;
    let x = parse_function("x")?;
    for (r, q) in [(1, 2), (1, 3), (2, 5), (3, 7)] {
        let lu = delta_sample(&one, &x, r, q, 0.0)?.to_complex();
        let closed = delta_at_zero_closed_form(&one, &x, r, q)?;
        println!("Δ(1, {r}/{q})(0): LU {:+.12e}  closed form {:+.12e}", lu.re, closed.re);
    }

    for text in ["1", "exp(x)", "indicator(1/4, 1/2) + indicator(3/4, 1)"] {
        let f = parse_function(text)?;
        let (verdict, profile) = cyclicity_test(&f, &x, 1, 2, 1000, 0.0)?;
        println!("{text:<42} α = 1/2: {verdict:?}, min |Δ| = {:.3e}, zero fraction {:.3}", profile.min_abs, profile.zero_fraction);
    }
    Ok(())
}
