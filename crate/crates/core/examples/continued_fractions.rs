//! Continued fractions: exact expansions, Dirichlet bounds, gap levels and a
//! constructed α whose denominators jump past `ψ(q) = q^3`.

use bishop::diophantine::{build_alpha_with_gaps, cf_expand, check_dirichlet, gap_indices, parse_psi, RealInterval};
use num_bigint::BigInt;

fn main() -> bishop::Result<()> {
    let sqrt2 = RealInterval::quadratic(-1, 1, 2, 1, 256)?;
    let cf = cf_expand(&sqrt2, 12)?;
    println!("√2 − 1 = [{}]", cf.quotient_strings().join(", "));
    let midpoint = (&sqrt2.lo + &sqrt2.hi) / BigInt::from(2);
    println!("Dirichlet bound holds at every level: {}", check_dirichlet(&cf, &midpoint).iter().all(|c| c.holds));

    let decimal = cf_expand(&RealInterval::decimal("0.3183098861837907")?, 10)?;
    println!("0.3183098861837907 ± half an ulp of the last digit = [{}]", decimal.quotient_strings().join(", "));

    let psi = parse_psi("q^3")?;
    let alpha = build_alpha_with_gaps(psi.as_ref(), 3, &[BigInt::from(1)])?;
    alpha.check_invariants()?;
    let denominators: Vec<String> = alpha.denominators().iter().map(|q| q.to_string()).collect();
    println!("gapped α = [{}]", alpha.quotient_strings().join(", "));
    println!("denominators {}", denominators.join(", "));
    println!("gap levels {:?}", gap_indices(&alpha, psi.as_ref()).indices);
    Ok(())
}
