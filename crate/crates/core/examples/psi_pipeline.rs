//! From rational polynomial banks to a verified irrational rotation:
//! banks at `q = 2, 3`, the continuity radii `δ(q)`, `ψ(q) = 1/(q δ(q))`, and
//! the residuals at an α whose convergents satisfy the gap condition.

use bishop::psi::{verify_irrational_cyclicity, PsiConfig, TargetFamily};
use bishop::parse_function;

fn main() -> bishop::Result<()> {
    let f = parse_function("1")?;
    let weight = parse_function("x")?;
    let targets = TargetFamily::default().truncated(3)?;
    let rep = verify_irrational_cyclicity(&f, &weight, &targets, &[2, 3], 0.1, 2, &PsiConfig::default())?;

    for (q, entry) in &rep.psi_table.entries {
        println!("q = {q}: δ = {}  ψ = {}", entry.delta, entry.psi);
    }
    println!("α = [{}] ≈ {:.12}", rep.alpha.quotient_strings().join(", "), rep.alpha_approx);
    println!("gap precondition: {}", rep.gap_precondition);
    for t in &rep.targets {
        println!(
            "{:<14} q = {}  rational {:.3e}  at α {:.3e}  bound {:.3e}  {}",
            t.target,
            t.q,
            t.rational_residual,
            t.alpha_residual,
            t.bound,
            if t.passed { "ok" } else { "FAILED" }
        );
    }
    Ok(())
}
