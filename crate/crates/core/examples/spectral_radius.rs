//! Spectral radius of the Bishop operator: the closed form `(q!/q^q)^{1/q}` at
//! `α = 1/q` and the power-norm estimate at the golden rotation.

use bishop::operator::{power_norm, spectral_radius_estimate};
use bishop::probes::rational_spectral_radius;
use bishop::{AlphaValue, GridSpec, OperatorSpec};

fn main() -> bishop::Result<()> {
    let grid = GridSpec::new(20_000)?;
    println!(" q   ‖T^q‖^(1/q)   (q!/q^q)^(1/q)");
    for q in 2..=8u64 {
        let spec = OperatorSpec::bishop(AlphaValue::rational(1, q as i64)?);
        let pn = power_norm(&spec, q, grid)?;
        println!("{q:>2}   {:.8}    {:.8}", (pn.log_norm / q as f64).exp(), rational_spectral_radius(q)?);
    }

    let golden = OperatorSpec::bishop(AlphaValue::golden(40));
    for n in [50, 200, 800] {
        let est = spectral_radius_estimate(&golden, n, grid)?;
        println!("golden, n = {n:>3}: {:.6}  (e^-1 = {:.6})", est.estimate, (-1.0f64).exp());
    }
    Ok(())
}
