//! Exact rotation arithmetic, α values, and grid quadrature on `[0, 1]`.

mod alpha;
mod quadrature;
mod rotation;

pub use alpha::{parse_rational, AlphaValue};
pub(crate) use alpha::coprime_pair;
pub use quadrature::{lp_norm, lp_norm_pow, measure_positive_real, measure_positive_samples, GridSpec, MeasureEstimate};
pub use rotation::{exact_from_f64, frac_exact, frac_shift, CircleWalk};

/// Default working precision for decimal-to-continued-fraction expansions.
pub const DEFAULT_PRECISION_BITS: u32 = 256;

/// Working precision in bits, read from `BISHOP_PRECISION_BITS` (default 256).
pub fn precision_bits() -> u32 {
    std::env::var("BISHOP_PRECISION_BITS")
        .ok()
        .and_then(|v| v.trim().parse::<u32>().ok())
        .filter(|b| (16..=1 << 20).contains(b))
        .unwrap_or(DEFAULT_PRECISION_BITS)
}
