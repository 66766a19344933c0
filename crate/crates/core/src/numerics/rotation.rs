use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::AlphaValue;

/// Fractional part of an exact rational.
pub fn frac_exact(v: &BigRational) -> BigRational {
    v - v.floor()
}

/// The exact rational value of a finite double.
pub fn exact_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite double")
}

/// `{x + n α}` computed exactly and rounded once.
pub fn frac_shift(x: &BigRational, n: i64, alpha: &AlphaValue) -> f64 {
    let shifted = x + alpha.value() * BigInt::from(n);
    frac_exact(&shifted).to_f64().unwrap()
}

const TINY_LIMIT: u64 = 1 << 53;

/// Exact walk `y, {y + β}, {y + 2β}, ...` on the circle.
///
/// Positions are kept as integer numerators over a common denominator `L`, so
/// the `k`-th point is exact and each reported value is `pos / L` rounded once.
#[derive(Clone, Debug)]
pub struct CircleWalk {
    state: WalkState,
}

#[derive(Clone, Debug)]
enum WalkState {
    // L below 2^53: both integers are exact doubles and IEEE division rounds correctly.
    Tiny { pos: u64, step: u64, den: u64, den_f: f64 },
    Big { pos: BigUint, step: BigUint, den: BigUint, value: f64 },
}

impl CircleWalk {
    /// Walk starting at `{start}` with increment `step` (any sign).
    pub fn new(start: &BigRational, step: &BigRational) -> Self {
        if let Some(walk) = Self::small(start, step) {
            return walk;
        }
        let start = frac_exact(start);
        let step = frac_exact(step);
        let den = start.denom().lcm(step.denom());
        let pos = start.numer() * (&den / start.denom());
        let inc = step.numer() * (&den / step.denom());
        match (den.to_u64(), pos.to_u64(), inc.to_u64()) {
            (Some(d), Some(p), Some(s)) if d < TINY_LIMIT => CircleWalk {
                state: WalkState::Tiny { pos: p, step: s, den: d, den_f: d as f64 },
            },
            _ => {
                let den = den.to_biguint().unwrap();
                let pos = pos.to_biguint().unwrap();
                let step = inc.to_biguint().unwrap();
                let value = big_value(&pos, &den);
                CircleWalk { state: WalkState::Big { pos, step, den, value } }
            }
        }
    }

    // Machine-integer path for the common case of small denominators.
    fn small(start: &BigRational, step: &BigRational) -> Option<Self> {
        let parts = |v: &BigRational| -> Option<(i128, i128)> { Some((v.numer().to_i64()? as i128, v.denom().to_i64()? as i128)) };
        let (sn, sd) = parts(start)?;
        let (tn, td) = parts(step)?;
        let den = sd.lcm(&td);
        if den >= TINY_LIMIT as i128 {
            return None;
        }
        let pos = (sn * (den / sd)).rem_euclid(den) as u64;
        let inc = (tn * (den / td)).rem_euclid(den) as u64;
        let den = den as u64;
        Some(CircleWalk { state: WalkState::Tiny { pos, step: inc, den, den_f: den as f64 } })
    }

    /// Walk over `{y + k α}`.
    pub fn rotation(start: &BigRational, alpha: &AlphaValue) -> Self {
        Self::new(start, alpha.value())
    }

    /// Walk over `{y − k α}`.
    pub fn backward(start: &BigRational, alpha: &AlphaValue) -> Self {
        Self::new(start, &-alpha.value())
    }

    /// Current point, correctly rounded.
    #[inline]
    pub fn value(&self) -> f64 {
        match &self.state {
            WalkState::Tiny { pos, den_f, .. } => *pos as f64 / den_f,
            WalkState::Big { value, .. } => *value,
        }
    }

    #[inline]
    pub fn advance(&mut self) {
        match &mut self.state {
            WalkState::Tiny { pos, step, den, .. } => {
                *pos += *step;
                if *pos >= *den {
                    *pos -= *den;
                }
            }
            WalkState::Big { pos, step, den, value } => {
                *pos += &*step;
                if *pos >= *den {
                    *pos -= &*den;
                }
                *value = big_value(pos, den);
            }
        }
    }

    /// Moves forward by `k` steps in one exact operation.
    pub fn advance_by(&mut self, k: u64) {
        match &mut self.state {
            WalkState::Tiny { pos, step, den, .. } => {
                let jump = (*step as u128 * k as u128 % *den as u128) as u64;
                *pos = ((*pos as u128 + jump as u128) % *den as u128) as u64;
            }
            WalkState::Big { pos, step, den, value } => {
                *pos = (&*pos + &*step * BigUint::from(k)) % &*den;
                *value = big_value(pos, den);
            }
        }
    }
}

fn big_value(pos: &BigUint, den: &BigUint) -> f64 {
    if pos.is_zero() {
        return 0.0;
    }
    BigRational::new_raw(BigInt::from(pos.clone()), BigInt::from(den.clone())).to_f64().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn frac_shift_examples() {
        let a = AlphaValue::rational(3, 4).unwrap();
        assert_eq!(frac_shift(&ratio(3, 10), 2, &a), 0.8);
        assert_eq!(frac_shift(&ratio(3, 10), 0, &a), 0.3);
        let half = AlphaValue::rational(1, 2).unwrap();
        assert_eq!(frac_shift(&ratio(1, 2), 1, &half), 0.0);
        assert_eq!(frac_shift(&ratio(1, 10), -1, &AlphaValue::rational(1, 4).unwrap()), 0.85);
    }

    #[test]
    fn walk_matches_frac_shift() {
        let alpha = AlphaValue::golden(30);
        let x = ratio(7, 22);
        let mut walk = CircleWalk::rotation(&x, &alpha);
        for n in 0..500 {
            assert_eq!(walk.value(), frac_shift(&x, n, &alpha), "step {n}");
            walk.advance();
        }
    }

    #[test]
    fn big_walk_matches_frac_shift() {
        let alpha = AlphaValue::golden(90);
        let x = exact_from_f64(0.123456789);
        let mut walk = CircleWalk::rotation(&x, &alpha);
        assert!(matches!(walk.state, WalkState::Big { .. }));
        for n in 0..50 {
            assert_eq!(walk.value(), frac_shift(&x, n, &alpha));
            walk.advance();
        }
        let mut jump = CircleWalk::rotation(&x, &alpha);
        jump.advance_by(50);
        assert_eq!(jump.value(), walk.value());
    }

    #[test]
    fn backward_walk() {
        let alpha = AlphaValue::rational(1, 4).unwrap();
        let mut walk = CircleWalk::backward(&ratio(1, 10), &alpha);
        walk.advance();
        assert_eq!(walk.value(), 0.85);
    }

    proptest! {
        #[test]
        fn rational_rotation_is_periodic(r in 1i64..50, q in 2i64..50, num in 0i64..1000, n in 0i64..200, k in 0i64..5) {
            let alpha = AlphaValue::rational(r % q, q).unwrap();
            let x = ratio(num, 1000);
            let (_, den) = (alpha.value().numer().clone(), alpha.value().denom().to_i64().unwrap());
            prop_assert_eq!(frac_shift(&x, n + den * k, &alpha), frac_shift(&x, n, &alpha));
        }

        #[test]
        fn frac_shift_in_unit_interval(num in 0i64..1000, n in -50i64..500, depth in 1usize..40) {
            let v = frac_shift(&ratio(num, 1000), n, &AlphaValue::golden(depth));
            prop_assert!((0.0..1.0).contains(&v));
        }

        #[test]
        fn advance_by_agrees_with_steps(num in 0i64..997, k in 0u64..300) {
            let alpha = AlphaValue::silver(12);
            let x = ratio(num, 997);
            let mut a = CircleWalk::rotation(&x, &alpha);
            for _ in 0..k { a.advance(); }
            let mut b = CircleWalk::rotation(&x, &alpha);
            b.advance_by(k);
            prop_assert_eq!(a.value(), b.value());
        }

        #[test]
        fn any_walk_matches_frac_shift(num in -5000i64..5000, den in 1i64..5000, k in 0i64..400, depth in 1usize..40, backward: bool) {
            let alpha = AlphaValue::golden(depth);
            let x = ratio(num, den);
            let mut walk = if backward { CircleWalk::backward(&x, &alpha) } else { CircleWalk::rotation(&x, &alpha) };
            for _ in 0..k { walk.advance(); }
            let n = if backward { -k } else { k };
            prop_assert_eq!(walk.value(), frac_shift(&x, n, &alpha));
        }
    }
}
