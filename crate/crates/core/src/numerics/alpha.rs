use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Rotation parameter α in `[0, 1]`.
///
/// Irrational parameters are represented by a finite continued fraction
/// `[0; a_1, ..., a_L]`; every computation uses its exact value `p_L/q_L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlphaValue {
    ExactRational(BigRational),
    CfTruncation { quotients: Vec<BigInt>, value: BigRational },
}

impl AlphaValue {
    pub fn from_ratio(value: BigRational) -> Result<Self> {
        if value.is_negative() || value > BigRational::one() {
            return Err(Error::precondition(format!("alpha = {value} outside [0, 1]")));
        }
        Ok(AlphaValue::ExactRational(value))
    }

    pub fn rational(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::precondition("alpha has zero denominator"));
        }
        Self::from_ratio(BigRational::new(numer.into(), denom.into()))
    }

    /// `[0; a_1, ..., a_L]` with every `a_k ≥ 1`.
    pub fn from_quotients(quotients: Vec<BigInt>) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::precondition("continued fraction needs at least one partial quotient"));
        }
        if quotients.iter().any(|a| a < &BigInt::one()) {
            return Err(Error::precondition("partial quotients must be >= 1"));
        }
        let value = quotients_value(&quotients);
        Ok(AlphaValue::CfTruncation { quotients, value })
    }

    /// Truncation of `(√5 − 1)/2 = [0; 1, 1, 1, ...]` at the given depth.
    pub fn golden(depth: usize) -> Self {
        Self::from_quotients(vec![BigInt::one(); depth.max(1)]).unwrap()
    }

    /// Truncation of `√2 − 1 = [0; 2, 2, 2, ...]` at the given depth.
    pub fn silver(depth: usize) -> Self {
        Self::from_quotients(vec![BigInt::from(2); depth.max(1)]).unwrap()
    }

    pub fn value(&self) -> &BigRational {
        match self {
            AlphaValue::ExactRational(v) => v,
            AlphaValue::CfTruncation { value, .. } => value,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value().to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_zero(&self) -> bool {
        self.value().is_zero()
    }

    /// `Some((r, q))` in lowest terms when the value has a machine-size denominator.
    pub fn small_fraction(&self) -> Option<(u64, u64)> {
        let v = self.value();
        Some((v.numer().to_u64()?, v.denom().to_u64()?))
    }

    /// Parses `3/4`, `0.25`, `golden`, `golden:40`, `silver:12` or `cf:1,2,3`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (head, tail) = match text.split_once(':') {
            Some((h, t)) => (h.trim(), Some(t.trim())),
            None => (text, None),
        };
        let depth = || -> Result<usize> {
            match tail {
                None => Ok(40),
                Some(t) => t
                    .parse::<usize>()
                    .ok()
                    .filter(|d| *d >= 1)
                    .ok_or_else(|| Error::precondition(format!("bad depth '{t}' in alpha '{text}'"))),
            }
        };
        match head {
            "golden" => Ok(Self::golden(depth()?)),
            "silver" => Ok(Self::silver(depth()?)),
            "cf" => {
                let list = tail.ok_or_else(|| Error::precondition("cf: needs a quotient list"))?;
                let quotients = list
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<BigInt>()
                            .map_err(|_| Error::precondition(format!("bad partial quotient '{s}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::from_quotients(quotients)
            }
            _ if tail.is_none() => Self::from_ratio(parse_rational(text)?),
            _ => Err(Error::precondition(format!("unrecognized alpha '{text}'"))),
        }
    }
}

fn quotients_value(quotients: &[BigInt]) -> BigRational {
    // q_n = a_n q_{n-1} + q_{n-2} with p_{-1} = 1, q_{-1} = 0, p_0 = 0, q_0 = 1.
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (BigInt::zero(), BigInt::one());
    for a in quotients {
        let p_next = a * &p + &p_prev;
        let q_next = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
    }
    BigRational::new(p, q)
}

/// Parses an exact rational from `p/q`, an integer, or a decimal such as `-2.5e-3`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::precondition(format!("cannot parse '{text}' as a rational number"));
    if let Some((n, d)) = text.split_once('/') {
        let n = parse_decimal(n.trim()).ok_or_else(bad)?;
        let d = parse_decimal(d.trim()).ok_or_else(bad)?;
        if d.is_zero() {
            return Err(Error::precondition(format!("zero denominator in '{text}'")));
        }
        return Ok(n / d);
    }
    parse_decimal(text).ok_or_else(bad)
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    if exponent.abs() > 10_000 {
        return None;
    }
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

impl fmt::Display for AlphaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaValue::ExactRational(v) => {
                if v.denom().is_one() {
                    write!(f, "{}", v.numer())
                } else {
                    write!(f, "{}/{}", v.numer(), v.denom())
                }
            }
            AlphaValue::CfTruncation { quotients, .. } => {
                write!(f, "cf:")?;
                for (i, a) in quotients.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::str::FromStr for AlphaValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlphaValue::parse(s)
    }
}

impl Serialize for AlphaValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AlphaValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        AlphaValue::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Reduced `(r, q)` with `0 < r < q`, for the rational-rotation routines.
pub(crate) fn coprime_pair(r: u64, q: u64) -> Result<(u64, u64)> {
    if q < 2 || r == 0 || r >= q {
        return Err(Error::precondition(format!("need 0 < r < q with q >= 2, got r = {r}, q = {q}")));
    }
    let g = r.gcd(&q);
    let (r, q) = (r / g, q / g);
    if q < 2 {
        return Err(Error::precondition("r/q reduces to an integer"));
    }
    Ok((r, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rationals_are_reduced_and_bounded() {
        let a = AlphaValue::rational(6, 8).unwrap();
        assert_eq!(a.value(), &ratio(3, 4));
        assert_eq!(a.to_string(), "3/4");
        assert!(AlphaValue::rational(5, 4).is_err());
        assert!(AlphaValue::rational(-1, 4).is_err());
        assert!(AlphaValue::rational(0, 1).unwrap().is_zero());
    }

    #[test]
    fn golden_is_fibonacci_ratio() {
        let g = AlphaValue::golden(10);
        assert_eq!(g.value(), &ratio(55, 89));
        assert!((AlphaValue::golden(40).to_f64() - 0.6180339887498949).abs() < 1e-15);
    }

    #[test]
    fn parse_forms() {
        assert_eq!(AlphaValue::parse("355/1000").unwrap().value(), &ratio(71, 200));
        assert_eq!(AlphaValue::parse("0.25").unwrap().value(), &ratio(1, 4));
        assert_eq!(AlphaValue::parse("cf:1,3").unwrap().value(), &ratio(3, 4));
        assert_eq!(AlphaValue::parse("golden:3").unwrap().value(), &ratio(2, 3));
        assert_eq!(AlphaValue::parse("silver:2").unwrap().value(), &ratio(2, 5));
        assert!(AlphaValue::parse("cf:1,0").is_err());
        assert!(AlphaValue::parse("banana").is_err());
        assert!(AlphaValue::parse("1/0").is_err());
    }

    #[test]
    fn display_round_trips() {
        for text in ["3/4", "0", "1", "cf:1,1,2,7"] {
            let a = AlphaValue::parse(text).unwrap();
            assert_eq!(AlphaValue::parse(&a.to_string()).unwrap(), a);
        }
    }

    #[test]
    fn coprime_reduction() {
        assert_eq!(coprime_pair(2, 6).unwrap(), (1, 3));
        assert!(coprime_pair(3, 3).is_err());
        assert!(coprime_pair(2, 4).is_ok());
        assert!(coprime_pair(0, 4).is_err());
    }
}
