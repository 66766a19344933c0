//! Continued fractions `[0; a_1, a_2, ...]`, convergents, Dirichlet and Liouville
//! checks, and gap conditions `q_{n+1} > ψ(q_n)`. All comparisons are exact.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::AlphaValue;

/// Partial quotients with their convergents `p_n/q_n`, `n = 0..=L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    quotients: Vec<BigInt>,
    p: Vec<BigInt>,
    q: Vec<BigInt>,
}

impl ContinuedFraction {
    /// `[0; a_1, ..., a_L]`; every `a_k ≥ 1`.
    pub fn from_quotients(quotients: Vec<BigInt>) -> Result<Self> {
        let mut cf = ContinuedFraction { quotients: vec![], p: vec![BigInt::zero()], q: vec![BigInt::one()] };
        for a in quotients {
            cf.push(a)?;
        }
        Ok(cf)
    }

    /// Appends `a_{L+1}` and extends the convergents by the recurrence.
    pub fn push(&mut self, a: BigInt) -> Result<()> {
        if a < BigInt::one() {
            return Err(Error::precondition(format!("partial quotient {a} < 1")));
        }
        let n = self.quotients.len();
        let (p_prev2, q_prev2) = if n == 0 { (BigInt::one(), BigInt::zero()) } else { (self.p[n - 1].clone(), self.q[n - 1].clone()) };
        let p_next = &a * &self.p[n] + p_prev2;
        let q_next = &a * &self.q[n] + q_prev2;
        self.quotients.push(a);
        self.p.push(p_next);
        self.q.push(q_next);
        Ok(())
    }

    /// Depth `L`.
    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    /// `a_1..a_L`.
    pub fn quotients(&self) -> &[BigInt] {
        &self.quotients
    }

    pub fn p(&self, n: usize) -> &BigInt {
        &self.p[n]
    }

    pub fn q(&self, n: usize) -> &BigInt {
        &self.q[n]
    }

    pub fn denominators(&self) -> &[BigInt] {
        &self.q
    }

    pub fn convergent(&self, n: usize) -> BigRational {
        BigRational::new(self.p[n].clone(), self.q[n].clone())
    }

    /// Exact value `p_L/q_L`.
    pub fn value(&self) -> BigRational {
        self.convergent(self.len())
    }

    pub fn to_alpha(&self) -> Result<AlphaValue> {
        AlphaValue::from_quotients(self.quotients.clone())
    }

    /// Quotients as decimal strings, led by `a_0 = 0`.
    pub fn quotient_strings(&self) -> Vec<String> {
        std::iter::once("0".to_string()).chain(self.quotients.iter().map(|a| a.to_string())).collect()
    }

    /// Recurrence, coprimality, determinant identity and monotonicity, checked exactly.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |what: String| Err(Error::numerical(format!("continued fraction invariant violated: {what}")));
        let (mut p2, mut q2) = (BigInt::one(), BigInt::zero());
        for n in 1..=self.len() {
            let a = &self.quotients[n - 1];
            if self.p[n] != a * &self.p[n - 1] + &p2 || self.q[n] != a * &self.q[n - 1] + &q2 {
                return fail(format!("recurrence at n = {n}"));
            }
            if !self.p[n].gcd(&self.q[n]).is_one() {
                return fail(format!("gcd(p_{n}, q_{n}) != 1"));
            }
            // p_n q_{n-1} - p_{n-1} q_n = (-1)^{n-1}
            let det = &self.p[n] * &self.q[n - 1] - &self.p[n - 1] * &self.q[n];
            let expected = if n % 2 == 1 { BigInt::one() } else { -BigInt::one() };
            if det != expected {
                return fail(format!("determinant identity at n = {n}"));
            }
            if self.q[n] < self.q[n - 1] || (n >= 2 && self.q[n] <= self.q[n - 1]) {
                return fail(format!("denominators not increasing at n = {n}"));
            }
            p2 = self.p[n - 1].clone();
            q2 = self.q[n - 1].clone();
        }
        Ok(())
    }
}

impl Serialize for ContinuedFraction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.quotient_strings().serialize(s)
    }
}

/// A real number known to lie in `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RealInterval {
    pub fn exact(v: BigRational) -> Self {
        RealInterval { lo: v.clone(), hi: v }
    }

    /// A decimal literal read as `value ± 1/2` unit in its last digit.
    pub fn decimal(text: &str) -> Result<Self> {
        let text = text.trim();
        let v = crate::numerics::parse_rational(text)?;
        let mantissa = text.split(['e', 'E']).next().unwrap_or(text);
        let exponent: i64 = text.split(['e', 'E']).nth(1).and_then(|e| e.parse().ok()).unwrap_or(0);
        let digits = mantissa.split_once('.').map_or(0, |(_, f)| f.len() as i64) - exponent;
        let ten = BigInt::from(10);
        let ulp = if digits >= 0 {
            BigRational::new(BigInt::one(), num_traits::pow(ten, digits as usize))
        } else {
            BigRational::from_integer(num_traits::pow(ten, (-digits) as usize))
        };
        let half = ulp / BigInt::from(2);
        Ok(RealInterval { lo: &v - &half, hi: v + half })
    }

    /// `(a + b √c)/d` enclosed to `bits` binary digits.
    pub fn quadratic(a: i64, b: i64, c: u64, d: i64, bits: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::precondition("zero denominator"));
        }
        let scale = BigUint::one() << bits;
        // floor(√(c · 4^bits)) ≤ 2^bits √c < that + 1
        let root = (BigUint::from(c) * &scale * &scale).sqrt();
        let root = BigInt::from(root);
        let scale = BigInt::from(scale);
        let lo_root = BigRational::new(root.clone(), scale.clone());
        let hi_root = if (&root * &root) == BigInt::from(c) * &scale * &scale {
            lo_root.clone()
        } else {
            BigRational::new(root + 1, scale)
        };
        let bb = BigRational::from_integer(b.into());
        let (r1, r2) = (&bb * &lo_root, &bb * &hi_root);
        let (lo_b, hi_b) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let a = BigRational::from_integer(a.into());
        let d = BigRational::from_integer(d.into());
        let (x, y) = ((&a + lo_b) / &d, (a + hi_b) / &d);
        Ok(if x <= y { RealInterval { lo: x, hi: y } } else { RealInterval { lo: y, hi: x } })
    }

    /// `(√5 − 1)/2` at the given precision.
    pub fn golden_conjugate(bits: u32) -> Self {
        Self::quadratic(-1, 1, 5, 2, bits).unwrap()
    }
}

/// Expands `α ∈ (0, 1)` up to `depth` quotients.
///
/// Exact inputs stop early at their terminating expansion. Interval inputs
/// emit a quotient only when both endpoints agree on it; otherwise the
/// expansion fails with a precision error.
pub fn cf_expand(alpha: &RealInterval, depth: usize) -> Result<ContinuedFraction> {
    if depth == 0 {
        return Err(Error::precondition("depth must be >= 1"));
    }
    let zero = BigRational::zero();
    let one = BigRational::one();
    if alpha.lo > alpha.hi || alpha.lo <= zero || alpha.hi >= one {
        return Err(Error::precondition(format!("alpha must lie in (0, 1), got [{}, {}]", alpha.lo, alpha.hi)));
    }
    let mut cf = ContinuedFraction::from_quotients(vec![])?;
    if alpha.lo == alpha.hi {
        let mut x = alpha.lo.clone();
        while cf.len() < depth && !x.is_zero() {
            let inv = x.recip();
            let a = inv.floor();
            cf.push(a.to_integer())?;
            x = inv - a;
        }
        return Ok(cf);
    }
    // Reciprocal is decreasing, so the endpoints swap roles at each step.
    let (mut lo, mut hi) = (alpha.lo.clone(), alpha.hi.clone());
    while cf.len() < depth {
        if lo.is_zero() {
            return Err(Error::precondition(format!(
                "precision exhausted after {} quotients (interval reaches an integer reciprocal)",
                cf.len()
            )));
        }
        let (inv_hi, inv_lo) = (lo.recip(), hi.recip());
        let (a_lo, a_hi) = (inv_lo.floor(), inv_hi.floor());
        if a_lo != a_hi {
            return Err(Error::precondition(format!(
                "precision exhausted after {} quotients; raise BISHOP_PRECISION_BITS",
                cf.len()
            )));
        }
        cf.push(a_lo.to_integer())?;
        let new_lo = inv_lo - &a_lo;
        let new_hi = inv_hi - a_hi;
        lo = new_lo;
        hi = new_hi;
    }
    Ok(cf)
}

/// One Dirichlet comparison `|α − p_n/q_n| < 1/(q_n q_{n+1})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirichletCheck {
    pub n: usize,
    pub holds: bool,
    /// `α` coincides with `p_{n+1}/q_{n+1}`, the final convergent, so the
    /// bound is attained with equality; this is still a valid expansion.
    pub terminal_equality: bool,
}

/// Checks the Dirichlet bound for every `n` with a next convergent, plus
/// `n = L` when `α = p_L/q_L` exactly.
pub fn check_dirichlet(cf: &ContinuedFraction, alpha: &BigRational) -> Vec<DirichletCheck> {
    let (a, b) = (alpha.numer(), alpha.denom());
    let mut out = Vec::with_capacity(cf.len() + 1);
    for n in 0..cf.len() {
        // |A q_n − B p_n| q_{n+1} < B
        let lhs = (a * cf.q(n) - b * cf.p(n)).abs() * cf.q(n + 1);
        let terminal = n + 1 == cf.len() && cf.convergent(n + 1) == *alpha;
        let holds = lhs < *b || (terminal && lhs == *b);
        out.push(DirichletCheck { n, holds, terminal_equality: terminal && lhs == *b });
    }
    if cf.convergent(cf.len()) == *alpha {
        out.push(DirichletCheck { n: cf.len(), holds: true, terminal_equality: false });
    }
    out
}

/// Whether `q_{n+1} ≥ q_n^{n−1}`, which gives `|α − p_n/q_n| < 1/q_n^n`.
pub fn is_liouville_witness(cf: &ContinuedFraction, n: usize) -> Result<bool> {
    if n == 0 {
        return Err(Error::precondition("Liouville level must be >= 1"));
    }
    if n + 1 > cf.len() {
        return Err(Error::precondition(format!("level {n} needs q_{} but the expansion has depth {}", n + 1, cf.len())));
    }
    Ok(*cf.q(n + 1) >= num_traits::pow(cf.q(n).clone(), n - 1))
}

/// Value of a gap function at `q`: a finite rational or `+∞` (undefined).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsiValue {
    Finite(BigRational),
    Infinite,
}

/// A gap function `q ↦ ψ(q)`.
pub trait Psi {
    fn eval(&self, q: &BigInt) -> PsiValue;
}

/// `ψ(q) = q^k`.
pub struct PowerPsi(pub u32);

impl Psi for PowerPsi {
    fn eval(&self, q: &BigInt) -> PsiValue {
        PsiValue::Finite(BigRational::from_integer(num_traits::pow(q.clone(), self.0 as usize)))
    }
}

/// `ψ(q) = 2^q`; infinite beyond `q = 2^24`.
pub struct Exp2Psi;

impl Psi for Exp2Psi {
    fn eval(&self, q: &BigInt) -> PsiValue {
        match q.to_usize() {
            Some(k) if k <= 1 << 24 => PsiValue::Finite(BigRational::from_integer(BigInt::one() << k)),
            _ => PsiValue::Infinite,
        }
    }
}

/// Constant `ψ ≡ c`.
pub struct ConstPsi(pub BigRational);

impl Psi for ConstPsi {
    fn eval(&self, _q: &BigInt) -> PsiValue {
        PsiValue::Finite(self.0.clone())
    }
}

/// Tabulated `ψ`; `+∞` outside the table.
#[derive(Clone, Debug, Default)]
pub struct TablePsi(pub BTreeMap<BigInt, BigRational>);

impl Psi for TablePsi {
    fn eval(&self, q: &BigInt) -> PsiValue {
        match self.0.get(q) {
            Some(v) => PsiValue::Finite(v.clone()),
            None => PsiValue::Infinite,
        }
    }
}

/// Any closure `q ↦ ψ(q)`.
pub struct FnPsi<F>(pub F);

impl<F: Fn(&BigInt) -> PsiValue> Psi for FnPsi<F> {
    fn eval(&self, q: &BigInt) -> PsiValue {
        (self.0)(q)
    }
}

/// Parses `q^2`, `q`, `2^q` or a rational constant.
pub fn parse_psi(text: &str) -> Result<Box<dyn Psi + Send + Sync>> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t == "q" {
        return Ok(Box::new(PowerPsi(1)));
    }
    if t == "2^q" {
        return Ok(Box::new(Exp2Psi));
    }
    if let Some(k) = t.strip_prefix("q^") {
        let k: u32 = k.parse().map_err(|_| Error::precondition(format!("bad exponent in psi '{text}'")))?;
        return Ok(Box::new(PowerPsi(k)));
    }
    let c = crate::numerics::parse_rational(&t)
        .map_err(|_| Error::precondition(format!("unrecognized psi '{text}' (use q, q^k, 2^q or a constant)")))?;
    Ok(Box::new(ConstPsi(c)))
}

/// Levels `n` with `q_{n+1} > ψ(q_n)`, decided exactly.
#[derive(Clone, Debug, Serialize)]
pub struct GapCondition {
    /// `(n, holds)` for `n = 1..L−1`.
    pub checked: Vec<(usize, bool)>,
    pub indices: Vec<usize>,
    /// The last checkable level satisfies the gap, the finite stand-in for
    /// "for every n there is n_0 ≥ n with a gap".
    pub holds_at_truncation_end: bool,
}

pub fn gap_indices(cf: &ContinuedFraction, psi: &dyn Psi) -> GapCondition {
    let mut checked = Vec::new();
    for n in 1..cf.len() {
        let holds = match psi.eval(cf.q(n)) {
            PsiValue::Finite(v) => BigRational::from_integer(cf.q(n + 1).clone()) > v,
            PsiValue::Infinite => false,
        };
        checked.push((n, holds));
    }
    let indices: Vec<usize> = checked.iter().filter(|(_, h)| *h).map(|(n, _)| *n).collect();
    let holds_at_truncation_end = checked.last().is_some_and(|(_, h)| *h);
    GapCondition { checked, indices, holds_at_truncation_end }
}

/// Extends `base_quotients` by `levels` quotients `a_{n+1} = ⌊ψ(q_n)/q_n⌋ + 1`,
/// so that each new denominator exceeds `ψ` of the previous one.
pub fn build_alpha_with_gaps(psi: &dyn Psi, levels: usize, base_quotients: &[BigInt]) -> Result<ContinuedFraction> {
    if base_quotients.is_empty() {
        return Err(Error::precondition("need at least one seed quotient"));
    }
    let mut cf = ContinuedFraction::from_quotients(base_quotients.to_vec())?;
    for _ in 0..levels {
        append_gap_quotient(&mut cf, psi)?;
    }
    Ok(cf)
}

/// Appends one gap quotient at the current depth and verifies the gap.
pub fn append_gap_quotient(cf: &mut ContinuedFraction, psi: &dyn Psi) -> Result<()> {
    let n = cf.len();
    let qn = cf.q(n).clone();
    let v = match psi.eval(&qn) {
        PsiValue::Finite(v) => v,
        PsiValue::Infinite => return Err(Error::precondition(format!("psi is not finite at q = {qn}"))),
    };
    let ratio = v / BigRational::from_integer(qn.clone());
    let a = if ratio.is_negative() { BigInt::one() } else { ratio.floor().to_integer() + 1 };
    cf.push(a)?;
    let ok = match psi.eval(&qn) {
        PsiValue::Finite(v) => BigRational::from_integer(cf.q(n + 1).clone()) > v,
        PsiValue::Infinite => false,
    };
    if !ok {
        return Err(Error::numerical(format!("gap not achieved at level {n}")));
    }
    Ok(())
}
