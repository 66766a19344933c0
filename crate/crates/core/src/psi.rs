//! Polynomial banks over rational rotations, continuity radii `δ(q)`, the gap
//! function `ψ(q) = 1/(q δ(q))`, and end-to-end verification at an irrational α
//! built to satisfy the gaps.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclicity::{approx_polynomial, ApproxConfig, PolynomialCoeffs};
use crate::diophantine::{append_gap_quotient, gap_indices, ContinuedFraction, GapCondition, TablePsi};
use crate::error::{Error, Result};
use crate::expr::{parse_function, FuncExpr};
use crate::numerics::{lp_norm, AlphaValue, GridSpec};
use crate::operator::{apply_polynomial, OperatorSpec};

type C = Complex64;

/// Ordered targets `g_1, …, g_m` standing in for a dense family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetFamily {
    pub targets: Vec<FuncExpr>,
}

impl Default for TargetFamily {
    fn default() -> Self {
        let targets = ["1", "x", "x^2", "sin(2*pi*x)", "cos(2*pi*x)", "indicator(0, 1/2)"]
            .iter()
            .map(|s| parse_function(s).unwrap())
            .collect();
        TargetFamily { targets }
    }
}

impl TargetFamily {
    pub fn new(targets: Vec<FuncExpr>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::precondition("target family is empty"));
        }
        Ok(TargetFamily { targets })
    }

    /// The first `m` targets.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        Self::new(self.targets.iter().take(m).cloned().collect())
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankEntry {
    pub r: u64,
    /// 1-based index into the target family.
    pub j: usize,
    pub target: String,
    pub polynomial: PolynomialCoeffs,
    pub degree: usize,
    /// Verified `‖Q(T_{r/q}) f − g_j‖_p`.
    pub residual: f64,
}

/// Polynomials `Q_{r/q, j}` for every coprime `r` and every `j ≤ min(q, m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialBank {
    pub q: u64,
    pub epsilon: f64,
    pub p: f64,
    pub entries: Vec<BankEntry>,
}

impl PolynomialBank {
    pub fn entry(&self, r: u64, j: usize) -> Option<&BankEntry> {
        self.entries.iter().find(|e| e.r == r && e.j == j)
    }

    /// Number of targets covered, `min(q, m)`.
    pub fn target_count(&self) -> usize {
        self.entries.iter().map(|e| e.j).max().unwrap_or(0)
    }
}

pub fn coprime_numerators(q: u64) -> Vec<u64> {
    (1..q).filter(|r| r.gcd(&q) == 1).collect()
}

/// Runs the constructive approximation for every `(r/q, g_j)` pair.
pub fn build_polynomial_bank(f: &FuncExpr, weight: &FuncExpr, q: u64, targets: &TargetFamily, eps: f64, config: &ApproxConfig) -> Result<PolynomialBank> {
    if q < 2 {
        return Err(Error::precondition("bank needs q >= 2"));
    }
    if !(eps > 0.0) {
        return Err(Error::precondition("bank tolerance must be positive"));
    }
    let m = targets.len().min(q as usize);
    let pairs: Vec<(u64, usize)> = coprime_numerators(q).into_iter().flat_map(|r| (1..=m).map(move |j| (r, j))).collect();
    let entries = pairs
        .par_iter()
        .map(|&(r, j)| {
            let g = &targets.targets[j - 1];
            let fail = |msg: String| Error::Numerical(format!("bank entry r/q = {r}/{q}, target {j} ({g}): {msg}"));
            let rep = approx_polynomial(f, weight, r, q, g, eps, config).map_err(|e| match e {
                Error::Precondition(m) => Error::Precondition(format!("bank entry r/q = {r}/{q}, target {j} ({g}): {m}")),
                other => fail(other.to_string()),
            })?;
            if !rep.meets_epsilon {
                return Err(fail(format!("verified residual {:.3e} >= {eps}", rep.verified_residual)));
            }
            Ok(BankEntry { r, j, target: g.to_string(), degree: rep.degree, polynomial: rep.polynomial, residual: rep.verified_residual })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolynomialBank { q, epsilon: eps, p: config.p, entries })
}

/// One perturbation `β = r/q ± h` applied to one bank polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub r: u64,
    pub j: usize,
    /// Exact `β` as `p/q`.
    pub beta: String,
    /// `‖Q(T_β) f − Q(T_{r/q}) f‖_p`.
    pub residual: f64,
}

/// Evidence for `δ(q)`: every bank polynomial tested at `r/q ± δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaCertificate {
    pub q: u64,
    pub epsilon: f64,
    pub grid_n: usize,
    /// Exact `δ` as `p/q`.
    pub delta: String,
    pub tested: Vec<Perturbation>,
    /// `(h, all residuals below ε)` in the order tried.
    pub search: Vec<(String, bool)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub q: u64,
    pub delta: f64,
    #[serde(skip)]
    pub delta_exact: BigRational,
    pub certificate: DeltaCertificate,
}

struct PerturbationContext<'a> {
    bank: &'a PolynomialBank,
    f: &'a FuncExpr,
    weight: &'a FuncExpr,
    points: Vec<BigRational>,
    base: Vec<Vec<C>>,
}

impl<'a> PerturbationContext<'a> {
    fn new(bank: &'a PolynomialBank, f: &'a FuncExpr, weight: &'a FuncExpr, grid: GridSpec) -> Result<Self> {
        let points: Vec<BigRational> = (0..grid.n).map(|i| grid.point_exact(i)).collect();
        let base = bank
            .entries
            .iter()
            .map(|e| {
                let spec = OperatorSpec::weighted(weight.clone(), AlphaValue::from_ratio(ratio(e.r, bank.q))?);
                apply_polynomial(&spec, f, &e.polynomial.coeffs, &points)
            })
            .collect::<Result<_>>()?;
        Ok(PerturbationContext { bank, f, weight, points, base })
    }

    fn residual(&self, index: usize, beta: &BigRational) -> Result<f64> {
        let e = &self.bank.entries[index];
        let spec = OperatorSpec::weighted(self.weight.clone(), AlphaValue::from_ratio(beta.clone())?).with_p(self.bank.p)?;
        let moved = apply_polynomial(&spec, self.f, &e.polynomial.coeffs, &self.points)?;
        let diff: Vec<C> = moved.iter().zip(&self.base[index]).map(|(a, b)| a - b).collect();
        lp_norm(&diff, self.bank.p)
    }

    /// All perturbations at `r/q ± h`, or `None` as soon as one reaches `ε`.
    fn test(&self, h: &BigRational, eps: f64) -> Result<Option<Vec<Perturbation>>> {
        let mut out = Vec::with_capacity(2 * self.bank.entries.len());
        for (index, e) in self.bank.entries.iter().enumerate() {
            let center = ratio(e.r, self.bank.q);
            for beta in [&center - h, &center + h] {
                let residual = self.residual(index, &beta)?;
                if !(residual < eps) {
                    return Ok(None);
                }
                out.push(Perturbation { r: e.r, j: e.j, beta: beta.to_string(), residual });
            }
        }
        Ok(Some(out))
    }
}

fn ratio(r: u64, q: u64) -> BigRational {
    BigRational::new(BigInt::from(r), BigInt::from(q))
}

/// Largest dyadic `h ≤ 1/(2q)` found by bisection with every perturbation
/// residual below `ε`, halved for safety.
pub fn estimate_delta(bank: &PolynomialBank, f: &FuncExpr, weight: &FuncExpr, eps: f64, grid: GridSpec) -> Result<DeltaEstimate> {
    if !(eps > 0.0) {
        return Err(Error::precondition("tolerance must be positive"));
    }
    if bank.entries.is_empty() {
        return Err(Error::precondition("empty bank"));
    }
    let ctx = PerturbationContext::new(bank, f, weight, grid)?;
    let floor = 1e-12;
    let mut search = Vec::new();
    let two = BigRational::from_integer(BigInt::from(2));
    let mut bad = ratio(1, 2 * bank.q);
    let mut good = None;
    // descend until some h passes
    let mut h = bad.clone();
    loop {
        let ok = ctx.test(&h, eps)?.is_some();
        search.push((h.to_string(), ok));
        if ok {
            good = Some(h.clone());
            break;
        }
        bad = h.clone();
        h = &h / &two;
        if h.to_f64().unwrap_or(0.0) < floor {
            break;
        }
    }
    let mut good = good.ok_or_else(|| Error::numerical(format!("no perturbation down to {floor:e} keeps residuals below {eps} for q = {}", bank.q)))?;
    if good != bad {
        while (&bad - &good) > &good * BigRational::new(BigInt::one(), BigInt::from(1000)) {
            let mid = (&good + &bad) / &two;
            let ok = ctx.test(&mid, eps)?.is_some();
            search.push((mid.to_string(), ok));
            if ok {
                good = mid;
            } else {
                bad = mid;
            }
        }
    }
    // certify at the returned radius itself
    let mut delta = &good / &two;
    let tested = loop {
        match ctx.test(&delta, eps)? {
            Some(t) => break t,
            None => {
                search.push((delta.to_string(), false));
                delta = &delta / &two;
                if delta.to_f64().unwrap_or(0.0) < floor {
                    return Err(Error::numerical(format!("could not certify a radius for q = {}", bank.q)));
                }
            }
        }
    };
    let certificate = DeltaCertificate { q: bank.q, epsilon: eps, grid_n: grid.n, delta: delta.to_string(), tested, search };
    Ok(DeltaEstimate { q: bank.q, delta: delta.to_f64().unwrap_or(0.0), delta_exact: delta, certificate })
}

/// Recomputes every stored perturbation; true when all residuals are
/// reproduced exactly and stay below `ε`.
pub fn replay_certificate(bank: &PolynomialBank, f: &FuncExpr, weight: &FuncExpr, cert: &DeltaCertificate) -> Result<bool> {
    let ctx = PerturbationContext::new(bank, f, weight, GridSpec::new(cert.grid_n)?)?;
    for t in &cert.tested {
        let index = bank
            .entries
            .iter()
            .position(|e| e.r == t.r && e.j == t.j)
            .ok_or_else(|| Error::precondition(format!("certificate refers to missing entry r = {}, j = {}", t.r, t.j)))?;
        let beta = crate::numerics::parse_rational(&t.beta)?;
        let residual = ctx.residual(index, &beta)?;
        if residual.to_bits() != t.residual.to_bits() || !(residual < cert.epsilon) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `ψ(q) = 1/(q δ)` in exact arithmetic.
pub fn psi_value(q: u64, delta: &BigRational) -> Result<BigRational> {
    if !delta.is_positive() {
        return Err(Error::precondition(format!("delta = {delta} must be positive")));
    }
    if q == 0 {
        return Err(Error::precondition("q must be positive"));
    }
    Ok((BigRational::from_integer(BigInt::from(q)) * delta).recip())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiEntry {
    pub q: u64,
    pub delta: String,
    pub psi: String,
    pub psi_approx: f64,
    pub certificate: DeltaCertificate,
}

/// Measured `δ(q)` and `ψ(q)` for a set of denominators.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PsiTable {
    pub entries: BTreeMap<u64, PsiEntry>,
}

impl PsiTable {
    pub fn insert(&mut self, est: &DeltaEstimate) -> Result<()> {
        let psi = psi_value(est.q, &est.delta_exact)?;
        self.entries.insert(
            est.q,
            PsiEntry {
                q: est.q,
                delta: est.delta_exact.to_string(),
                psi: psi.to_string(),
                psi_approx: psi.to_f64().unwrap_or(f64::INFINITY),
                certificate: est.certificate.clone(),
            },
        );
        Ok(())
    }

    pub fn to_psi(&self) -> Result<TablePsi> {
        let mut map = BTreeMap::new();
        for (q, e) in &self.entries {
            map.insert(BigInt::from(*q), crate::numerics::parse_rational(&e.psi)?);
        }
        Ok(TablePsi(map))
    }

    /// `ψ(q)·q·δ(q) = 1` for every stored entry, in exact arithmetic.
    pub fn identity_holds(&self) -> Result<bool> {
        for (q, e) in &self.entries {
            let d = crate::numerics::parse_rational(&e.delta)?;
            let p = crate::numerics::parse_rational(&e.psi)?;
            if p * d * BigRational::from_integer(BigInt::from(*q)) != BigRational::one() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiConfig {
    pub approx: ApproxConfig,
    /// Grid for the perturbation residuals of the δ search.
    pub delta_grid_n: usize,
    /// Grid for the final check at α; distinct from the construction grids.
    pub verify_grid_n: usize,
}

impl Default for PsiConfig {
    fn default() -> Self {
        PsiConfig { approx: ApproxConfig::default(), delta_grid_n: 1 << 12, verify_grid_n: 10007 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TargetVerification {
    /// 1-based index into the target family.
    pub index: usize,
    pub target: String,
    /// CF level `n_0` whose convergent supplies the polynomial.
    pub level: Option<usize>,
    pub r: u64,
    pub q: u64,
    pub epsilon: f64,
    pub gap_at_level: bool,
    /// `‖Q(T_{r/q}) f − g‖_p`.
    pub rational_residual: f64,
    /// `‖Q(T_α) f − g‖_p`.
    pub alpha_residual: f64,
    /// `‖Q(T_α) f − Q(T_{r/q}) f‖_p`.
    pub perturbation_residual: f64,
    pub triangle_ok: bool,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IrrationalReport {
    pub alpha: ContinuedFraction,
    pub alpha_approx: f64,
    pub denominators: Vec<String>,
    pub gap: GapCondition,
    pub used_levels: Vec<usize>,
    /// Every level that supplied a polynomial satisfies the gap.
    pub gap_precondition: bool,
    pub banks: Vec<PolynomialBank>,
    pub psi_table: PsiTable,
    pub targets: Vec<TargetVerification>,
    pub verify_grid_n: usize,
    pub all_passed: bool,
}

/// Partial quotients whose convergent denominators are exactly `q_list`.
pub fn quotients_for_denominators(q_list: &[u64]) -> Result<Vec<BigInt>> {
    if q_list.is_empty() {
        return Err(Error::precondition("q_list is empty"));
    }
    let mut out = Vec::with_capacity(q_list.len());
    let (mut prev2, mut prev1) = (0u64, 1u64);
    for &q in q_list {
        if q <= prev1 || (q - prev2) % prev1 != 0 {
            return Err(Error::precondition(format!(
                "q_list is not a run of continued-fraction denominators: {q} cannot follow {prev1}"
            )));
        }
        out.push(BigInt::from((q - prev2) / prev1));
        prev2 = prev1;
        prev1 = q;
    }
    Ok(out)
}

/// Builds banks, `δ(q)`, `ψ(q)` and a gap-satisfying α, then checks every target at α.
///
/// The seed quotients realize `q_list` as consecutive denominators; the gap
/// quotient is appended after the last one, followed by `levels` unit quotients.
pub fn verify_irrational_cyclicity(
    f: &FuncExpr,
    weight: &FuncExpr,
    targets: &TargetFamily,
    q_list: &[u64],
    eps: f64,
    levels: usize,
    config: &PsiConfig,
) -> Result<IrrationalReport> {
    let seed = quotients_for_denominators(q_list)?;
    let mut banks = Vec::with_capacity(q_list.len());
    let mut table = PsiTable::default();
    for &q in q_list {
        let bank = build_polynomial_bank(f, weight, q, targets, eps, &config.approx)?;
        let est = estimate_delta(&bank, f, weight, eps, GridSpec::new(config.delta_grid_n)?)?;
        table.insert(&est)?;
        banks.push(bank);
    }
    let mut cf = ContinuedFraction::from_quotients(seed)?;
    append_gap_quotient(&mut cf, &table.to_psi()?)?;
    for _ in 0..levels {
        cf.push(BigInt::one())?;
    }
    verify_at_alpha(f, weight, targets, banks, table, cf, eps, GridSpec::new(config.verify_grid_n)?)
}

/// Checks every target at a given α using the banks; the gap flag records
/// whether the levels used actually satisfy `q_{n+1} > ψ(q_n)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_at_alpha(
    f: &FuncExpr,
    weight: &FuncExpr,
    targets: &TargetFamily,
    banks: Vec<PolynomialBank>,
    psi_table: PsiTable,
    alpha: ContinuedFraction,
    eps: f64,
    grid: GridSpec,
) -> Result<IrrationalReport> {
    let psi = psi_table.to_psi()?;
    let gap = gap_indices(&alpha, &psi);
    let alpha_value = alpha.to_alpha()?;
    let spec_alpha = OperatorSpec::weighted(weight.clone(), alpha_value.clone());
    let p = banks.first().map_or(2.0, |b| b.p);
    let spec_alpha = spec_alpha.with_p(p)?;
    let points: Vec<BigRational> = (0..grid.n).map(|i| grid.point_exact(i)).collect();
    // levels whose denominator has a bank, gap levels first
    let mut candidates: Vec<(usize, bool, &PolynomialBank)> = Vec::new();
    for n in 1..=alpha.len() {
        if let Some(qn) = alpha.q(n).to_u64() {
            if let Some(bank) = banks.iter().find(|b| b.q == qn) {
                candidates.push((n, gap.indices.contains(&n), bank));
            }
        }
    }
    candidates.sort_by_key(|(n, holds, _)| (!holds, *n));

    let results: Vec<TargetVerification> = (1..=targets.len())
        .into_par_iter()
        .map(|index| {
            let g = &targets.targets[index - 1];
            let expected: Vec<C> = grid.sample(g)?;
            let choice = candidates.iter().find(|(_, _, bank)| bank.target_count() >= index);
            let Some(&(level, holds, bank)) = choice else {
                return Ok(TargetVerification {
                    index,
                    target: g.to_string(),
                    level: None,
                    r: 0,
                    q: 0,
                    epsilon: eps,
                    gap_at_level: false,
                    rational_residual: f64::NAN,
                    alpha_residual: f64::NAN,
                    perturbation_residual: f64::NAN,
                    triangle_ok: false,
                    bound: 2.0 * eps,
                    passed: false,
                });
            };
            let r = alpha.p(level).to_u64().ok_or_else(|| Error::numerical("convergent numerator overflow"))?;
            let entry = bank.entry(r, index).ok_or_else(|| Error::numerical(format!("bank for q = {} lacks r = {r}, target {index}", bank.q)))?;
            let spec_rat = OperatorSpec::weighted(weight.clone(), AlphaValue::from_ratio(ratio(r, bank.q))?).with_p(p)?;
            let at_rat = apply_polynomial(&spec_rat, f, &entry.polynomial.coeffs, &points)?;
            let at_alpha = apply_polynomial(&spec_alpha, f, &entry.polynomial.coeffs, &points)?;
            let diff = |a: &[C], b: &[C]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<C>>();
            let rational_residual = lp_norm(&diff(&at_rat, &expected), p)?;
            let alpha_residual = lp_norm(&diff(&at_alpha, &expected), p)?;
            let perturbation_residual = lp_norm(&diff(&at_alpha, &at_rat), p)?;
            let triangle_ok = alpha_residual <= rational_residual + perturbation_residual + 1e-9;
            let bound = 2.0 * bank.epsilon;
            Ok(TargetVerification {
                index,
                target: g.to_string(),
                level: Some(level),
                r,
                q: bank.q,
                epsilon: bank.epsilon,
                gap_at_level: holds,
                rational_residual,
                alpha_residual,
                perturbation_residual,
                triangle_ok,
                bound,
                passed: alpha_residual < bound && triangle_ok,
            })
        })
        .collect::<Result<_>>()?;
    let mut used_levels: Vec<usize> = results.iter().filter_map(|t| t.level).collect();
    used_levels.sort_unstable();
    used_levels.dedup();
    let gap_precondition = !used_levels.is_empty() && used_levels.iter().all(|n| gap.indices.contains(n));
    let all_passed = results.iter().all(|t| t.passed);
    Ok(IrrationalReport {
        alpha_approx: alpha_value.to_f64(),
        denominators: alpha.denominators().iter().skip(1).map(|q| q.to_string()).collect(),
        alpha,
        gap,
        used_levels,
        gap_precondition,
        banks,
        psi_table,
        targets: results,
        verify_grid_n: grid.n,
        all_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn func(s: &str) -> FuncExpr {
        parse_function(s).unwrap()
    }

    fn config() -> ApproxConfig {
        ApproxConfig { grid_n: 1200, cyclicity_samples: 256, ..ApproxConfig::default() }
    }

    fn fam(items: &[&str]) -> TargetFamily {
        TargetFamily::new(items.iter().map(|s| func(s)).collect()).unwrap()
    }

    #[test]
    fn psi_arithmetic() {
        assert_eq!(psi_value(2, &ratio(1, 2)).unwrap(), BigRational::one());
        assert_eq!(psi_value(3, &ratio(1, 10)).unwrap(), ratio(10, 3));
        assert!(psi_value(3, &BigRational::zero()).is_err());
    }

    #[test]
    fn seed_quotients() {
        let a = quotients_for_denominators(&[2, 3]).unwrap();
        assert_eq!(a, vec![BigInt::from(2), BigInt::from(1)]);
        let cf = ContinuedFraction::from_quotients(a).unwrap();
        assert_eq!(cf.q(1), &BigInt::from(2));
        assert_eq!(cf.q(2), &BigInt::from(3));
        assert!(quotients_for_denominators(&[3, 5]).is_err());
        assert!(quotients_for_denominators(&[2, 2]).is_err());
    }

    #[test]
    fn bank_shapes() {
        let one = func("1");
        let bank = build_polynomial_bank(&one, &FuncExpr::identity(), 2, &fam(&["1"]), 0.1, &config()).unwrap();
        assert_eq!(bank.entries.len(), 1);
        assert_eq!(bank.entries[0].degree, 0);
        assert!((bank.entries[0].polynomial.coeffs[0] - C::new(1.0, 0.0)).norm() < 1e-12);
        assert!(bank.entries[0].residual < 1e-12);
        let bank = build_polynomial_bank(&one, &FuncExpr::identity(), 3, &fam(&["1", "x", "x^2"]), 0.1, &config()).unwrap();
        assert_eq!(bank.entries.len(), 2 * 3);
        assert!(bank.entries.iter().all(|e| e.residual < 0.1));
    }

    #[test]
    fn bank_failure_names_pair() {
        let f = func("indicator(1/4, 1/2) + indicator(3/4, 1)");
        let err = build_polynomial_bank(&f, &FuncExpr::identity(), 2, &fam(&["1"]), 0.1, &config()).unwrap_err();
        assert!(err.to_string().contains("1/2"), "{err}");
    }

    #[test]
    fn delta_and_certificate() {
        let one = func("1");
        let id = FuncExpr::identity();
        let bank = build_polynomial_bank(&one, &id, 2, &fam(&["1", "x"]), 0.1, &config()).unwrap();
        let grid = GridSpec::new(512).unwrap();
        let est = estimate_delta(&bank, &one, &id, 0.1, grid).unwrap();
        assert!(est.delta > 0.0 && est.delta <= 0.125);
        assert!(replay_certificate(&bank, &one, &id, &est.certificate).unwrap());
        let tighter = estimate_delta(&bank, &one, &id, 0.05, grid).unwrap();
        assert!(tighter.delta <= est.delta);
        let mut table = PsiTable::default();
        table.insert(&est).unwrap();
        assert!(table.identity_holds().unwrap());
    }

    #[test]
    fn targets_equal_to_f() {
        let one = func("1");
        let cfg = PsiConfig { approx: config(), delta_grid_n: 256, verify_grid_n: 701 };
        let rep = verify_irrational_cyclicity(&one, &FuncExpr::identity(), &fam(&["1"]), &[2, 3], 0.1, 1, &cfg).unwrap();
        assert!(rep.all_passed);
        assert!(rep.gap_precondition);
        assert!(rep.targets[0].alpha_residual < 1e-12);
    }

    #[test]
    fn gap_flag_for_foreign_alpha() {
        let one = func("1");
        let id = FuncExpr::identity();
        let targets = fam(&["1", "x"]);
        let bank = build_polynomial_bank(&one, &id, 2, &targets, 0.1, &config()).unwrap();
        let est = estimate_delta(&bank, &one, &id, 0.1, GridSpec::new(256).unwrap()).unwrap();
        let mut table = PsiTable::default();
        table.insert(&est).unwrap();
        // [0; 2, 1, 1]: q_2 = 3 is far below ψ(2)
        let cf = ContinuedFraction::from_quotients(vec![BigInt::from(2), BigInt::one(), BigInt::one()]).unwrap();
        let rep = verify_at_alpha(&one, &id, &targets, vec![bank], table, cf, 0.1, GridSpec::new(301).unwrap()).unwrap();
        assert!(!rep.gap_precondition);
        assert!(rep.targets.iter().all(|t| t.level == Some(1)));
    }
}
