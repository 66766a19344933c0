use std::path::PathBuf;

use clap::{Args, Subcommand};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{CsvTable, Outcome};
use crate::cyclicity::{
    approx_polynomial, cyclicity_test, decompose_target, delta_at_zero_closed_form, delta_profile, delta_sample, orbit_span_residual,
    ApproxConfig,
};
use crate::diophantine::{
    build_alpha_with_gaps, cf_expand, check_dirichlet, gap_indices, is_liouville_witness, parse_psi, ContinuedFraction, RealInterval,
};
use crate::error::{Error, Result};
use crate::expr::{parse_function, FuncExpr};
use crate::numerics::{lp_norm, parse_rational, precision_bits, AlphaValue, GridSpec};
use crate::operator::{apply, apply_adjoint, iterate, power_norm, spectral_radius_estimate, OperatorSpec};
use crate::probes;
use crate::psi::{
    build_polynomial_bank, estimate_delta, psi_value, replay_certificate, verify_irrational_cyclicity, PsiConfig, PsiTable, TargetFamily,
};

type C = Complex64;

fn func(s: &str) -> std::result::Result<FuncExpr, String> {
    parse_function(s).map_err(|e| e.to_string())
}

fn alpha(s: &str) -> std::result::Result<AlphaValue, String> {
    AlphaValue::parse(s).map_err(|e| e.to_string())
}

// A fraction, decimal or constant expression such as `exp(-1)`.
fn constant(s: &str) -> std::result::Result<C, String> {
    if let Ok(v) = parse_rational(s) {
        return Ok(C::new(num_traits::ToPrimitive::to_f64(&v).unwrap_or(f64::NAN), 0.0));
    }
    let e = parse_function(s).map_err(|e| e.to_string())?;
    let (a, b) = (e.evaluate(0.0).map_err(|e| e.to_string())?, e.evaluate(1.0).map_err(|e| e.to_string())?);
    if a != b {
        return Err(format!("'{s}' is not a constant"));
    }
    Ok(a)
}

fn real(s: &str) -> std::result::Result<f64, String> {
    let v = constant(s)?;
    if v.im != 0.0 {
        return Err(format!("'{s}' is not real"));
    }
    Ok(v.re)
}

fn to_json<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn grid(n: usize) -> Result<GridSpec> {
    GridSpec::new(n)
}

fn complex_table(x: &[f64], values: &[C]) -> CsvTable {
    CsvTable {
        header: vec!["x".into(), "re".into(), "im".into()],
        rows: x.iter().zip(values).map(|(x, v)| vec![*x, v.re, v.im]).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct OperatorArgs {
    /// Rotation: `p/q`, a decimal, `golden[:depth]`, `silver[:depth]` or `cf:a1,a2,...`.
    #[arg(long, value_parser = alpha)]
    pub alpha: AlphaValue,
    #[arg(long, value_parser = func, default_value = "x")]
    pub weight: FuncExpr,
    #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "2")]
    pub p: f64,
}

impl OperatorArgs {
    fn spec(&self) -> Result<OperatorSpec> {
        OperatorSpec::weighted(self.weight.clone(), self.alpha.clone()).with_p(self.p)
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub op: OperatorArgs,
    #[arg(long, value_parser = func)]
    pub f: FuncExpr,
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct IterateArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    #[arg(long)]
    pub n: u64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct NormArgs {
    #[command(flatten)]
    pub op: OperatorArgs,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 100_000)]
    pub grid: usize,
}

/// A rational rotation given as `--alpha r/q` or as `--r` and `--q`.
#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct FractionArgs {
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub r: Option<u64>,
    #[arg(long)]
    pub q: Option<u64>,
}

impl FractionArgs {
    fn resolve(&self) -> Result<(u64, u64)> {
        match (&self.alpha, self.r, self.q) {
            (Some(a), None, None) => {
                let v = AlphaValue::parse(a)?;
                v.small_fraction().ok_or_else(|| Error::precondition(format!("alpha '{a}' is not a small rational")))
            }
            (None, r, Some(q)) => Ok((r.unwrap_or(1), q)),
            _ => Err(Error::precondition("give either --alpha r/q or --q (and optionally --r)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub fraction: FractionArgs,
    #[arg(long, value_parser = func)]
    pub f: FuncExpr,
    #[arg(long, value_parser = func, default_value = "x")]
    pub weight: FuncExpr,
    /// Samples on `[0, 1/q)`.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "0")]
    pub tol: f64,
    /// Also evaluate `Δ` at this single point.
    #[arg(long, value_parser = real, allow_hyphen_values = true)]
    pub t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub fraction: FractionArgs,
    #[arg(long, value_parser = func)]
    pub f: FuncExpr,
    #[arg(long, value_parser = func)]
    pub g: FuncExpr,
    #[arg(long, value_parser = real, allow_hyphen_values = true)]
    pub eps: f64,
    #[arg(long, value_parser = func, default_value = "x")]
    pub weight: FuncExpr,
    #[arg(long, default_value_t = 1 << 14)]
    pub grid: usize,
    #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "2")]
    pub p: f64,
    #[arg(long, default_value_t = 64)]
    pub degree_cap: usize,
    #[arg(long, default_value_t = 2048)]
    pub cyclicity_samples: usize,
    #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "0")]
    pub cyclicity_tol: f64,
    /// Also run the least-squares oracle over the first `deg Q + 1` orbit elements.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub fraction: FractionArgs,
    #[arg(long, value_parser = func)]
    pub f: FuncExpr,
    #[arg(long, value_parser = func)]
    pub h: FuncExpr,
    #[arg(long, value_parser = func, default_value = "x")]
    pub weight: FuncExpr,
    /// Truncation index of `Ω_n`.
    #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "1e6")]
    pub n: f64,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct CfArgs {
    /// `p/q`, a decimal, `golden[:depth]`, `silver[:depth]` or `cf:a1,a2,...`.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Quadratic irrational `(a + b√c)/d` given as `a,b,c,d`.
    #[arg(long)]
    pub quadratic: Option<String>,
    /// Read a decimal `--alpha` as uncertain by half a unit in its last digit.
    #[arg(long)]
    pub uncertain: bool,
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
}

impl CfArgs {
    /// The expansion and an exact proxy for α.
    fn expand(&self) -> Result<(ContinuedFraction, BigRational, bool)> {
        if let Some(spec) = &self.quadratic {
            let parts: Vec<i64> = spec
                .split(',')
                .map(|s| s.trim().parse::<i64>().map_err(|_| Error::precondition(format!("bad quadratic '{spec}'"))))
                .collect::<Result<_>>()?;
            let [a, b, c, d] = parts[..] else {
                return Err(Error::precondition("--quadratic needs a,b,c,d"));
            };
            if c < 0 {
                return Err(Error::precondition("c must be non-negative"));
            }
            let interval = RealInterval::quadratic(a, b, c as u64, d, precision_bits())?;
            let proxy = (&interval.lo + &interval.hi) / BigInt::from(2);
            return Ok((cf_expand(&interval, self.depth)?, proxy, false));
        }
        let text = self.alpha.as_deref().ok_or_else(|| Error::precondition("give --alpha or --quadratic"))?;
        if self.uncertain {
            let interval = RealInterval::decimal(text)?;
            let proxy = (&interval.lo + &interval.hi) / BigInt::from(2);
            return Ok((cf_expand(&interval, self.depth)?, proxy, false));
        }
        match AlphaValue::parse(text)? {
            AlphaValue::CfTruncation { quotients, value } => {
                let q: Vec<BigInt> = quotients.into_iter().take(self.depth).collect();
                Ok((ContinuedFraction::from_quotients(q)?, value, true))
            }
            AlphaValue::ExactRational(v) => Ok((cf_expand(&RealInterval::exact(v.clone()), self.depth)?, v, true)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct GapsArgs {
    #[command(flatten)]
    pub cf: CfArgs,
    /// `q`, `q^k`, `2^q` or a constant.
    #[arg(long, default_value = "q^2")]
    pub psi: String,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct BuildAlphaArgs {
    #[arg(long, default_value = "q^2")]
    pub psi: String,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Seed partial quotients.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub base: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct TargetArgs {
    #[arg(long, value_parser = func, default_value = "1")]
    pub f: FuncExpr,
    #[arg(long, value_parser = func, default_value = "x")]
    pub weight: FuncExpr,
    /// Targets separated by `;` (default: 1; x; x^2; sin(2*pi*x); cos(2*pi*x); indicator(0, 1/2)).
    #[arg(long)]
    pub targets: Option<String>,
    /// Keep only the first `m` targets.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "0.1")]
    pub eps: f64,
    #[arg(long, default_value_t = 1 << 14)]
    pub grid: usize,
}

impl TargetArgs {
    fn family(&self) -> Result<TargetFamily> {
        let fam = match &self.targets {
            Some(t) => TargetFamily::new(t.split(';').map(|s| parse_function(s.trim())).collect::<Result<_>>()?)?,
            None => TargetFamily::default(),
        };
        match self.m {
            Some(m) => fam.truncated(m),
            None => Ok(fam),
        }
    }

    fn approx_config(&self) -> ApproxConfig {
        ApproxConfig { grid_n: self.grid, ..ApproxConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct BankArgs {
    #[command(flatten)]
    pub targets: TargetArgs,
    #[arg(long)]
    pub q: u64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct DeltaQArgs {
    #[command(flatten)]
    pub bank: BankArgs,
    #[arg(long, default_value_t = 4096)]
    pub delta_grid: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct PsiArgs {
    #[command(flatten)]
    pub targets: TargetArgs,
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    pub q_list: Vec<u64>,
    #[arg(long, default_value_t = 4096)]
    pub delta_grid: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyPsiArgs {
    #[command(flatten)]
    pub psi: PsiArgs,
    /// Unit quotients appended after the gap quotient.
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    #[arg(long, default_value_t = 10007)]
    pub verify_grid: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A result document written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ProbeArgs {
    #[command(subcommand)]
    pub probe: ProbeCommand,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "probe", content = "args", rename_all = "kebab-case")]
pub enum ProbeCommand {
    /// Periodic weight `w` on `[0, 1/q)` and its monotonicity.
    Weight {
        #[arg(long)]
        q: u64,
        #[arg(long, value_parser = func, default_value = "x")]
        weight: FuncExpr,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
    /// Measures of `{|w − λ^q| < tol}`.
    Eigen {
        #[arg(long)]
        q: u64,
        #[arg(long, value_parser = func, default_value = "x")]
        weight: FuncExpr,
        #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "1e-3")]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
        /// Explicit λ values (constant expressions such as `0.3 + 0.2*i`).
        #[arg(long, value_parser = constant, allow_hyphen_values = true)]
        lambda: Vec<C>,
        /// Polar grid size `radial × angular` when no λ is given.
        #[arg(long, default_value_t = 4)]
        radial: usize,
        #[arg(long, default_value_t = 8)]
        angular: usize,
        /// Use this many seeded random λ in the disk instead of the polar grid.
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
    /// The measure bound for increasing convex non-negative functions.
    Convex {
        #[arg(long, value_parser = func)]
        f: Option<FuncExpr>,
        #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "0")]
        a: f64,
        #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "1")]
        b: f64,
        /// Number of seeded random products to check.
        #[arg(long, default_value_t = 0)]
        random: usize,
        /// Check the cocycles `|F_{q_n}|` along golden convergents.
        #[arg(long)]
        golden: bool,
        #[arg(long, default_value_t = 233)]
        max_q: u64,
        #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "exp(-1)")]
        lambda_modulus: f64,
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
    },
    /// `m({Re(a T^n f) > 0})` against `m({Re f > 0})`.
    Invariance {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, value_parser = func)]
        f: FuncExpr,
        #[arg(long)]
        n: u64,
        #[arg(long, value_parser = real, allow_hyphen_values = true, value_delimiter = ',', default_value = "1")]
        a: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
    },
    /// `‖T^n f − 1_{φ=0}‖_p^p ≥ m({φ = 0})`.
    Obstruction {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, value_parser = func)]
        f: FuncExpr,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
    /// `Δ(1, r/q)` for all coprime `r/q` with `q ≤ q_max`.
    UnitDelta {
        #[arg(long, default_value_t = 12)]
        q_max: u64,
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "args", rename_all = "kebab-case")]
pub enum Command {
    /// `T f` on a grid.
    Apply(SampleArgs),
    /// `T^n f` on a grid.
    Iterate(IterateArgs),
    /// `T* f` on a grid.
    Adjoint(SampleArgs),
    /// `‖T^n‖` as the grid supremum of the cocycle.
    Norm(NormArgs),
    /// Spectral radius estimate `‖T^n‖^{1/n}`.
    Spectrum(NormArgs),
    /// Samples of the determinant `Δ(f, r/q)`.
    Delta(DeltaArgs),
    /// Cyclicity verdict for a rational rotation.
    CyclicTest(DeltaArgs),
    /// Polynomial `Q` with `‖Q(T) f − g‖_p < ε`.
    Approx(ApproxArgs),
    /// Periodic components `h = Σ h_j T^j f`.
    Decompose(DecomposeArgs),
    /// Continued-fraction expansion.
    Cf(CfArgs),
    /// Dirichlet bounds along the convergents.
    Dirichlet(CfArgs),
    /// Levels with `q_{n+1} > ψ(q_n)`.
    Gaps(GapsArgs),
    /// Continued fraction with prescribed gaps.
    BuildAlpha(BuildAlphaArgs),
    /// Polynomial bank for every `r/q` and target.
    Bank(BankArgs),
    /// Continuity radius `δ(q)` of a bank and `ψ(q)`.
    DeltaQ(DeltaQArgs),
    /// Table of `δ(q)` and `ψ(q)` for several denominators.
    Psi(PsiArgs),
    /// End-to-end verification at a gap-satisfying irrational rotation.
    VerifyPsi(VerifyPsiArgs),
    /// Structural probes.
    Probe(ProbeArgs),
    /// Rerun the command stored in a result document and compare.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> String {
        let base = match self {
            Command::Apply(_) => "apply",
            Command::Iterate(_) => "iterate",
            Command::Adjoint(_) => "adjoint",
            Command::Norm(_) => "norm",
            Command::Spectrum(_) => "spectrum",
            Command::Delta(_) => "delta",
            Command::CyclicTest(_) => "cyclic-test",
            Command::Approx(_) => "approx",
            Command::Decompose(_) => "decompose",
            Command::Cf(_) => "cf",
            Command::Dirichlet(_) => "dirichlet",
            Command::Gaps(_) => "gaps",
            Command::BuildAlpha(_) => "build-alpha",
            Command::Bank(_) => "bank",
            Command::DeltaQ(_) => "delta-q",
            Command::Psi(_) => "psi",
            Command::VerifyPsi(_) => "verify-psi",
            Command::Replay(_) => "replay",
            Command::Probe(p) => {
                return format!(
                    "probe {}",
                    match p.probe {
                        ProbeCommand::Weight { .. } => "weight",
                        ProbeCommand::Eigen { .. } => "eigen",
                        ProbeCommand::Convex { .. } => "convex",
                        ProbeCommand::Invariance { .. } => "invariance",
                        ProbeCommand::Obstruction { .. } => "obstruction",
                        ProbeCommand::UnitDelta { .. } => "unit-delta",
                    }
                )
            }
        };
        base.to_string()
    }

    pub fn run(&self, seed: u64) -> Result<Outcome> {
        match self {
            Command::Apply(a) => samples(a, None, false),
            Command::Iterate(a) => samples(&a.sample, Some(a.n), false),
            Command::Adjoint(a) => samples(a, None, true),
            Command::Norm(a) => {
                let pn = power_norm(&a.op.spec()?, a.n, grid(a.grid)?)?;
                let mut diagnostics = json!({});
                if !pn.converged {
                    diagnostics["warning"] = json!("grids N and 2N disagree by more than 1%");
                }
                Ok(Outcome { results: to_json(&pn)?, diagnostics, grid_n: Some(a.grid), csv: None })
            }
            Command::Spectrum(a) => {
                let spec = a.op.spec()?;
                let est = spectral_radius_estimate(&spec, a.n, grid(a.grid)?)?;
                let mut results = to_json(&est)?;
                if spec.is_bishop() {
                    match a.op.alpha.small_fraction() {
                        Some((_, q)) if q > 1 && !a.op.alpha.is_zero() => {
                            results["rational_closed_form"] = json!(probes::rational_spectral_radius(q)?);
                        }
                        _ => results["irrational_reference"] = json!((-1.0f64).exp()),
                    }
                }
                Ok(Outcome { results, diagnostics: json!({}), grid_n: Some(a.grid), csv: None })
            }
            Command::Delta(a) => delta(a, false),
            Command::CyclicTest(a) => delta(a, true),
            Command::Approx(a) => {
                let (r, q) = a.fraction.resolve()?;
                let config = ApproxConfig {
                    grid_n: a.grid,
                    p: a.p,
                    degree_cap: a.degree_cap,
                    cyclicity_samples: a.cyclicity_samples,
                    cyclicity_tol: a.cyclicity_tol,
                };
                let rep = approx_polynomial(&a.f, &a.weight, r, q, &a.g, a.eps, &config)?;
                let mut results = to_json(&rep)?;
                if a.oracle {
                    let spec = OperatorSpec::weighted(a.weight.clone(), AlphaValue::rational(r as i64, q as i64)?).with_p(a.p)?;
                    let oracle = orbit_span_residual(&a.f, &spec, &a.g, rep.degree + 1, grid(rep.verification_grid_n)?)?;
                    results["oracle"] = to_json(&oracle)?;
                    results["oracle_dominates"] = json!(oracle.residual <= rep.verified_residual + 1e-9);
                }
                Ok(Outcome { results, diagnostics: json!({ "notes": rep.notes }), grid_n: Some(rep.construction_grid_n), csv: None })
            }
            Command::Decompose(a) => {
                let (r, q) = a.fraction.resolve()?;
                let c = decompose_target(&a.h, &a.f, &a.weight, r, q, a.n, grid(a.grid)?)?;
                let diagnostics = json!({ "flagged_samples": c.flagged_samples });
                Ok(Outcome { results: to_json(&c)?, diagnostics, grid_n: Some(a.grid), csv: None })
            }
            Command::Cf(a) => {
                let (cf, _, exact) = a.expand()?;
                cf.check_invariants()?;
                let liouville: Vec<(usize, bool)> =
                    (1..cf.len()).map(|n| Ok((n, is_liouville_witness(&cf, n)?))).collect::<Result<_>>()?;
                let results = json!({
                    "quotients": cf.quotient_strings(),
                    "numerators": (0..=cf.len()).map(|n| cf.p(n).to_string()).collect::<Vec<_>>(),
                    "denominators": (0..=cf.len()).map(|n| cf.q(n).to_string()).collect::<Vec<_>>(),
                    "value": cf.value().to_string(),
                    "exact_input": exact,
                    "invariants_hold": true,
                    "liouville_witness": liouville,
                });
                Ok(Outcome { results, diagnostics: json!({ "precision_bits": precision_bits() }), grid_n: None, csv: None })
            }
            Command::Dirichlet(a) => {
                let (cf, proxy, exact) = a.expand()?;
                let checks = check_dirichlet(&cf, &proxy);
                let results = json!({
                    "quotients": cf.quotient_strings(),
                    "alpha": proxy.to_string(),
                    "checks": checks,
                    "all_hold": checks.iter().all(|c| c.holds),
                });
                let diagnostics = if exact { json!({}) } else { json!({ "note": "alpha is the midpoint of its enclosing interval" }) };
                Ok(Outcome { results, diagnostics, grid_n: None, csv: None })
            }
            Command::Gaps(a) => {
                let (cf, _, _) = a.cf.expand()?;
                let psi = parse_psi(&a.psi)?;
                let gaps = gap_indices(&cf, psi.as_ref());
                let results = json!({ "quotients": cf.quotient_strings(), "psi": a.psi, "gaps": gaps });
                Ok(Outcome { results, diagnostics: json!({}), grid_n: None, csv: None })
            }
            Command::BuildAlpha(a) => {
                let psi = parse_psi(&a.psi)?;
                let base: Vec<BigInt> = a.base.iter().map(|&v| BigInt::from(v)).collect();
                let cf = build_alpha_with_gaps(psi.as_ref(), a.levels, &base)?;
                cf.check_invariants()?;
                let gaps = gap_indices(&cf, psi.as_ref());
                let results = json!({
                    "quotients": cf.quotient_strings(),
                    "denominators": (0..=cf.len()).map(|n| cf.q(n).to_string()).collect::<Vec<_>>(),
                    "value": cf.value().to_string(),
                    "gaps": gaps,
                });
                Ok(Outcome { results, diagnostics: json!({}), grid_n: None, csv: None })
            }
            Command::Bank(a) => {
                let t = &a.targets;
                let bank = build_polynomial_bank(&t.f, &t.weight, a.q, &t.family()?, t.eps, &t.approx_config())?;
                Ok(Outcome { results: to_json(&bank)?, diagnostics: json!({}), grid_n: Some(t.grid), csv: None })
            }
            Command::DeltaQ(a) => {
                let t = &a.bank.targets;
                let bank = build_polynomial_bank(&t.f, &t.weight, a.bank.q, &t.family()?, t.eps, &t.approx_config())?;
                let est = estimate_delta(&bank, &t.f, &t.weight, t.eps, grid(a.delta_grid)?)?;
                let psi = psi_value(a.bank.q, &est.delta_exact)?;
                let replayed = replay_certificate(&bank, &t.f, &t.weight, &est.certificate)?;
                let results = json!({
                    "q": a.bank.q,
                    "delta": est.delta_exact.to_string(),
                    "delta_approx": est.delta,
                    "psi": psi.to_string(),
                    "psi_approx": num_traits::ToPrimitive::to_f64(&psi),
                    "certificate": est.certificate,
                    "certificate_replays": replayed,
                    "bank": bank,
                });
                Ok(Outcome { results, diagnostics: json!({}), grid_n: Some(t.grid), csv: None })
            }
            Command::Psi(a) => {
                let t = &a.targets;
                let family = t.family()?;
                let mut table = PsiTable::default();
                for &q in &a.q_list {
                    let bank = build_polynomial_bank(&t.f, &t.weight, q, &family, t.eps, &t.approx_config())?;
                    table.insert(&estimate_delta(&bank, &t.f, &t.weight, t.eps, grid(a.delta_grid)?)?)?;
                }
                let diagnostics = json!({ "identity_holds": table.identity_holds()? });
                Ok(Outcome { results: to_json(&table)?, diagnostics, grid_n: Some(t.grid), csv: None })
            }
            Command::VerifyPsi(a) => {
                let t = &a.psi.targets;
                let config = PsiConfig { approx: t.approx_config(), delta_grid_n: a.psi.delta_grid, verify_grid_n: a.verify_grid };
                let rep = verify_irrational_cyclicity(&t.f, &t.weight, &t.family()?, &a.psi.q_list, t.eps, a.levels, &config)?;
                let diagnostics = json!({ "gap_precondition": rep.gap_precondition, "all_passed": rep.all_passed });
                Ok(Outcome { results: to_json(&rep)?, diagnostics, grid_n: Some(t.grid), csv: None })
            }
            Command::Probe(p) => probe(&p.probe, seed),
            Command::Replay(_) => Err(Error::precondition("replay cannot be nested")),
        }
    }
}

fn samples(a: &SampleArgs, n: Option<u64>, adjoint: bool) -> Result<Outcome> {
    let spec = a.op.spec()?;
    let g = grid(a.grid)?;
    let (x, values) = if adjoint {
        let s = apply_adjoint(&spec, &a.f, g)?;
        (s.x, s.values)
    } else if let Some(n) = n {
        let s = iterate(&spec, &a.f, n, g)?;
        (s.x, s.values)
    } else {
        let s = apply(&spec, &a.f, g)?;
        (s.x, s.values)
    };
    let norm = lp_norm(&values, spec.p)?;
    let results = json!({ "x": x, "values": values, "norm": norm });
    let diagnostics = json!({ "indicator_breakpoints": a.f.indicator_breakpoints().len() });
    Ok(Outcome { results, diagnostics, grid_n: Some(a.grid), csv: Some(complex_table(&x, &values)) })
}

fn delta(a: &DeltaArgs, verdict: bool) -> Result<Outcome> {
    let (r, q) = a.fraction.resolve()?;
    let (verdict_value, profile) = if verdict {
        let (v, p) = cyclicity_test(&a.f, &a.weight, r, q, a.samples, a.tol)?;
        (Some(v), p)
    } else {
        (None, delta_profile(&a.f, &a.weight, r, q, a.samples, a.tol)?)
    };
    let values = profile.values();
    let mut results = to_json(&profile)?;
    if let Some(v) = verdict_value {
        results["verdict"] = to_json(&v)?;
    }
    if a.weight.evaluate(0.0)?.norm() == 0.0 {
        results["closed_form_at_zero"] = to_json(&delta_at_zero_closed_form(&a.f, &a.weight, r, q)?)?;
    }
    if let Some(t) = a.t {
        results["at_t"] = json!({ "t": t, "value": delta_sample(&a.f, &a.weight, r, q, t)? });
    }
    let csv = complex_table(&profile.t, &values);
    Ok(Outcome { results, diagnostics: json!({}), grid_n: Some(a.samples), csv: Some(csv) })
}

fn probe(p: &ProbeCommand, seed: u64) -> Result<Outcome> {
    match p {
        ProbeCommand::Weight { q, weight, grid: n } => {
            let pw = probes::periodic_weight(*q, weight, grid(*n)?)?;
            let csv = CsvTable { header: vec!["x".into(), "value".into()], rows: pw.x.iter().zip(&pw.w).map(|(x, w)| vec![*x, *w]).collect() };
            Ok(Outcome { results: to_json(&pw)?, diagnostics: json!({}), grid_n: Some(*n), csv: Some(csv) })
        }
        ProbeCommand::Eigen { q, weight, tol, grid: n, lambda, radial, angular, random } => {
            let lambdas = if !lambda.is_empty() {
                lambda.clone()
            } else if *random > 0 {
                probes::random_lambdas(*random, seed)
            } else {
                probes::lambda_grid(*radial, *angular)
            };
            let probe = probes::eigen_levelset_probe(*q, weight, &lambdas, *tol, grid(*n)?)?;
            Ok(Outcome { results: to_json(&probe)?, diagnostics: json!({}), grid_n: Some(*n), csv: None })
        }
        ProbeCommand::Convex { f, a, b, random, golden, max_q, lambda_modulus, grid: n } => {
            let g = grid(*n)?;
            let mut results = json!({});
            if let Some(f) = f {
                results["function"] = to_json(&probes::convex_product_bound_check(f, *a, *b, g)?)?;
            }
            if *random > 0 {
                let checks = probes::random_convex_checks(*random, seed, g)?;
                results["all_random_pass"] = json!(checks.iter().all(|c| c.pass));
                results["random"] = to_json(&checks)?;
            }
            if *golden {
                let alpha = AlphaValue::golden(40);
                let cf = ContinuedFraction::from_quotients(vec![BigInt::from(1); 40])?;
                let checks = cf
                    .denominators()
                    .iter()
                    .filter_map(num_traits::ToPrimitive::to_u64)
                    .filter(|q| *q >= 2 && *q <= *max_q)
                    .collect::<std::collections::BTreeSet<_>>()
                    .into_iter()
                    .map(|q| probes::cocycle_convex_check(&alpha, q, *lambda_modulus, g))
                    .collect::<Result<Vec<_>>>()?;
                results["all_golden_pass"] = json!(checks.iter().all(|c| c.pass));
                results["golden"] = to_json(&checks)?;
            }
            if results.as_object().is_some_and(|o| o.is_empty()) {
                return Err(Error::precondition("give --f, --random or --golden"));
            }
            Ok(Outcome { results, diagnostics: json!({}), grid_n: Some(*n), csv: None })
        }
        ProbeCommand::Invariance { op, f, n, a, grid: gn } => {
            let spec = op.spec()?;
            let g = grid(*gn)?;
            let rows = a.iter().map(|&s| probes::supercyclicity_invariance(f, &spec, *n, s, g)).collect::<Result<Vec<_>>>()?;
            let results = json!({ "rows": rows, "max_deviation": rows.iter().map(|r| r.deviation).fold(0.0, f64::max), "all_pass": rows.iter().all(|r| r.pass) });
            Ok(Outcome { results, diagnostics: json!({}), grid_n: Some(*gn), csv: None })
        }
        ProbeCommand::Obstruction { op, f, n, grid: gn } => {
            let r = probes::orbit_obstruction(&op.spec()?, f, *n, grid(*gn)?)?;
            let diagnostics = if r.vacuous { json!({ "warning": "sampled zero set of the weight is empty; the check is vacuous" }) } else { json!({}) };
            Ok(Outcome { results: to_json(&r)?, diagnostics, grid_n: Some(*gn), csv: None })
        }
        ProbeCommand::UnitDelta { q_max, samples } => {
            let rows = probes::unit_delta_conjecture_probe(*q_max, *samples)?;
            let results = json!({
                "rows": rows,
                "all_delta0_agree": rows.iter().all(|r| r.delta0_agrees),
                "min_abs_overall": rows.iter().map(|r| r.min_abs).fold(f64::INFINITY, f64::min),
                "total_monotonicity_violations": rows.iter().map(|r| r.monotonicity_violations).sum::<usize>(),
            });
            Ok(Outcome { results, diagnostics: json!({}), grid_n: Some(*samples), csv: None })
        }
    }
}
