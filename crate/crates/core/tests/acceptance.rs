//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion; exits non-zero if any fails.

use std::time::{Duration, Instant};

use bishop::cli::{self, Command};
use bishop::cyclicity::{approx_polynomial, cyclicity_test, delta_at_zero_closed_form, delta_sample, orbit_span_residual, ApproxConfig, Verdict};
use bishop::diophantine::{cf_expand, check_dirichlet, gap_indices, RealInterval, TablePsi};
use bishop::operator::{power_norm, spectral_radius_estimate};
use bishop::probes;
use bishop::psi::{verify_irrational_cyclicity, PsiConfig, TargetFamily};
use bishop::{parse_function, AlphaValue, FuncExpr, GridSpec, OperatorSpec};
use clap::Parser;
use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn within(elapsed: Duration, limit: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || format!("{what} took {:.1}s (limit {limit}s)", elapsed.as_secs_f64()))
}

fn f(s: &str) -> FuncExpr {
    parse_function(s).unwrap()
}

// (q!/q^q)^{1/q} via a plain product, independent of the library.
fn factorial_root(q: u64) -> f64 {
    let log: f64 = (1..=q).map(|k| (k as f64 / q as f64).ln()).sum();
    (log / q as f64).exp()
}

fn rational_spectral_radius() -> Outcome {
    let mut worst: f64 = 0.0;
    for q in 2..=10u64 {
        let start = Instant::now();
        let spec = OperatorSpec::bishop(AlphaValue::rational(1, q as i64).map_err(e)?);
        let pn = power_norm(&spec, q, GridSpec::new(100_000).map_err(e)?).map_err(e)?;
        within(start.elapsed(), 1.0, &format!("q = {q}"))?;
        let est = (pn.log_norm / q as f64).exp();
        let err = (est - factorial_root(q)).abs();
        worst = worst.max(err);
        ensure(err < 1e-4, || format!("q = {q}: {est} vs {}", factorial_root(q)))?;
    }
    Ok(format!("max error {worst:.2e} over q = 2..10"))
}

fn irrational_spectral_radius() -> Outcome {
    let start = Instant::now();
    let spec = OperatorSpec::bishop(AlphaValue::golden(40));
    let est = spectral_radius_estimate(&spec, 2000, GridSpec::new(200_000).map_err(e)?).map_err(e)?;
    let elapsed = start.elapsed();
    within(elapsed, 30.0, "estimate")?;
    ensure((0.35..=0.40).contains(&est.estimate), || format!("estimate {} outside [0.35, 0.40]", est.estimate))?;
    Ok(format!("estimate {:.6} (e^-1 = {:.6}) in {:.1}s", est.estimate, (-1.0f64).exp(), elapsed.as_secs_f64()))
}

fn delta_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for weight in ["x", "x^2"] {
        for func in ["1", "exp(x)", "1 + x"] {
            for q in 2..=8u64 {
                for r in (1..q).filter(|r| r.gcd(&q) == 1) {
                    let closed = delta_at_zero_closed_form(&f(func), &f(weight), r, q).map_err(e)?;
                    let lu = delta_sample(&f(func), &f(weight), r, q, 0.0).map_err(e)?.to_complex();
                    let rel = (closed - lu).norm() / closed.norm().max(lu.norm());
                    let rel = if rel.is_nan() { 0.0 } else { rel };
                    worst = worst.max(rel);
                    count += 1;
                    ensure(rel < 1e-9, || format!("{func}, weight {weight}, {r}/{q}: closed {closed} vs LU {lu}"))?;
                }
            }
        }
    }
    let half = delta_sample(&f("1"), &f("x"), 1, 2, 0.0).map_err(e)?.to_complex();
    let third = delta_sample(&f("1"), &f("x"), 1, 3, 0.0).map_err(e)?.to_complex();
    ensure((half - Complex64::new(0.5, 0.0)).norm() < 1e-12, || format!("Δ(1,1/2)(0) = {half}"))?;
    ensure((third - Complex64::new(-4.0 / 27.0, 0.0)).norm() < 1e-12, || format!("Δ(1,1/3)(0) = {third}"))?;
    Ok(format!("{count} cases, max relative gap {worst:.1e}; Δ(1,1/2)(0) = {:.12}, Δ(1,1/3)(0) = {:.12}", half.re, third.re))
}

fn constructive_cyclicity() -> Outcome {
    let start = Instant::now();
    let one = f("1");
    let weight = f("x");
    let spec = OperatorSpec::bishop(AlphaValue::rational(1, 3).map_err(e)?);
    let mut lines = Vec::new();
    for target in ["x", "x^2", "sin(2*pi*x)"] {
        let g = f(target);
        let rep = approx_polynomial(&one, &weight, 1, 3, &g, 0.05, &ApproxConfig::default()).map_err(e)?;
        ensure(rep.verified_residual < 0.05, || format!("{target}: residual {}", rep.verified_residual))?;
        let oracle = orbit_span_residual(&one, &spec, &g, rep.degree + 1, GridSpec::new(rep.verification_grid_n).map_err(e)?).map_err(e)?;
        ensure(oracle.residual <= rep.verified_residual + 1e-9, || {
            format!("{target}: oracle {} above constructed {}", oracle.residual, rep.verified_residual)
        })?;
        lines.push(format!("{target}: deg {} res {:.2e} oracle {:.2e}", rep.degree, rep.verified_residual, oracle.residual));
    }
    within(start.elapsed(), 60.0, "all targets")?;
    Ok(lines.join("; "))
}

fn non_cyclicity() -> Outcome {
    let func = f("indicator(1/4, 1/2) + indicator(3/4, 1)");
    let weight = f("x");
    let (verdict, profile) = cyclicity_test(&func, &weight, 1, 2, 2000, 0.0).map_err(e)?;
    ensure(verdict == Verdict::NotCyclic, || format!("verdict {verdict:?}"))?;
    for (t, v) in profile.t.iter().zip(&profile.log_abs) {
        if *t < 0.25 {
            ensure(*v == f64::NEG_INFINITY, || format!("Δ({t}) = e^{v} is not zero"))?;
        }
    }
    let spec = OperatorSpec::bishop(AlphaValue::rational(1, 2).map_err(e)?);
    let grid = GridSpec::new(4096).map_err(e)?;
    let mut least = f64::INFINITY;
    for k in [1, 5, 10, 25, 50] {
        let res = orbit_span_residual(&func, &spec, &f("1"), k, grid).map_err(e)?;
        least = least.min(res.residual);
        ensure(res.residual >= 0.45, || format!("K = {k}: residual {}", res.residual))?;
    }
    Ok(format!("verdict not-cyclic, Δ ≡ 0 on [0,1/4), min orbit residual {least:.4}"))
}

fn diophantine_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let denom: BigInt = BigInt::one() << 256usize;
    for i in 0..10 {
        let mut bytes = [0u8; 32];
        rng.fill_bytes(&mut bytes);
        let numer = BigInt::from_bytes_be(Sign::Plus, &bytes).max(BigInt::one());
        let alpha = BigRational::new(numer, denom.clone());
        let cf = cf_expand(&RealInterval::exact(alpha.clone()), 25).map_err(e)?;
        cf.check_invariants().map_err(e)?;
        // independent recurrence from p_{-1}/q_{-1} = 1/0 and p_0/q_0 = 0/1
        let (mut p0, mut q0, mut p1, mut q1) = (BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one());
        for n in 1..=cf.len() {
            let a = &cf.quotients()[n - 1];
            let (p2, q2) = (a * &p1 + &p0, a * &q1 + &q0);
            ensure(&p2 == cf.p(n) && &q2 == cf.q(n), || format!("α #{i}: recurrence fails at n = {n}"))?;
            ensure(p2.gcd(&q2).is_one(), || format!("α #{i}: p/q not coprime at n = {n}"))?;
            let det = &p2 * &q1 - &q2 * &p1;
            let expected = if n % 2 == 1 { BigInt::one() } else { -BigInt::one() };
            ensure(det == expected, || format!("α #{i}: determinant {det} at n = {n}"))?;
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
        }
        let checks = check_dirichlet(&cf, &alpha);
        ensure(checks.iter().all(|c| c.holds), || format!("α #{i}: Dirichlet bound fails"))?;
        for c in &checks {
            let (p, q) = (cf.p(c.n), cf.q(c.n));
            let lhs = (&alpha - BigRational::new(p.clone(), q.clone())).abs();
            ensure(lhs <= BigRational::new(BigInt::one(), q * q), || format!("α #{i}: independent bound fails at n = {}", c.n))?;
        }
    }
    Ok("10 seeded α, depth 25: recurrence, coprimality, determinant and Dirichlet exact".into())
}

fn psi_pipeline() -> Outcome {
    let start = Instant::now();
    let targets = TargetFamily::default().truncated(3).map_err(e)?;
    let rep = verify_irrational_cyclicity(&f("1"), &f("x"), &targets, &[2, 3], 0.1, 2, &PsiConfig::default()).map_err(e)?;
    let elapsed = start.elapsed();
    within(elapsed, 120.0, "pipeline")?;
    // gaps recomputed from the table, independent of the stored report
    let psi: TablePsi = rep.psi_table.to_psi().map_err(e)?;
    let gaps = gap_indices(&rep.alpha, &psi);
    for level in &rep.used_levels {
        ensure(gaps.indices.contains(level), || format!("no gap at used level {level}"))?;
    }
    for t in &rep.targets {
        ensure(t.alpha_residual < 0.2, || format!("target {}: residual {}", t.target, t.alpha_residual))?;
    }
    let worst = rep.targets.iter().map(|t| t.alpha_residual).fold(0.0, f64::max);
    Ok(format!(
        "α = [{}], gaps at {:?}, max residual {worst:.3e}, {:.1}s",
        rep.alpha.quotient_strings().join(", "),
        rep.used_levels,
        elapsed.as_secs_f64()
    ))
}

fn measure_invariance() -> Outcome {
    let grid = GridSpec::new(100_000).map_err(e)?;
    let bound = 5.0 / grid.n as f64;
    let mut worst: f64 = 0.0;
    for alpha in [AlphaValue::rational(1, 3).map_err(e)?, AlphaValue::golden(40)] {
        let spec = OperatorSpec::bishop(alpha);
        for func in ["x - 1/2", "cos(2*pi*x) - 0.3"] {
            for n in [1, 7, 50, 200] {
                for a in [0.5, 1.0, 7.0] {
                    let r = probes::supercyclicity_invariance(&f(func), &spec, n, a, grid).map_err(e)?;
                    worst = worst.max(r.deviation);
                    ensure(r.deviation <= bound, || format!("{func}, n = {n}, a = {a}: deviation {}", r.deviation))?;
                }
            }
        }
    }
    Ok(format!("max deviation {worst:.1e} (bound {bound:.0e})"))
}

fn convex_bound() -> Outcome {
    let grid = GridSpec::new(100_000).map_err(e)?;
    let random = probes::random_convex_checks(20, 7, grid).map_err(e)?;
    for c in &random {
        ensure(c.preconditions_hold && c.checked, || format!("{}: preconditions {:?}", c.function, c.precondition_failures))?;
        let bound = (c.b - c.a) / 3.0 - 10.0 / grid.n as f64;
        ensure(c.measure >= bound, || format!("{}: measure {} < {bound}", c.function, c.measure))?;
    }
    let alpha = AlphaValue::golden(40);
    let mut qs = Vec::new();
    let (mut a, mut b) = (1u64, 2u64);
    while b <= 233 {
        qs.push(b);
        (a, b) = (b, a + b);
    }
    for &q in &qs {
        let c = probes::cocycle_convex_check(&alpha, q, (-1.0f64).exp(), grid).map_err(e)?;
        ensure(c.pass, || format!("q = {q}: measure {} bound {}", c.measure, c.bound))?;
    }
    Ok(format!("20 random products and golden q_n in {qs:?}"))
}

fn eigenvalue_absence() -> Outcome {
    let weight = f("x");
    let grid = GridSpec::new(20_000).map_err(e)?;
    let mut min_diff = f64::INFINITY;
    for q in 2..=10u64 {
        let pw = probes::periodic_weight(q, &weight, grid).map_err(e)?;
        ensure(pw.min_forward_difference > 0.0 && pw.strictly_increasing, || format!("q = {q}: w not increasing"))?;
        min_diff = min_diff.min(pw.min_forward_difference);
    }
    let q = 3;
    let fine = GridSpec::new(200_000).map_err(e)?;
    let sup = probes::eigen_levelset_probe(q, &weight, &[], 1e-3, fine).map_err(e)?.sup_w;
    let lambdas: Vec<Complex64> = [0.2, 0.4, 0.6, 0.8].iter().map(|c| Complex64::new((c * sup).powf(1.0 / q as f64), 0.0)).collect();
    let tols = [1e-4 * sup, 2e-4 * sup, 4e-4 * sup];
    let probes: Vec<_> = tols.iter().map(|&t| probes::eigen_levelset_probe(q, &weight, &lambdas, t, fine)).collect::<Result<_, _>>().map_err(e)?;
    let mut worst: f64 = 0.0;
    for k in 0..lambdas.len() {
        for s in 1..tols.len() {
            let (a, b) = (&probes[s - 1].entries[k], &probes[s].entries[k]);
            let ratio = b.measure / a.measure;
            let predicted = b.predicted / a.predicted;
            let dev = (ratio / predicted - 1.0).abs();
            worst = worst.max(dev);
            ensure(dev <= 0.2, || format!("λ = {}: ratio {ratio} vs predicted {predicted}", lambdas[k]))?;
            ensure(b.measure <= b.bound, || format!("λ = {}: measure {} above bound {}", lambdas[k], b.measure, b.bound))?;
        }
    }
    Ok(format!("min forward difference {min_diff:.2e}; measure ratios within {:.1}% of slope prediction", 100.0 * worst))
}

fn unit_delta_probe() -> Outcome {
    let rows = probes::unit_delta_conjecture_probe(12, 512).map_err(e)?;
    ensure(rows.iter().all(|r| r.delta0_agrees), || "Δ(0) cross-check failed".into())?;
    let min_abs = rows.iter().map(|r| r.min_abs).fold(f64::INFINITY, f64::min);
    let violations: usize = rows.iter().map(|r| r.monotonicity_violations).sum();
    Ok(format!("{} fractions, min |Δ| {min_abs:.3e}, monotonicity violations {violations}", rows.len()))
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let runs: &[&[&str]] = &[
        &["iterate", "--alpha", "golden", "--f", "cos(2*pi*x)", "--n", "17", "--grid", "500"],
        &["norm", "--alpha", "1/5", "--n", "5", "--grid", "2000"],
        &["delta", "--q", "3", "--f", "exp(x)", "--samples", "300"],
        &["approx", "--q", "3", "--f", "1", "--g", "x^2", "--eps", "0.05", "--grid", "4096"],
        &["cf", "--quadratic=-1,1,5,2", "--depth", "30"],
        &["probe", "convex", "--random", "3", "--grid", "5000"],
        &["probe", "eigen", "--q", "4", "--random", "5", "--grid", "5000"],
        &["delta-q", "--q", "2", "--m", "2", "--grid", "4096", "--delta-grid", "1024"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let argv: Vec<&str> = ["bishop"].iter().chain(args.iter()).copied().chain(["--seed", "11"]).collect();
        let parsed = cli::Cli::try_parse_from(&argv).map_err(e)?;
        let (doc, _) = cli::execute(&parsed.command, parsed.seed).map_err(e)?;
        let path = dir.path().join(format!("run{i}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&doc).map_err(e)?).map_err(e)?;
        let (_, diffs) = cli::replay(&path).map_err(e)?;
        ensure(diffs.is_empty(), || format!("{}: differs in {diffs:?}", args.join(" ")))?;
        ensure(!matches!(parsed.command, Command::Replay(_)), || "unexpected replay".into())?;
    }
    Ok(format!("{} manifests replayed bit-for-bit", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("rational spectral radius", rational_spectral_radius),
        ("irrational spectral radius", irrational_spectral_radius),
        ("determinant closed form", delta_closed_form),
        ("constructive cyclicity", constructive_cyclicity),
        ("non-cyclicity detection", non_cyclicity),
        ("diophantine exactness", diophantine_exactness),
        ("psi pipeline", psi_pipeline),
        ("measure invariance", measure_invariance),
        ("convex product bound", convex_bound),
        ("eigenvalue absence", eigenvalue_absence),
        ("unit determinant probe", unit_delta_probe),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[{:>2}] PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[{:>2}] FAIL {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
