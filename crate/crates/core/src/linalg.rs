//! Small dense complex linear algebra: LU with partial pivoting (determinants in
//! log form, solves, condition numbers) and column-pivoted Householder least squares.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C = Complex64;

/// A complex number stored as `exp(log_magnitude) · phase`, `|phase| = 1`.
///
/// Zero is `log_magnitude = -inf` with phase 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_magnitude: f64,
    pub phase: C,
}

impl LogComplex {
    pub const ONE: LogComplex = LogComplex { log_magnitude: 0.0, phase: C { re: 1.0, im: 0.0 } };
    pub const ZERO: LogComplex = LogComplex { log_magnitude: f64::NEG_INFINITY, phase: C { re: 1.0, im: 0.0 } };

    pub fn from_complex(z: C) -> Self {
        let r = z.norm();
        if r == 0.0 {
            return Self::ZERO;
        }
        LogComplex { log_magnitude: r.ln(), phase: z / r }
    }

    pub fn is_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    pub fn mul(self, other: LogComplex) -> LogComplex {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        let phase = self.phase * other.phase;
        LogComplex { log_magnitude: self.log_magnitude + other.log_magnitude, phase: phase / phase.norm() }
    }

    pub fn magnitude(&self) -> f64 {
        self.log_magnitude.exp()
    }

    /// The represented value; underflows to zero below the double range.
    pub fn to_complex(&self) -> C {
        if self.is_zero() {
            return C::new(0.0, 0.0);
        }
        self.phase * self.log_magnitude.exp()
    }
}

/// Square matrix in row-major order.
#[derive(Clone, Debug)]
pub struct Square {
    pub n: usize,
    pub data: Vec<C>,
}

impl Square {
    pub fn zeros(n: usize) -> Self {
        Square { n, data: vec![C::new(0.0, 0.0); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C) {
        self.data[i * self.n + j] = v;
    }

    fn norm_1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `P A = L U` with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Square,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
    norm_1: f64,
}

impl Lu {
    pub fn factor(a: &Square) -> Self {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = false;
        for k in 0..n {
            let (mut p, mut best) = (k, lu.get(k, k).norm());
            for i in k + 1..n {
                let v = lu.get(i, k).norm();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let m = lu.get(i, k) / pivot;
                lu.set(i, k, m);
                if m.re == 0.0 && m.im == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let v = lu.get(i, j) - m * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
        Lu { lu, perm, swaps, singular, norm_1: a.norm_1() }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Determinant as a product of pivots, accumulated in log form.
    pub fn log_det(&self) -> LogComplex {
        if self.singular {
            return LogComplex::ZERO;
        }
        let mut acc = LogComplex::ONE;
        if self.swaps % 2 == 1 {
            acc.phase = -acc.phase;
        }
        for k in 0..self.lu.n {
            acc = acc.mul(LogComplex::from_complex(self.lu.get(k, k)));
        }
        acc
    }

    pub fn solve(&self, b: &[C]) -> Result<Vec<C>> {
        if self.singular {
            return Err(Error::numerical("singular matrix"));
        }
        let n = self.lu.n;
        let mut x: Vec<C> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s / self.lu.get(i, i);
        }
        Ok(x)
    }

    /// `‖A‖₁ ‖A⁻¹‖₁`, with the inverse formed column by column.
    pub fn condition_1(&self) -> f64 {
        if self.singular {
            return f64::INFINITY;
        }
        let n = self.lu.n;
        let mut inv_norm = 0.0f64;
        let mut e = vec![C::new(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = C::new(0.0, 0.0));
            e[j] = C::new(1.0, 0.0);
            let col = self.solve(&e).unwrap();
            inv_norm = inv_norm.max(col.iter().map(|v| v.norm()).sum());
        }
        self.norm_1 * inv_norm
    }
}

/// Least-squares solution of `min ‖A c − b‖₂`.
#[derive(Clone, Debug)]
pub struct LsSolution {
    pub coeffs: Vec<C>,
    /// Euclidean norm of the optimal residual, computed from the orthogonal
    /// transformation rather than by re-multiplying.
    pub residual_norm: f64,
    pub rank: usize,
    /// Ratio of the largest to the smallest retained diagonal entry of `R`.
    pub condition: f64,
}

/// Least squares with column scaling and column-pivoted Householder QR.
///
/// `columns[k]` holds column `k` (length `m`). Columns whose pivoted
/// diagonal falls below `1e-14` of the leading one are dropped and their
/// coefficients set to zero.
pub fn least_squares(columns: &[Vec<C>], b: &[C]) -> Result<LsSolution> {
    let m = b.len();
    let k = columns.len();
    if columns.iter().any(|c| c.len() != m) {
        return Err(Error::precondition("column length mismatch"));
    }
    if k == 0 {
        return Ok(LsSolution { coeffs: vec![], residual_norm: norm2(b), rank: 0, condition: 1.0 });
    }
    let mut a: Vec<Vec<C>> = columns.to_vec();
    let mut scales = vec![1.0; k];
    for (col, s) in a.iter_mut().zip(scales.iter_mut()) {
        let nrm = norm2(col);
        if nrm > 0.0 {
            *s = nrm;
            col.iter_mut().for_each(|v| *v /= nrm);
        }
    }
    let mut rhs = b.to_vec();
    let mut order: Vec<usize> = (0..k).collect();
    let steps = k.min(m);
    let mut diag = Vec::with_capacity(steps);
    let mut rank = 0;
    for step in 0..steps {
        // pivot on largest remaining column norm
        let (mut best, mut best_norm) = (step, -1.0);
        for c in step..k {
            let nrm = norm2(&a[c][step..]);
            if nrm > best_norm {
                best = c;
                best_norm = nrm;
            }
        }
        a.swap(step, best);
        order.swap(step, best);
        if step > 0 && best_norm <= 1e-14 * diag[0] || best_norm == 0.0 {
            break;
        }
        let (head, tail) = a.split_at_mut(step + 1);
        let v = householder(&mut head[step][step..]);
        diag.push(head[step][step].norm());
        for col in tail.iter_mut() {
            reflect(&v, &mut col[step..]);
        }
        reflect(&v, &mut rhs[step..]);
        rank += 1;
    }
    // back substitution on the leading rank x rank block
    let mut y = vec![C::new(0.0, 0.0); rank];
    for i in (0..rank).rev() {
        let mut s = rhs[i];
        for j in i + 1..rank {
            s -= a[j][i] * y[j];
        }
        y[i] = s / a[i][i];
    }
    let mut coeffs = vec![C::new(0.0, 0.0); k];
    for i in 0..rank {
        coeffs[order[i]] = y[i] / scales[order[i]];
    }
    let residual_norm = norm2(&rhs[rank..]);
    let condition = if rank == 0 { f64::INFINITY } else { diag[0] / diag[rank - 1] };
    Ok(LsSolution { coeffs, residual_norm, rank, condition })
}

/// Weighted least squares `min Σ w_i² |(A c − b)_i|²`.
pub fn weighted_least_squares(columns: &[Vec<C>], b: &[C], weights: &[f64]) -> Result<LsSolution> {
    let wc: Vec<Vec<C>> = columns.iter().map(|c| c.iter().zip(weights).map(|(v, w)| v * w).collect()).collect();
    let wb: Vec<C> = b.iter().zip(weights).map(|(v, w)| v * w).collect();
    least_squares(&wc, &wb)
}

/// Result of an `ℓ^p` fit by iteratively reweighted least squares.
#[derive(Clone, Debug)]
pub struct IrlsSolution {
    pub coeffs: Vec<C>,
    /// `(Σ |r_i|^p)^{1/p}` at the returned coefficients.
    pub residual_norm: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub rank: usize,
}

/// `min Σ |(A c − b)_i|^p` by IRLS; tolerance 1e-8 on the relative objective change, at most 100 sweeps.
pub fn irls(columns: &[Vec<C>], b: &[C], p: f64) -> Result<IrlsSolution> {
    const TOL: f64 = 1e-8;
    const MAX_SWEEPS: usize = 100;
    let m = b.len();
    let mut weights = vec![1.0; m];
    let mut best: Option<IrlsSolution> = None;
    let mut previous = f64::INFINITY;
    for sweep in 1..=MAX_SWEEPS {
        let sol = weighted_least_squares(columns, b, &weights)?;
        let residual = residual_vector(columns, &sol.coeffs, b);
        let objective = p_norm(&residual, p);
        if best.as_ref().is_none_or(|s| objective < s.residual_norm) {
            best = Some(IrlsSolution {
                coeffs: sol.coeffs.clone(),
                residual_norm: objective,
                sweeps: sweep,
                converged: false,
                rank: sol.rank,
            });
        }
        let change = (previous - objective).abs() / objective.max(f64::MIN_POSITIVE);
        if change < TOL {
            let mut out = best.unwrap();
            out.sweeps = sweep;
            out.converged = true;
            return Ok(out);
        }
        previous = objective;
        let floor = residual.iter().map(|r| r.norm()).fold(0.0, f64::max) * 1e-10;
        for (w, r) in weights.iter_mut().zip(&residual) {
            *w = r.norm().max(floor).max(f64::MIN_POSITIVE).powf((p - 2.0) / 2.0);
        }
    }
    let mut out = best.unwrap();
    out.sweeps = MAX_SWEEPS;
    Ok(out)
}

pub fn residual_vector(columns: &[Vec<C>], coeffs: &[C], b: &[C]) -> Vec<C> {
    let mut r: Vec<C> = b.iter().map(|v| -v).collect();
    for (col, c) in columns.iter().zip(coeffs) {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        for (ri, v) in r.iter_mut().zip(col) {
            *ri += v * c;
        }
    }
    r
}

fn p_norm(v: &[C], p: f64) -> f64 {
    let scale = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x.norm() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn norm2(v: &[C]) -> f64 {
    let scale = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale).norm_sqr()).sum::<f64>().sqrt()
}

// Turns x into (beta, 0, ..., 0) in place and returns the unit Householder vector.
fn householder(x: &mut [C]) -> Vec<C> {
    let nrm = norm2(x);
    let x0 = x[0];
    let phase = if x0.norm() == 0.0 { C::new(1.0, 0.0) } else { x0 / x0.norm() };
    let beta = -phase * nrm;
    let mut v: Vec<C> = x.to_vec();
    v[0] -= beta;
    let vn = norm2(&v);
    if vn > 0.0 {
        v.iter_mut().for_each(|c| *c /= vn);
    }
    x[0] = beta;
    x[1..].iter_mut().for_each(|c| *c = C::new(0.0, 0.0));
    v
}

// y <- (I - 2 v v^H) y
fn reflect(v: &[C], y: &mut [C]) {
    let mut dot = C::new(0.0, 0.0);
    for (vi, yi) in v.iter().zip(y.iter()) {
        dot += vi.conj() * yi;
    }
    if dot.re == 0.0 && dot.im == 0.0 {
        return;
    }
    let two_dot = dot * 2.0;
    for (vi, yi) in v.iter().zip(y.iter_mut()) {
        *yi -= vi * two_dot;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn det_of_known_matrices() {
        let a = Square::from_fn(2, |i, j| [[c(1.0), c(0.0)], [c(1.0), c(0.5)]][i][j]);
        assert!((Lu::factor(&a).log_det().to_complex() - c(0.5)).norm() < 1e-15);
        let p = Square::from_fn(2, |i, j| if i != j { c(1.0) } else { c(0.0) });
        assert!((Lu::factor(&p).log_det().to_complex() - c(-1.0)).norm() < 1e-15);
        let z = Square::from_fn(3, |i, _| c(i as f64));
        assert!(Lu::factor(&z).log_det().is_zero());
    }

    #[test]
    fn log_det_survives_underflow() {
        let n = 60;
        let a = Square::from_fn(n, |i, j| if i == j { c(1e-10) } else { c(0.0) });
        let d = Lu::factor(&a).log_det();
        assert!((d.log_magnitude - n as f64 * 1e-10f64.ln()).abs() < 1e-9);
        assert_eq!(d.to_complex(), c(0.0));
    }

    #[test]
    fn solve_and_condition() {
        let a = Square::from_fn(3, |i, j| C::new((i + 2 * j) as f64 + if i == j { 5.0 } else { 0.0 }, (i * j) as f64));
        let x = vec![C::new(1.0, -1.0), C::new(2.0, 0.5), C::new(-0.5, 3.0)];
        let b: Vec<C> = (0..3).map(|i| (0..3).map(|j| a.get(i, j) * x[j]).sum()).collect();
        let lu = Lu::factor(&a);
        let sol = lu.solve(&b).unwrap();
        for (s, e) in sol.iter().zip(&x) {
            assert!((s - e).norm() < 1e-12);
        }
        assert!(lu.condition_1() >= 1.0);
        let id = Square::from_fn(4, |i, j| if i == j { c(1.0) } else { c(0.0) });
        assert_eq!(Lu::factor(&id).condition_1(), 1.0);
    }

    #[test]
    fn least_squares_line_fit() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let ones: Vec<C> = xs.iter().map(|_| c(1.0)).collect();
        let lin: Vec<C> = xs.iter().map(|&x| c(x)).collect();
        let b: Vec<C> = xs.iter().map(|&x| c(2.0 - 3.0 * x)).collect();
        let sol = least_squares(&[ones.clone(), lin.clone()], &b).unwrap();
        assert!((sol.coeffs[0] - c(2.0)).norm() < 1e-12);
        assert!((sol.coeffs[1] - c(-3.0)).norm() < 1e-12);
        assert!(sol.residual_norm < 1e-12);
        // duplicated column is detected as rank deficiency
        let sol = least_squares(&[ones, lin.clone(), lin], &b).unwrap();
        assert_eq!(sol.rank, 2);
        assert!(sol.residual_norm < 1e-12);
    }

    #[test]
    fn irls_matches_ls_at_p2_and_handles_outliers() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let ones: Vec<C> = xs.iter().map(|_| c(1.0)).collect();
        let mut b: Vec<C> = xs.iter().map(|_| c(1.0)).collect();
        b[10] = c(100.0);
        let l2 = least_squares(std::slice::from_ref(&ones), &b).unwrap();
        let l15 = irls(&[ones], &b, 1.2).unwrap();
        // the ℓ^1.2 fit is pulled far less toward the outlier
        assert!((l15.coeffs[0] - c(1.0)).norm() < (l2.coeffs[0] - c(1.0)).norm());
    }

    proptest! {
        #[test]
        fn lu_det_matches_cofactor_3x3(vals in prop::collection::vec(-3.0f64..3.0, 9)) {
            let a = Square::from_fn(3, |i, j| c(vals[i * 3 + j]));
            let g = |i: usize, j: usize| vals[i * 3 + j];
            let det = g(0,0) * (g(1,1) * g(2,2) - g(1,2) * g(2,1)) - g(0,1) * (g(1,0) * g(2,2) - g(1,2) * g(2,0))
                + g(0,2) * (g(1,0) * g(2,1) - g(1,1) * g(2,0));
            let lu = Lu::factor(&a).log_det().to_complex();
            prop_assert!((lu.re - det).abs() <= 1e-12 * (1.0 + det.abs()) * 30.0);
        }

        #[test]
        fn nested_spans_do_not_increase_residual(vals in prop::collection::vec(-1.0f64..1.0, 30), k in 1usize..4) {
            let cols: Vec<Vec<C>> = (0..5).map(|j| (0..6).map(|i| c(vals[(i * 5 + j) % 30] + (i * j) as f64 * 0.1)).collect()).collect();
            let b: Vec<C> = (0..6).map(|i| c(vals[(i * 7) % 30])).collect();
            let r1 = least_squares(&cols[..k], &b).unwrap().residual_norm;
            let r2 = least_squares(&cols[..k + 1], &b).unwrap().residual_norm;
            prop_assert!(r2 <= r1 + 1e-12);
        }
    }
}
