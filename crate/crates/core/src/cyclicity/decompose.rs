use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::delta::{delta_matrix, rational_spec};
use crate::error::{Error, Result};
use crate::expr::FuncExpr;
use crate::linalg::{Lu, Square};
use crate::numerics::GridSpec;

type C = Complex64;

/// Orbit matrices on the coset grid `t_i = (2i + 1)/(2Mq)`, `i < M`.
///
/// Row `k` of the matrix at `t_i` holds `T^j f(t_i + k/q)`; the points
/// `t_i + k/q` are exactly the nodes `i + kM` of the midpoint grid with `Mq` points.
pub(crate) struct CosetSystem {
    pub r: u64,
    pub q: u64,
    pub m: usize,
    pub t: Vec<f64>,
    pub matrices: Vec<Square>,
    pub lus: Vec<Lu>,
    pub log_det: Vec<f64>,
    pub max_entry: Vec<f64>,
    /// `w(t_i) = ∏_k φ(t_i + k/q)`.
    pub w: Vec<C>,
}

impl CosetSystem {
    pub fn build(f: &FuncExpr, weight: &FuncExpr, r: u64, q: u64, grid_n: usize) -> Result<Self> {
        let (spec, r, q) = rational_spec(weight, r, q)?;
        let m = grid_n.div_ceil(q as usize).max(1);
        let den = BigInt::from(2 * m as u64 * q);
        let built: Vec<(Square, Lu, f64, f64, C)> = (0..m)
            .into_par_iter()
            .map(|i| {
                let t = BigRational::new(BigInt::from(2 * i + 1), den.clone());
                // rows in coset order t + k/q; a row permutation of the Δ matrix
                let mat = delta_matrix(&spec, f, 1, q, &t)?;
                let lu = Lu::factor(&mat);
                let log_det = lu.log_det().log_magnitude;
                let max_entry = mat.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let mut w = C::new(1.0, 0.0);
                for k in 0..q {
                    let y = (2 * (i + k as usize * m) + 1) as f64 / (2 * m as u64 * q) as f64;
                    w *= weight.evaluate(y)?;
                }
                Ok((mat, lu, log_det, max_entry, w))
            })
            .collect::<Result<_>>()?;
        let t = (0..m).map(|i| (2 * i + 1) as f64 / (2 * m as u64 * q) as f64).collect();
        let mut sys = CosetSystem {
            r,
            q,
            m,
            t,
            matrices: Vec::with_capacity(m),
            lus: Vec::with_capacity(m),
            log_det: Vec::with_capacity(m),
            max_entry: Vec::with_capacity(m),
            w: Vec::with_capacity(m),
        };
        for (mat, lu, ld, me, w) in built {
            sys.matrices.push(mat);
            sys.lus.push(lu);
            sys.log_det.push(ld);
            sys.max_entry.push(me);
            sys.w.push(w);
        }
        Ok(sys)
    }

    /// Size `Mq` of the construction grid.
    pub fn grid(&self) -> GridSpec {
        GridSpec { n: self.m * self.q as usize }
    }

    /// Membership of `t_i` in `Ω_n = {|Δ| < 1/n} ∪ {some |T^j f| > n}`.
    pub fn omega(&self, n: f64) -> Vec<bool> {
        let log_inv_n = -n.ln();
        self.log_det.iter().zip(&self.max_entry).map(|(&ld, &me)| ld < log_inv_n || me > n).collect()
    }

    /// `F_j(t_i) = Σ_k |T^j f(t_i + k/q)|`.
    pub fn column_weight(&self, j: usize) -> Vec<f64> {
        let q = self.q as usize;
        self.matrices.iter().map(|mat| (0..q).map(|k| mat.get(k, j).norm()).sum()).collect()
    }

    /// Node index on the construction grid of `t_i + k/q`.
    pub fn node(&self, i: usize, k: usize) -> usize {
        i + k * self.m
    }

    /// Solves for the periodic components of the target values on the construction grid.
    pub fn decompose(&self, target: &[C], n: f64) -> PeriodicComponents {
        let q = self.q as usize;
        let in_omega = self.omega(n);
        let solved: Vec<(Vec<C>, f64, bool, f64)> = (0..self.m)
            .into_par_iter()
            .map(|i| {
                if in_omega[i] {
                    return (vec![C::new(0.0, 0.0); q], f64::NAN, false, 0.0);
                }
                let rhs: Vec<C> = (0..q).map(|k| target[self.node(i, k)]).collect();
                match self.lus[i].solve(&rhs) {
                    Ok(h) => {
                        let mat = &self.matrices[i];
                        let err = (0..q)
                            .map(|k| {
                                let rec: C = (0..q).map(|j| h[j] * mat.get(k, j)).sum();
                                (rec - rhs[k]).norm()
                            })
                            .fold(0.0, f64::max);
                        (h, self.lus[i].condition_1(), false, err)
                    }
                    Err(_) => (vec![C::new(0.0, 0.0); q], f64::INFINITY, true, 0.0),
                }
            })
            .collect();
        let mut h = vec![Vec::with_capacity(self.m); q];
        let mut condition = Vec::with_capacity(self.m);
        let mut flagged_samples = 0;
        let mut reconstruction_error = 0.0f64;
        let mut flagged = vec![false; self.m];
        for (i, (hi, cond, flag, err)) in solved.into_iter().enumerate() {
            for (j, v) in hi.into_iter().enumerate() {
                h[j].push(v);
            }
            condition.push(cond);
            if flag {
                flagged_samples += 1;
                flagged[i] = true;
            }
            reconstruction_error = reconstruction_error.max(err);
        }
        let omega_fraction = in_omega.iter().filter(|b| **b).count() as f64 / self.m as f64;
        PeriodicComponents {
            r: self.r,
            q: self.q,
            n,
            t: self.t.clone(),
            h,
            condition,
            in_omega,
            flagged,
            flagged_samples,
            omega_fraction,
            reconstruction_error,
        }
    }
}

/// Components `h_0..h_{q−1}` sampled on `[0, 1/q)` with `h = Σ h_j T^j f`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodicComponents {
    pub r: u64,
    pub q: u64,
    /// Truncation index of `Ω_n`.
    pub n: f64,
    pub t: Vec<f64>,
    /// `h[j][i] = h_j(t_i)`.
    pub h: Vec<Vec<C>>,
    /// 1-norm condition number of the solved system (`NaN` on `Ω`).
    pub condition: Vec<f64>,
    pub in_omega: Vec<bool>,
    /// Samples outside `Ω` whose system was exactly singular; excluded.
    pub flagged: Vec<bool>,
    pub flagged_samples: usize,
    pub omega_fraction: f64,
    /// Largest `|Σ_j h_j T^j f − h|` over solved samples.
    pub reconstruction_error: f64,
}

/// Decomposes `h` (set to zero on `Ω_n`) into 1/q-periodic components on a coset grid of about `grid.n` points.
pub fn decompose_target(h: &FuncExpr, f: &FuncExpr, weight: &FuncExpr, r: u64, q: u64, n: f64, grid: GridSpec) -> Result<PeriodicComponents> {
    if !(n >= 1.0) {
        return Err(Error::precondition("truncation index n must be >= 1"));
    }
    let sys = CosetSystem::build(f, weight, r, q, grid.n)?;
    let target = sys.grid().sample(h)?;
    Ok(sys.decompose(&target, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_function;

    fn func(s: &str) -> FuncExpr {
        parse_function(s).unwrap()
    }

    #[test]
    fn orbit_element_has_unit_component() {
        // h = T1 = x for α = 1/2
        let c = decompose_target(&func("x"), &func("1"), &FuncExpr::identity(), 1, 2, 1e6, GridSpec::new(400).unwrap()).unwrap();
        assert_eq!(c.omega_fraction, 0.0);
        for i in 0..c.t.len() {
            assert!(c.h[0][i].norm() < 1e-12);
            assert!((c.h[1][i] - C::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_target() {
        let c = decompose_target(&func("0"), &func("1 + x"), &FuncExpr::identity(), 2, 5, 1e6, GridSpec::new(200).unwrap()).unwrap();
        assert!(c.h.iter().flatten().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn reconstruction_off_omega() {
        let c = decompose_target(&func("sin(2*pi*x) + i*x^2"), &func("exp(x)"), &func("x + x^2"), 2, 5, 1e8, GridSpec::new(1000).unwrap()).unwrap();
        assert!(c.reconstruction_error < 1e-9, "{}", c.reconstruction_error);
        assert_eq!(c.flagged_samples, 0);
    }

    #[test]
    fn components_vanish_on_omega() {
        let c = decompose_target(&func("1"), &func("indicator(1/4, 1/2) + indicator(3/4, 1)"), &FuncExpr::identity(), 1, 2, 4.0, GridSpec::new(400).unwrap()).unwrap();
        assert!(c.omega_fraction >= 0.5);
        for i in 0..c.t.len() {
            if c.in_omega[i] {
                assert!(c.h.iter().all(|hj| hj[i].norm() == 0.0));
            }
        }
    }
}
