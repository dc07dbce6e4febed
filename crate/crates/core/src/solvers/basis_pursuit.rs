//! Exact-constraint l1 minimisation `min |b|_1 s.t. A b = y`.
//!
//! Two methods share one interface. The default is a primal-dual interior
//! point method on the standard-form LP (see `interior_point`). The
//! alternative is over-relaxed ADMM: alternate the Euclidean projection onto the affine set
//! `{A b = y}` (through a Cholesky factor of `A A^T`) with the l1 proximal
//! step, adapting the penalty by residual balancing. The scaled dual iterate
//! maps to an LP dual point `v` with `|A^T v|_inf <= 1`; the iteration stops
//! once the primal residual and the duality gap `|b|_1 - y.v` are both small.
//! Whenever the support of the iterate changes we also try to polish: solve
//! the equations restricted to that support and accept the result if it comes
//! with a dual certificate, which usually terminates far earlier than the raw
//! splitting iterates would.

use nalgebra::Cholesky;
use nalgebra::Dyn;

use super::interior_point::{interior_point, ColumnSplit};
use super::{soft_threshold, SolverSettings};
use crate::{DenseMatrix, DenseVector, Error, Result};

const RELAXATION: f64 = 1.6;
const CHECK_EVERY: usize = 10;
const POLISH_EVERY: usize = 25;

#[derive(Debug, Clone, PartialEq)]
pub struct BasisPursuitResult {
    pub beta: DenseVector,
    /// `|beta|_1`.
    pub objective: f64,
    /// Dual point `v` with `|A^T v|_inf <= 1`; `y.v` lower-bounds the optimum.
    pub dual_certificate: DenseVector,
    pub iterations: usize,
}

impl BasisPursuitResult {
    /// Duality gap `objective - y.v` of the returned certificate.
    pub fn gap(&self, y: &DenseVector) -> f64 {
        self.objective - y.dot(&self.dual_certificate)
    }
}

/// Basis pursuit for a fixed constraint matrix; the Gram factorisation is
/// shared across right-hand sides.
pub struct BasisPursuit<'a> {
    a: &'a DenseMatrix,
    gram: Cholesky<f64, Dyn>,
    settings: SolverSettings,
    method: BpMethod,
    columns: ColumnSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BpMethod {
    #[default]
    InteriorPoint,
    Admm,
}

pub fn basis_pursuit(a: &DenseMatrix, y: &DenseVector, settings: &SolverSettings) -> Result<BasisPursuitResult> {
    BasisPursuit::new(a, settings)?.solve(y)
}

impl<'a> BasisPursuit<'a> {
    pub fn new(a: &'a DenseMatrix, settings: &SolverSettings) -> Result<Self> {
        Self::with_method(a, settings, BpMethod::default())
    }

    pub fn with_method(a: &'a DenseMatrix, settings: &SolverSettings, method: BpMethod) -> Result<Self> {
        settings.validate()?;
        let (n, q) = a.shape();
        if n == 0 {
            return Err(Error::InvalidArgument("constraint matrix has no rows".into()));
        }
        if q < n {
            return Err(Error::RankDeficient { rank: q, required: n });
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("constraint matrix has non-finite entries".into()));
        }
        let g = a * a.transpose();
        let gmax = g.diagonal().max();
        if gmax <= 0.0 {
            return Err(Error::RankDeficient { rank: 0, required: n });
        }
        let gram = Cholesky::new(g).ok_or(Error::RankDeficient { rank: n - 1, required: n })?;
        let l = gram.l_dirty();
        let lmin = (0..n).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
        if lmin * lmin <= 1e-13 * gmax {
            return Err(Error::RankDeficient { rank: n - 1, required: n });
        }
        Ok(Self {
            a,
            gram,
            settings: *settings,
            method,
            columns: ColumnSplit::new(a),
        })
    }

    pub fn solve(&self, y: &DenseVector) -> Result<BasisPursuitResult> {
        let n = self.a.nrows();
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: y.len() });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("right-hand side has non-finite entries".into()));
        }
        if y.norm() == 0.0 {
            return Ok(BasisPursuitResult {
                beta: DenseVector::zeros(self.a.ncols()),
                objective: 0.0,
                dual_certificate: DenseVector::zeros(n),
                iterations: 0,
            });
        }
        match self.method {
            BpMethod::Admm => self.solve_admm(y),
            BpMethod::InteriorPoint => {
                let ip = interior_point(self.a, &self.columns, y, &self.settings)?;
                let support = support_of(&ip.beta);
                if !support.is_empty() && support.len() <= n {
                    if let Some(res) = self.polish(y, &support, &ip.dual, ip.iterations) {
                        return Ok(res);
                    }
                }
                let objective = ip.beta.lp_norm(1);
                let v = &ip.dual / self.a.tr_mul(&ip.dual).amax().max(1.0);
                Ok(BasisPursuitResult {
                    beta: ip.beta,
                    objective,
                    dual_certificate: v,
                    iterations: ip.iterations,
                })
            }
        }
    }

    fn solve_admm(&self, y: &DenseVector) -> Result<BasisPursuitResult> {
        let a = self.a;
        let (n, q) = a.shape();
        let ynorm = y.norm();
        let s = &self.settings;

        // least-norm solution fixes the scale of the problem
        let x_ln = a.tr_mul(&self.gram.solve(y));
        let scale = x_ln.amax();
        let mut rho = 10.0 / scale;

        let mut z = x_ln.clone();
        let mut u = DenseVector::zeros(q);
        let mut x = DenseVector::zeros(q);
        let mut w = DenseVector::zeros(q);
        let mut z_old = DenseVector::zeros(q);
        let mut aw = DenseVector::zeros(n);
        let mut last_support: Vec<usize> = Vec::new();
        let mut best_gap = f64::INFINITY;
        let mut best_res = f64::INFINITY;

        for it in 1..=s.max_iterations {
            // x = proj_{Ab=y}(z - u)
            w.copy_from(&z);
            w -= &u;
            aw.gemv(1.0, a, &w, 0.0);
            aw -= y;
            let t = self.gram.solve(&aw);
            x.copy_from(&w);
            x.gemv_tr(-1.0, a, &t, 1.0);

            z_old.copy_from(&z);
            let tau = 1.0 / rho;
            for i in 0..q {
                let xh = RELAXATION * x[i] + (1.0 - RELAXATION) * z_old[i];
                let zi = soft_threshold(xh + u[i], tau);
                u[i] += xh - zi;
                z[i] = zi;
            }

            if it % POLISH_EVERY == 0 {
                let support: Vec<usize> = support_of(&z);
                if !support.is_empty() && support.len() <= n && support != last_support {
                    let v_hint = self.dual_point(&u, rho);
                    if let Some(res) = self.polish(y, &support, &v_hint, it) {
                        return Ok(res);
                    }
                    last_support = support;
                }
            }

            if it % CHECK_EVERY == 0 {
                let r = (&x - &z).norm();
                let sd = rho * (&z - &z_old).norm();
                let r_rel = r / x.norm().max(z.norm()).max(f64::MIN_POSITIVE);
                let s_rel = sd / (rho * u.norm()).max(f64::MIN_POSITIVE);

                let mut az = DenseVector::zeros(n);
                az.gemv(1.0, a, &z, 0.0);
                let primal_res = (az - y).norm();
                let v = self.dual_point(&u, rho);
                let obj = z.lp_norm(1);
                let gap = obj - y.dot(&v);
                best_gap = best_gap.min(gap.abs() / obj.max(f64::MIN_POSITIVE));
                best_res = best_res.min(primal_res / ynorm);
                if primal_res <= s.primal_tolerance * ynorm && gap.abs() <= s.dual_tolerance * obj {
                    return Ok(BasisPursuitResult {
                        objective: obj,
                        beta: z,
                        dual_certificate: v,
                        iterations: it,
                    });
                }

                if r_rel > 10.0 * s_rel {
                    rho *= 2.0;
                    u *= 0.5;
                } else if s_rel > 10.0 * r_rel {
                    rho *= 0.5;
                    u *= 2.0;
                }
            }
        }
        Err(Error::NotConverged {
            solver: "basis pursuit",
            iterations: s.max_iterations,
            primal_residual: best_res,
            gap: best_gap,
        })
    }

    /// Dual-feasible point from the scaled ADMM multiplier `u`.
    fn dual_point(&self, u: &DenseVector, rho: f64) -> DenseVector {
        let mut au = DenseVector::zeros(self.a.nrows());
        au.gemv(rho, self.a, u, 0.0);
        let v = self.gram.solve(&au);
        let atv = self.a.tr_mul(&v);
        v / atv.amax().max(1.0)
    }

    /// Solve on a candidate support and keep the answer only if a dual
    /// certificate proves it optimal.
    fn polish(&self, y: &DenseVector, support: &[usize], v_hint: &DenseVector, it: usize) -> Option<BasisPursuitResult> {
        let a = self.a;
        let (n, q) = a.shape();
        let ynorm = y.norm();
        let a_s = a.select_columns(support);
        let qr = nalgebra::QR::new(a_s.clone());
        let r = qr.r();
        let rmax = r.diagonal().amax();
        if (0..support.len()).any(|i| r[(i, i)].abs() <= 1e-12 * rmax) {
            return None;
        }
        let qty = qr.q().tr_mul(y);
        let beta_s = r.solve_upper_triangular(&qty)?;
        let resid = (&a_s * &beta_s - y).norm();
        if resid > 1e-3 * self.settings.primal_tolerance * ynorm {
            return None;
        }
        let bmax = beta_s.amax();
        let active: Vec<usize> = (0..support.len()).filter(|&i| beta_s[i].abs() > 1e-13 * bmax).collect();
        if active.is_empty() {
            return None;
        }
        let a_t = a_s.select_columns(&active);
        let signs = DenseVector::from_iterator(active.len(), active.iter().map(|&i| beta_s[i].signum()));
        // nearest point to the ADMM dual satisfying A_T^T v = sign(beta_T)
        let gram_t = a_t.tr_mul(&a_t);
        let chol = Cholesky::new(gram_t)?;
        let corr = chol.solve(&(signs - a_t.tr_mul(v_hint)));
        let mut v = v_hint + &a_t * corr;
        let infeas = a.tr_mul(&v).amax();
        if !infeas.is_finite() {
            return None;
        }
        v /= infeas.max(1.0);

        let mut beta = DenseVector::zeros(q);
        for (k, &j) in support.iter().enumerate() {
            beta[j] = beta_s[k];
        }
        let objective = beta.lp_norm(1);
        let gap = objective - y.dot(&v);
        if gap.abs() > self.settings.dual_tolerance * objective {
            return None;
        }
        debug_assert_eq!(v.len(), n);
        Some(BasisPursuitResult {
            beta,
            objective,
            dual_certificate: v,
            iterations: it,
        })
    }
}

fn support_of(z: &DenseVector) -> Vec<usize> {
    let zmax = z.amax();
    if zmax == 0.0 {
        return Vec::new();
    }
    z.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > 1e-9 * zmax)
        .map(|(i, _)| i)
        .collect()
}
