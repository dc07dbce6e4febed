//! Coordinate descent for the penalised least-squares problem
//!
//! ```text
//! minimise (1/2n) |y - X b|^2 + lambda * sum_j w_j |b_j|
//! ```
//!
//! with `w_j = 0` for unpenalised columns and `w_j = 1` otherwise. Each solve
//! screens coordinates with the sequential strong rule, runs cyclic updates
//! on the surviving set, and re-checks the KKT conditions on the discarded
//! coordinates before returning.

use super::{axpy, dot, soft_threshold};
use crate::{DenseMatrix, DenseVector, Error, Result};

pub struct LassoProblem<'a> {
    x: &'a DenseMatrix,
    y: &'a DenseVector,
    /// `|X_j|^2 / n`
    col_sq: Vec<f64>,
    penalised: Vec<bool>,
    y_sq: f64,
}

/// Coefficients and the matching residual `y - X b`.
#[derive(Debug, Clone)]
pub struct LassoState {
    pub beta: Vec<f64>,
    pub resid: Vec<f64>,
}

impl LassoState {
    pub fn rss(&self) -> f64 {
        dot(&self.resid, &self.resid)
    }
}

/// Convergence controls for a single penalised solve.
#[derive(Debug, Clone, Copy)]
pub struct CdControl {
    /// Stop when every coordinate move changes the fit by less than
    /// `tolerance * |y|^2 / n` in squared norm.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for CdControl {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_sweeps: 100_000,
        }
    }
}

impl<'a> LassoProblem<'a> {
    pub fn new(x: &'a DenseMatrix, y: &'a DenseVector, unpenalised: &[usize]) -> Result<Self> {
        let (n, p) = x.shape();
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: y.len() });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("design has no rows".into()));
        }
        let mut penalised = vec![true; p];
        for &j in unpenalised {
            if j >= p {
                return Err(Error::InvalidArgument(format!("unpenalised column {j} out of range")));
            }
            penalised[j] = false;
        }
        let col_sq = (0..p)
            .map(|j| {
                let c = x.column(j);
                c.dot(&c) / n as f64
            })
            .collect();
        Ok(Self {
            x,
            y,
            col_sq,
            penalised,
            y_sq: y.dot(y),
        })
    }

    pub fn nobs(&self) -> usize {
        self.x.nrows()
    }

    fn col(&self, j: usize) -> &[f64] {
        let n = self.x.nrows();
        &self.x.as_slice()[j * n..(j + 1) * n]
    }

    /// State with every penalised coefficient at zero and the unpenalised
    /// ones fitted by least squares.
    pub fn null_state(&self, control: &CdControl) -> Result<LassoState> {
        let mut state = LassoState {
            beta: vec![0.0; self.x.ncols()],
            resid: self.y.as_slice().to_vec(),
        };
        let free: Vec<usize> = (0..self.x.ncols()).filter(|&j| !self.penalised[j]).collect();
        if !free.is_empty() {
            self.cycle_until_converged(&free, f64::INFINITY, &mut state, control)?;
        }
        Ok(state)
    }

    /// Smallest penalty at which every penalised coefficient is zero.
    pub fn lambda_max(&self, null: &LassoState) -> f64 {
        let n = self.nobs() as f64;
        (0..self.x.ncols())
            .filter(|&j| self.penalised[j])
            .map(|j| dot(self.col(j), &null.resid).abs() / n)
            .fold(0.0, f64::max)
    }

    /// Solve at `lambda`, warm-started from `state`, which must be the
    /// solution at `lambda_prev` (or any state for a cold start, with
    /// `lambda_prev = lambda`).
    pub fn solve(&self, lambda: f64, lambda_prev: f64, state: &mut LassoState, control: &CdControl) -> Result<usize> {
        let p = self.x.ncols();
        let n = self.nobs() as f64;
        let cutoff = 2.0 * lambda - lambda_prev;
        let mut grad: Vec<f64> = (0..p).map(|j| dot(self.col(j), &state.resid).abs() / n).collect();
        let mut strong: Vec<bool> = (0..p)
            .map(|j| !self.penalised[j] || state.beta[j] != 0.0 || grad[j] >= cutoff)
            .collect();
        let mut sweeps = 0;
        loop {
            let set: Vec<usize> = (0..p).filter(|&j| strong[j]).collect();
            sweeps += self.cycle_until_converged(&set, lambda, state, control)?;
            let mut violated = false;
            for j in 0..p {
                if strong[j] {
                    continue;
                }
                grad[j] = dot(self.col(j), &state.resid).abs() / n;
                if grad[j] > lambda * (1.0 + 1e-12) {
                    strong[j] = true;
                    violated = true;
                }
            }
            if !violated {
                return Ok(sweeps);
            }
        }
    }

    fn cycle_until_converged(
        &self,
        set: &[usize],
        lambda: f64,
        state: &mut LassoState,
        control: &CdControl,
    ) -> Result<usize> {
        let thresh = control.tolerance * (self.y_sq / self.nobs() as f64).max(f64::MIN_POSITIVE);
        let mut sweeps = 0;
        loop {
            // full pass over the working set
            let change = self.sweep(set, lambda, state);
            sweeps += 1;
            if change <= thresh {
                return Ok(sweeps);
            }
            // then iterate on the nonzero coordinates only
            let active: Vec<usize> = set.iter().copied().filter(|&j| state.beta[j] != 0.0).collect();
            loop {
                let change = self.sweep(&active, lambda, state);
                sweeps += 1;
                if change <= thresh {
                    break;
                }
                if sweeps >= control.max_sweeps {
                    return Err(self.not_converged(sweeps));
                }
            }
            if sweeps >= control.max_sweeps {
                return Err(self.not_converged(sweeps));
            }
        }
    }

    fn not_converged(&self, sweeps: usize) -> Error {
        Error::NotConverged {
            solver: "coordinate descent",
            iterations: sweeps,
            primal_residual: f64::NAN,
            gap: f64::NAN,
        }
    }

    /// One cyclic pass; returns the largest squared change in fitted values
    /// per observation.
    fn sweep(&self, set: &[usize], lambda: f64, state: &mut LassoState) -> f64 {
        let n = self.nobs() as f64;
        let mut max_change: f64 = 0.0;
        for &j in set {
            let cj = self.col_sq[j];
            if cj == 0.0 {
                continue;
            }
            let xj = self.col(j);
            let old = state.beta[j];
            let rho = dot(xj, &state.resid) / n + cj * old;
            let new = if self.penalised[j] {
                soft_threshold(rho, lambda) / cj
            } else {
                rho / cj
            };
            if new != old {
                let delta = new - old;
                axpy(-delta, xj, &mut state.resid);
                state.beta[j] = new;
                max_change = max_change.max(delta * delta * cj);
            }
        }
        max_change
    }
}

/// Geometric grid of `size` penalties from `lambda_max` down to
/// `ratio * lambda_max`.
pub fn geometric_grid(lambda_max: f64, ratio: f64, size: usize) -> Vec<f64> {
    if size == 1 {
        return vec![lambda_max];
    }
    let step = ratio.ln() / (size - 1) as f64;
    (0..size).map(|k| lambda_max * (step * k as f64).exp()).collect()
}

/// Penalised solution at a single `lambda`, starting from zero.
pub fn lasso_fit(x: &DenseMatrix, y: &DenseVector, lambda: f64, unpenalised: &[usize]) -> Result<DenseVector> {
    let prob = LassoProblem::new(x, y, unpenalised)?;
    let control = CdControl::default();
    let mut state = prob.null_state(&control)?;
    let lmax = prob.lambda_max(&state);
    if lambda < lmax {
        // walk down a short path for a good warm start
        let mut prev = lmax;
        for lam in geometric_grid(lmax, (lambda / lmax).max(1e-12), 20).into_iter().skip(1) {
            prob.solve(lam, prev, &mut state, &control)?;
            prev = lam;
        }
        if prev != lambda {
            prob.solve(lambda, prev, &mut state, &control)?;
        }
    }
    Ok(DenseVector::from_vec(state.beta))
}
