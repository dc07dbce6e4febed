//! Convex optimisation kernels used by the estimators.

mod basis_pursuit;
mod interior_point;
mod l1_constrained;
pub mod lasso;
mod linalg;
mod nuclear;

pub use basis_pursuit::{basis_pursuit, BasisPursuit, BasisPursuitResult, BpMethod};
pub use l1_constrained::l1_constrained_ls;
pub use linalg::{column_space_projection, default_rank_tolerance, numerical_rank, orthonormal_column_basis, svd, Svd};
pub use nuclear::{nuclear_constrained, shrinkage_level, NuclearShrinkage};

use crate::{Error, Result};

/// Iteration and accuracy controls shared by the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverSettings {
    pub max_iterations: usize,
    /// Relative feasibility tolerance for equality constraints.
    pub primal_tolerance: f64,
    /// Relative duality-gap tolerance.
    pub dual_tolerance: f64,
    /// Relative tolerance on attaining a residual budget.
    pub budget_root_tolerance: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            primal_tolerance: 1e-6,
            dual_tolerance: 1e-6,
            budget_root_tolerance: 1e-4,
        }
    }
}

impl SolverSettings {
    /// Same settings with every tolerance set to `tol`.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.primal_tolerance = tol;
        self.dual_tolerance = tol;
        self.budget_root_tolerance = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let tols = [self.primal_tolerance, self.dual_tolerance, self.budget_root_tolerance];
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        if tols.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidArgument("solver tolerances must be positive and finite".into()));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators so the loop vectorises
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let k = 4 * i;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
