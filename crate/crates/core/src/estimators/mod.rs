//! The two-norm estimator and its regression and matrix instances.
//!
//! Every estimator follows the same two steps: a noise level from the ratio
//! of a norm on the data to the same norm on an independent Gaussian draw,
//! then the smallest-norm mean inside the residual ball of squared radius
//! `n * sigma_hat^2`.

mod bounds;
mod matrix;
mod regression;

pub use bounds::{risk_bounds, RiskBound, RiskProblem};
pub use matrix::{matrix_fit, matrix_fit_with_noise, MatrixFit};
pub use regression::{regression_fit, regression_fit_with_noise, support_threshold, RegressionFit};

use crate::norms::{NormKind, NormPair};
use crate::rng::GaussianSampler;
use crate::solvers::{l1_constrained_ls, nuclear_constrained, shrinkage_level, SolverSettings};
use crate::{DenseMatrix, DenseVector, Error, Result};

/// `K(Y) / K(Z)` for a pure-noise draw `Z`.
pub fn estimate_sigma(k_tilde: &NormKind, y: &DenseVector, z: &DenseVector) -> Result<f64> {
    if y.len() != z.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: z.len() });
    }
    let kz = k_tilde.eval(z)?;
    if kz == 0.0 || !kz.is_finite() {
        return Err(Error::DegenerateNoise);
    }
    Ok(k_tilde.eval(y)? / kz)
}

#[derive(Debug, Clone)]
pub struct AbstractFit {
    pub mu_hat: DenseVector,
    pub sigma_hat: f64,
}

/// Two-norm estimator with a freshly drawn `Z ~ N(0, I_n)`.
pub fn abstract_fit(pair: &NormPair, y: &DenseVector, sampler: &GaussianSampler, settings: &SolverSettings) -> Result<AbstractFit> {
    let z = sampler.vector(y.len());
    abstract_fit_with_noise(pair, y, &z, settings)
}

/// Two-norm estimator with a caller-supplied noise draw.
///
/// The minimisation step is only available for norms with a dedicated
/// budget-constrained solver: l1, l2, nuclear and design norms.
pub fn abstract_fit_with_noise(pair: &NormPair, y: &DenseVector, z: &DenseVector, settings: &SolverSettings) -> Result<AbstractFit> {
    let n = y.len();
    if let Some(d) = pair.dimension() {
        if d != n {
            return Err(Error::DimensionMismatch { expected: d, got: n });
        }
    }
    let sigma_hat = estimate_sigma(&pair.k_tilde, y, z)?;
    let budget = n as f64 * sigma_hat * sigma_hat;
    let mu_hat = constrained_minimiser(&pair.k, y, budget, settings)?;
    Ok(AbstractFit { mu_hat, sigma_hat })
}

/// `argmin { K(v) : |y - v|^2 <= budget }`.
fn constrained_minimiser(k: &NormKind, y: &DenseVector, budget: f64, settings: &SolverSettings) -> Result<DenseVector> {
    let n = y.len();
    if matches!(k, NormKind::Sup | NormKind::Spectral { .. }) {
        return Err(Error::InvalidArgument("no budget-constrained minimiser for this norm".into()));
    }
    if y.norm_squared() <= budget {
        return Ok(DenseVector::zeros(n));
    }
    match k {
        NormKind::L1 => {
            let mut mags: Vec<f64> = y.iter().map(|v| v.abs()).collect();
            mags.sort_by(|a, b| b.total_cmp(a));
            let theta = shrinkage_level(&mags, budget);
            Ok(y.map(|v| crate::solvers::soft_threshold(v, theta)))
        }
        NormKind::L2 => {
            let ny = y.norm();
            Ok(y * (1.0 - budget.sqrt() / ny))
        }
        NormKind::Nuclear { rows, cols } => {
            let m = DenseMatrix::from_column_slice(*rows, *cols, y.as_slice());
            let r = nuclear_constrained(&m, budget)?;
            Ok(DenseVector::from_column_slice(r.m_hat.as_slice()))
        }
        NormKind::Design(d) => {
            let beta = l1_constrained_ls(d.matrix(), y, budget, settings)?;
            Ok(d.matrix() * beta)
        }
        NormKind::Sup | NormKind::Spectral { .. } => unreachable!(),
    }
}
