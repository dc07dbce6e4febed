use serde::{Deserialize, Serialize};

use crate::rng::GaussianSampler;
use crate::solvers::{column_space_projection, default_rank_tolerance, l1_constrained_ls, BasisPursuit, SolverSettings};
use crate::{DenseMatrix, DenseVector, Error, Result};

/// Output of the tuning-free sparse regression estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub beta_hat: Vec<f64>,
    pub sigma_hat: f64,
    /// `X beta_hat`.
    pub fitted: Vec<f64>,
    /// Indices with `|beta_hat_j|` above [`support_threshold`].
    pub support: Vec<usize>,
    /// Largest column norm divided by `sqrt(n)`.
    pub gamma: f64,
    /// Minimal l1 cost of representing `Y` with the augmented design.
    pub m1: f64,
    /// Same cost for the noise draw `Z`.
    pub m2: f64,
    pub rank_k: usize,
    /// `rank_k * sigma_hat^2`.
    pub budget: f64,
    /// `|Y' - X beta_hat|^2`, with `Y'` the projection of `Y` on the
    /// column space of `X`.
    pub residual_sq: f64,
    /// Sampler that produced `Z`, when it was drawn internally.
    pub sampler: Option<GaussianSampler>,
}

/// `1e-6 * max_j |beta_j|`, floored at `1e-8`.
pub fn support_threshold(beta: &[f64]) -> f64 {
    let bmax = beta.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    (1e-6 * bmax).max(1e-8)
}

pub fn regression_fit(x: &DenseMatrix, y: &DenseVector, sampler: &GaussianSampler, settings: &SolverSettings) -> Result<RegressionFit> {
    let z = sampler.vector(x.nrows());
    let mut fit = regression_fit_with_noise(x, y, &z, settings)?;
    fit.sampler = Some(*sampler);
    Ok(fit)
}

/// Regression estimator with a caller-supplied noise draw `z`.
pub fn regression_fit_with_noise(x: &DenseMatrix, y: &DenseVector, z: &DenseVector, settings: &SolverSettings) -> Result<RegressionFit> {
    settings.validate()?;
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return Err(Error::InvalidArgument("design must have at least one row and one column".into()));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: z.len() });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite entries in design or response".into()));
    }

    let sqrt_n = (n as f64).sqrt();
    let gamma = (0..p).map(|j| x.column(j).norm()).fold(0.0, f64::max) / sqrt_n;
    if gamma == 0.0 {
        return Err(Error::InvalidArgument("design matrix is identically zero".into()));
    }

    // [X | sqrt(n) gamma I_n] has full row rank by construction
    let mut augmented = DenseMatrix::zeros(n, p + n);
    augmented.columns_mut(0, p).copy_from(x);
    for i in 0..n {
        augmented[(i, p + i)] = sqrt_n * gamma;
    }
    let bp = BasisPursuit::new(&augmented, settings).map_err(|e| e.at("augmented design"))?;
    let m1 = bp.solve(y).map_err(|e| e.at("M1 basis pursuit"))?.objective;
    let m2 = bp.solve(z).map_err(|e| e.at("M2 basis pursuit"))?.objective;
    if m2 == 0.0 {
        return Err(Error::DegenerateNoise.at("M2 basis pursuit"));
    }
    let sigma_hat = m1 / m2;

    let (y_prime, rank_k) =
        column_space_projection(x, y, default_rank_tolerance(n, p)).map_err(|e| e.at("column space projection"))?;
    let budget = rank_k as f64 * sigma_hat * sigma_hat;
    let beta = l1_constrained_ls(x, &y_prime, budget, settings).map_err(|e| e.at("l1 constrained fit"))?;

    let fitted = x * &beta;
    let residual_sq = (&y_prime - &fitted).norm_squared();
    let beta_hat = beta.as_slice().to_vec();
    let thresh = support_threshold(&beta_hat);
    let support = (0..p).filter(|&j| beta_hat[j].abs() > thresh).collect();
    Ok(RegressionFit {
        beta_hat,
        sigma_hat,
        fitted: fitted.as_slice().to_vec(),
        support,
        gamma,
        m1,
        m2,
        rank_k,
        budget,
        residual_sq,
        sampler: None,
    })
}
