use serde::{Deserialize, Serialize};

use crate::rng::GaussianSampler;
use crate::solvers::{nuclear_constrained, svd};
use crate::{DenseMatrix, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFit {
    pub m_hat: DenseMatrix,
    pub sigma_hat: f64,
    /// Soft-threshold applied to the singular values of `Y`.
    pub theta: f64,
    pub nuclear_y: f64,
    pub nuclear_z: f64,
    /// `l * m * sigma_hat^2`.
    pub budget: f64,
    pub singular_values: Vec<f64>,
    pub sampler: Option<GaussianSampler>,
}

pub fn matrix_fit(y: &DenseMatrix, sampler: &GaussianSampler) -> Result<MatrixFit> {
    let z = sampler.matrix(y.nrows(), y.ncols());
    let mut fit = matrix_fit_with_noise(y, &z)?;
    fit.sampler = Some(*sampler);
    Ok(fit)
}

pub fn matrix_fit_with_noise(y: &DenseMatrix, z: &DenseMatrix) -> Result<MatrixFit> {
    let (l, m) = y.shape();
    if l == 0 || m == 0 {
        return Err(Error::InvalidArgument("matrix must be non-empty".into()));
    }
    if z.shape() != y.shape() {
        return Err(Error::DimensionMismatch {
            expected: l * m,
            got: z.len(),
        });
    }
    let nuclear_z: f64 = svd(z).map_err(|e| e.at("noise nuclear norm"))?.s.sum();
    if nuclear_z == 0.0 {
        return Err(Error::DegenerateNoise);
    }
    let sy = svd(y).map_err(|e| e.at("data nuclear norm"))?;
    let nuclear_y: f64 = sy.s.sum();
    let sigma_hat = nuclear_y / nuclear_z;
    let budget = (l * m) as f64 * sigma_hat * sigma_hat;
    let shrink = nuclear_constrained(y, budget).map_err(|e| e.at("nuclear shrinkage"))?;
    Ok(MatrixFit {
        m_hat: shrink.m_hat,
        sigma_hat,
        theta: shrink.theta,
        nuclear_y,
        nuclear_z,
        budget,
        singular_values: shrink.singular_values,
        sampler: None,
    })
}
