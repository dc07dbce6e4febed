use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimators::{matrix_fit, risk_bounds, RiskBound, RiskProblem};
use crate::rng::{derive_seed, GaussianSampler};
use crate::solvers::svd;
use crate::{DenseMatrix, Error, Result};

/// Low-rank matrix denoising setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixScenario {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub sigma: f64,
    /// Nuclear norm the signal is scaled to. Defaults to
    /// `2 * rank * sigma * (sqrt(rows) + sqrt(cols))`, which puts every
    /// signal singular value at twice the edge of the noise spectrum.
    pub nuclear_norm: Option<f64>,
    pub replications: usize,
    pub base_seed: u64,
    /// Monte Carlo draws for the spectral-norm moments in the bound.
    pub moment_samples: usize,
    pub parallel: bool,
}

impl MatrixScenario {
    pub fn new(rows: usize, cols: usize, rank: usize, sigma: f64, replications: usize, base_seed: u64) -> Self {
        Self {
            rows,
            cols,
            rank,
            sigma,
            nuclear_norm: None,
            replications,
            base_seed,
            moment_samples: 20,
            parallel: true,
        }
    }

    pub fn target_nuclear_norm(&self) -> f64 {
        self.nuclear_norm.unwrap_or_else(|| {
            2.0 * self.rank as f64 * self.sigma * ((self.rows as f64).sqrt() + (self.cols as f64).sqrt())
        })
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.replications == 0 {
            return Err(Error::InvalidArgument("rows, cols and replications must be at least 1".into()));
        }
        if self.rank > self.rows.min(self.cols) {
            return Err(Error::InvalidArgument(format!(
                "rank {} exceeds min({}, {})",
                self.rank, self.rows, self.cols
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument("sigma must be finite and >= 0".into()));
        }
        if !(self.target_nuclear_norm() >= 0.0 && self.target_nuclear_norm().is_finite()) {
            return Err(Error::InvalidArgument("nuclear norm target must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReplication {
    pub replication: usize,
    pub signal_seed: u64,
    pub noise_seed: u64,
    pub estimator_seed: u64,
    /// `|M_hat - M|_HS^2 / (l m)`
    pub risk: f64,
    /// `risk / sigma^2` (NaN when `sigma = 0`).
    #[serde(deserialize_with = "super::nan_if_null")]
    pub normalized_risk: f64,
    /// Normalised risk of returning `Y` itself.
    #[serde(deserialize_with = "super::nan_if_null")]
    pub naive_normalized_risk: f64,
    pub sigma_hat: f64,
    /// `(sigma_hat / sigma - 1)^2` (NaN when `sigma = 0`).
    #[serde(deserialize_with = "super::nan_if_null")]
    pub sigma_rel_error_sq: f64,
    /// `|Y - M_hat|_HS^2 - budget`, relative to the budget.
    #[serde(deserialize_with = "super::nan_if_null")]
    pub feasibility_gap: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub scenario: MatrixScenario,
    pub nuclear_norm: f64,
    #[serde(deserialize_with = "super::nan_if_null")]
    pub mean_normalized_risk: f64,
    #[serde(deserialize_with = "super::nan_if_null")]
    pub mean_naive_normalized_risk: f64,
    #[serde(deserialize_with = "super::nan_if_null")]
    pub mean_sigma_rel_error_sq: f64,
    /// Bound terms with unit constant; absent when `sigma = 0`.
    pub bound: Option<RiskBound>,
    /// Smallest constant making the bound cover the mean risk.
    pub fitted_constant: Option<f64>,
    pub failed: usize,
    pub records: Vec<std::result::Result<MatrixReplication, String>>,
}

/// `A B^T` with Gaussian factors, rescaled to nuclear norm `target`.
fn low_rank_signal(rows: usize, cols: usize, rank: usize, target: f64, seed: u64) -> Result<DenseMatrix> {
    if rank == 0 || target == 0.0 {
        return Ok(DenseMatrix::zeros(rows, cols));
    }
    let a = GaussianSampler::new(seed, 0).matrix(rows, rank);
    let b = GaussianSampler::new(seed, 1).matrix(cols, rank);
    let m = a * b.transpose();
    let nuc: f64 = svd(&m)?.s.sum();
    Ok(m * (target / nuc))
}

fn replicate(sc: &MatrixScenario, r: usize, target: f64) -> Result<MatrixReplication> {
    let t = Instant::now();
    let ri = r as u64;
    let signal_seed = derive_seed(sc.base_seed, ri, "signal");
    let noise_seed = derive_seed(sc.base_seed, ri, "noise");
    let estimator_seed = derive_seed(sc.base_seed, ri, "estimator");
    let m = low_rank_signal(sc.rows, sc.cols, sc.rank, target, signal_seed)?;
    let noise = GaussianSampler::new(noise_seed, 0).matrix(sc.rows, sc.cols) * sc.sigma;
    let y = &m + &noise;
    let fit = matrix_fit(&y, &GaussianSampler::new(estimator_seed, 0))?;
    let lm = (sc.rows * sc.cols) as f64;
    let risk = (&fit.m_hat - &m).norm_squared() / lm;
    let s2 = sc.sigma * sc.sigma;
    let per_sigma = |v: f64| if sc.sigma > 0.0 { v / s2 } else { f64::NAN };
    let resid = (&y - &fit.m_hat).norm_squared();
    Ok(MatrixReplication {
        replication: r,
        signal_seed,
        noise_seed,
        estimator_seed,
        risk,
        normalized_risk: per_sigma(risk),
        naive_normalized_risk: per_sigma(noise.norm_squared() / lm),
        sigma_hat: fit.sigma_hat,
        sigma_rel_error_sq: if sc.sigma > 0.0 {
            (fit.sigma_hat / sc.sigma - 1.0).powi(2)
        } else {
            f64::NAN
        },
        feasibility_gap: if fit.budget > 0.0 { (resid - fit.budget) / fit.budget } else { resid },
        elapsed_seconds: t.elapsed().as_secs_f64(),
    })
}

/// Repeated denoising of a random low-rank signal, with the risk bound
/// evaluated alongside.
pub fn run_matrix_scenario(sc: &MatrixScenario) -> Result<MatrixReport> {
    sc.validate()?;
    let target = sc.target_nuclear_norm();
    let run = |r| replicate(sc, r, target).map_err(|e| e.to_string());
    let records: Vec<_> = if sc.parallel {
        (0..sc.replications).into_par_iter().map(run).collect()
    } else {
        (0..sc.replications).map(run).collect()
    };
    let ok: Vec<&MatrixReplication> = records.iter().filter_map(|r| r.as_ref().ok()).collect();
    let mean = |f: &dyn Fn(&MatrixReplication) -> f64| {
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
        }
    };
    let mean_normalized_risk = mean(&|r| r.normalized_risk);
    let bound = if sc.sigma > 0.0 {
        Some(risk_bounds(&RiskProblem::Matrix {
            rows: sc.rows,
            cols: sc.cols,
            sigma: sc.sigma,
            nuclear_norm: target,
            moment_samples: sc.moment_samples,
            seed: derive_seed(sc.base_seed, 0, "moments"),
        })?)
    } else {
        None
    };
    Ok(MatrixReport {
        scenario: sc.clone(),
        nuclear_norm: target,
        mean_normalized_risk,
        mean_naive_normalized_risk: mean(&|r| r.naive_normalized_risk),
        mean_sigma_rel_error_sq: mean(&|r| r.sigma_rel_error_sq),
        fitted_constant: bound.as_ref().map(|b| b.fitted_constant(mean_normalized_risk)),
        bound,
        failed: records.len() - ok.len(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_has_target_norm_and_rank() {
        let m = low_rank_signal(8, 6, 2, 5.0, 3).unwrap();
        let s = svd(&m).unwrap().s;
        assert!((s.sum() - 5.0).abs() < 1e-9, "{}", s);
        assert!(s[2] < 1e-10 * s[0]);
    }

    #[test]
    fn rejects_excess_rank() {
        assert!(run_matrix_scenario(&MatrixScenario::new(3, 4, 4, 1.0, 1, 0)).is_err());
    }

    #[test]
    fn noiseless_feasible_and_finite() {
        let mut sc = MatrixScenario::new(6, 5, 1, 0.0, 2, 1);
        sc.nuclear_norm = Some(4.0);
        let r = run_matrix_scenario(&sc).unwrap();
        assert!(r.bound.is_none());
        for rec in &r.records {
            let rec = rec.as_ref().unwrap();
            assert!(rec.risk.is_finite());
            assert!(rec.feasibility_gap.abs() < 1e-8, "{}", rec.feasibility_gap);
        }
    }

    #[test]
    fn zero_signal_risk_below_naive() {
        let mut sc = MatrixScenario::new(10, 10, 0, 1.0, 10, 2);
        sc.moment_samples = 2;
        sc.parallel = false;
        let r = run_matrix_scenario(&sc).unwrap();
        assert!(r.mean_normalized_risk <= 1.0, "{}", r.mean_normalized_risk);
        assert_eq!(r, with_same_timing(run_matrix_scenario(&sc).unwrap(), &r));
    }

    fn with_same_timing(mut report: MatrixReport, other: &MatrixReport) -> MatrixReport {
        for (a, b) in report.records.iter_mut().zip(&other.records) {
            if let (Ok(a), Ok(b)) = (a, b) {
                a.elapsed_seconds = b.elapsed_seconds;
            }
        }
        report
    }
}
