//! Evaluation of the risk-bound formulas for simulation diagnostics.
//!
//! Universal constants are left at `C = 1`; each additive term is exposed so
//! callers can fit the constant themselves.

use serde::{Deserialize, Serialize};

use crate::rng::GaussianSampler;
use crate::solvers::svd;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RiskProblem {
    Regression {
        n: usize,
        p: usize,
        sigma: f64,
        /// `|beta_0|_1`
        beta0_l1: f64,
        gamma: f64,
    },
    Matrix {
        rows: usize,
        cols: usize,
        sigma: f64,
        nuclear_norm: f64,
        /// Monte Carlo draws used to estimate spectral-norm moments of a
        /// Gaussian matrix.
        moment_samples: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskBound {
    /// Regression rate `|beta_0|_1 gamma / sigma * sqrt(log(p+n)/n)`.
    pub r: Option<f64>,
    /// Matrix rate `|M|_* (sqrt l + sqrt m) / (l m sigma)`.
    pub s: Option<f64>,
    /// Bound on the Euclidean radius of the unit ball of the dual norm.
    pub a: f64,
    /// Bounds (or estimates) of `(E K°(Z)^k)^(1/k)` for `k = 2, 4`.
    pub m2_bound: f64,
    pub m4_bound: f64,
    /// Additive terms of the normalised prediction-risk bound with `C = 1`.
    pub risk_terms: Vec<f64>,
    /// Additive terms of the `E(sigma_hat/sigma - 1)^2` bound with `C = 1`.
    pub sigma_terms: Vec<f64>,
    /// Explicit-constant bound on `E(sigma_hat - sigma)^2`, given the norm
    /// of the mean, `a` and the moments above.
    pub sigma_sq_error_bound: f64,
    /// Sum of `risk_terms` (the bound with `C = 1`).
    pub bound_value: f64,
}

impl RiskBound {
    pub fn risk_bound(&self, c: f64) -> f64 {
        c * self.risk_terms.iter().sum::<f64>()
    }

    pub fn sigma_bound(&self, c: f64) -> f64 {
        c * self.sigma_terms.iter().sum::<f64>()
    }

    /// Smallest `C` for which `observed <= C * sum(risk_terms)`.
    pub fn fitted_constant(&self, observed_risk: f64) -> f64 {
        observed_risk / self.risk_terms.iter().sum::<f64>()
    }
}

/// Noise-level bound `K(mu)^2 m2^2 / (n-2)^2 + 32 sqrt(2) sigma^2 a^2 m4^2 / (n-4)^2`;
/// infinite for `n <= 4`.
fn sigma_sq_error_bound(n: usize, sigma: f64, k_mu: f64, a: f64, m2: f64, m4: f64) -> f64 {
    if n <= 4 {
        return f64::INFINITY;
    }
    let n = n as f64;
    (k_mu * m2 / (n - 2.0)).powi(2) + 32.0 * std::f64::consts::SQRT_2 * (sigma * a * m4 / (n - 4.0)).powi(2)
}

pub fn risk_bounds(problem: &RiskProblem) -> Result<RiskBound> {
    match *problem {
        RiskProblem::Regression {
            n,
            p,
            sigma,
            beta0_l1,
            gamma,
        } => {
            if !(sigma > 0.0) {
                return Err(Error::InvalidArgument("sigma must be positive".into()));
            }
            if n == 0 || p == 0 || !(gamma > 0.0) || !(beta0_l1 >= 0.0) {
                return Err(Error::InvalidArgument("need n, p >= 1, gamma > 0 and |beta0|_1 >= 0".into()));
            }
            let log_pn = ((p + n) as f64).ln();
            let nf = n as f64;
            let r = beta0_l1 * gamma / sigma * (log_pn / nf).sqrt();
            let m = 3.0 * gamma * (nf * log_pn).sqrt();
            let a = 1.0 / gamma;
            let risk_terms = vec![r, r * r, (log_pn / nf).sqrt(), log_pn / nf];
            let bound_value = risk_terms.iter().sum();
            Ok(RiskBound {
                r: Some(r),
                s: None,
                a,
                m2_bound: m,
                m4_bound: m,
                sigma_terms: vec![r * r, log_pn / nf],
                sigma_sq_error_bound: sigma_sq_error_bound(n, sigma, beta0_l1, a, m, m),
                risk_terms,
                bound_value,
            })
        }
        RiskProblem::Matrix {
            rows,
            cols,
            sigma,
            nuclear_norm,
            moment_samples,
            seed,
        } => {
            if !(sigma > 0.0) {
                return Err(Error::InvalidArgument("sigma must be positive".into()));
            }
            if rows == 0 || cols == 0 || !(nuclear_norm >= 0.0) {
                return Err(Error::InvalidArgument("need l, m >= 1 and |M|_* >= 0".into()));
            }
            let lm = (rows * cols) as f64;
            let s = nuclear_norm * ((rows as f64).sqrt() + (cols as f64).sqrt()) / (lm * sigma);
            let a = (rows.min(cols) as f64).sqrt();
            let (m2, m4) = spectral_moments(rows, cols, moment_samples, seed)?;
            let risk_terms = vec![s, s * s, 1.0 / lm.sqrt()];
            let bound_value = risk_terms.iter().sum();
            Ok(RiskBound {
                r: None,
                s: Some(s),
                a,
                m2_bound: m2,
                m4_bound: m4,
                sigma_terms: vec![s * s, 1.0 / lm],
                sigma_sq_error_bound: sigma_sq_error_bound(rows * cols, sigma, nuclear_norm, a, m2, m4),
                risk_terms,
                bound_value,
            })
        }
    }
}

/// Monte Carlo `(E|Z|^2)^(1/2)` and `(E|Z|^4)^(1/4)` for the spectral norm
/// of an `l x m` standard Gaussian matrix. Zero samples gives `NaN`.
fn spectral_moments(rows: usize, cols: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples == 0 {
        return Ok((f64::NAN, f64::NAN));
    }
    let mut s2 = 0.0;
    let mut s4 = 0.0;
    for i in 0..samples {
        let z = GaussianSampler::new(seed, i as u64).matrix(rows, cols);
        let top = svd(&z)?.s[0];
        s2 += top.powi(2);
        s4 += top.powi(4);
    }
    let k = samples as f64;
    Ok(((s2 / k).sqrt(), (s4 / k).powf(0.25)))
}
