//! Monte Carlo comparison of the tuning-free regression estimator with a
//! cross-validated Lasso, plus a matrix-denoising harness.
//!
//! Every replication draws its design, noise, estimator noise and fold
//! split from seeds derived from `(base_seed, replication, purpose)`, so
//! replications are independent of one another and of execution order.

mod cv;
mod design;
mod matrix;
mod metrics;
mod report;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cv::{cv_lasso, fold_assignment, CvLassoFit, CvOptions};
pub use design::{gen_design, gen_response};
pub use matrix::{run_matrix_scenario, MatrixReplication, MatrixReport, MatrixScenario};
pub use metrics::{prediction_error, selection_metrics, Selection};
pub use report::{
    parse_json_lines, pretty_matrix_table, pretty_table, write_matrix_csv, write_report, ReportFormat, ReportLine,
    ScenarioSetting,
};

use crate::estimators::support_threshold;
use crate::estimators::regression_fit;
use crate::rng::{derive_seed, GaussianSampler};
use crate::solvers::SolverSettings;
use crate::{DenseVector, Error, Result};

/// JSON has no NaN; serde_json writes it as `null`, so read `null` back as NaN.
fn nan_if_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// One regression simulation setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    /// Covariates, not counting the intercept.
    pub p: usize,
    pub sigma: f64,
    /// Nonzero coefficients as `(covariate index in 1..=p, value)`.
    pub beta0: Vec<(usize, f64)>,
    pub replications: usize,
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 || self.replications == 0 {
            return Err(Error::InvalidArgument("n, p and replications must be at least 1".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        for &(j, v) in &self.beta0 {
            if j == 0 || j > self.p {
                return Err(Error::InvalidArgument(format!("coefficient index {j} outside 1..={}", self.p)));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("coefficient {j} is not finite")));
            }
        }
        Ok(())
    }

    /// Full coefficient vector over `[intercept, x_1, ..., x_p]`.
    pub fn beta0_vector(&self) -> DenseVector {
        let mut b = DenseVector::zeros(self.p + 1);
        for &(j, v) in &self.beta0 {
            b[j] += v;
        }
        b
    }

    pub fn support_size(&self) -> usize {
        self.beta0_vector().iter().skip(1).filter(|v| **v != 0.0).count()
    }

    pub fn name(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => format!("n={} p={} sigma={}", self.n, self.p, self.sigma),
        }
    }
}

/// `(n, p, nonzero coefficients, mean label)`.
type Table1Design = (usize, usize, &'static [(usize, f64)], &'static str);

/// The eight Gaussian-design comparison settings: four designs, each at
/// noise levels 2 and 3.
pub fn table1_scenarios(replications: usize, base_seed: u64) -> Vec<Scenario> {
    let designs: [Table1Design; 4] = [
        (100, 1000, &[(1, 1.0), (2, 1.0)], "x1+x2"),
        (200, 1000, &[(1, 1.0), (2, 1.0), (3, -1.0)], "x1+x2-x3"),
        (300, 300, &[(1, 1.0), (2, 2.0)], "x1+2x2"),
        (400, 4000, &[(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0)], "x1+x2+x3+x4"),
    ];
    let mut out = Vec::with_capacity(8);
    for (n, p, beta, mean) in designs {
        for sigma in [2.0, 3.0] {
            let row = out.len() as u64 + 1;
            out.push(Scenario {
                n,
                p,
                sigma,
                beta0: beta.to_vec(),
                replications,
                base_seed: derive_seed(base_seed, row, "table1-row"),
                label: Some(format!("row{row} n={n} p={p} sigma={sigma} E(y|x)={mean}")),
            });
        }
    }
    out
}

/// Harness settings shared by all scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub folds: usize,
    pub grid_size: usize,
    pub solver: SolverSettings,
    /// Run replications on the rayon pool.
    pub parallel: bool,
    pub run_proposed: bool,
    pub run_cv_lasso: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            folds: 10,
            grid_size: 100,
            solver: SolverSettings::default(),
            parallel: true,
            run_proposed: true,
            run_cv_lasso: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationSeeds {
    pub design: u64,
    pub noise: u64,
    pub estimator: u64,
    pub folds: u64,
}

impl ReplicationSeeds {
    pub fn derive(base_seed: u64, replication: usize) -> Self {
        let r = replication as u64;
        Self {
            design: derive_seed(base_seed, r, "design"),
            noise: derive_seed(base_seed, r, "noise"),
            estimator: derive_seed(base_seed, r, "estimator"),
            folds: derive_seed(base_seed, r, "cv-folds"),
        }
    }
}

/// Metrics of one method on one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub true_positives: usize,
    pub false_positives: usize,
    /// `|X beta_hat - X beta0|^2 / n`
    pub prediction_error: f64,
    /// The same divided by `sigma^2` (NaN when `sigma = 0`).
    #[serde(deserialize_with = "nan_if_null")]
    pub prediction_error_normalized: f64,
    /// Selected covariates, excluding the intercept.
    pub selected: Vec<usize>,
    pub elapsed_seconds: f64,
    /// Noise estimate for the proposed estimator, chosen penalty for the
    /// Lasso.
    pub tuning: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub seeds: ReplicationSeeds,
    pub proposed: Option<std::result::Result<MethodOutcome, String>>,
    pub cv_lasso: Option<std::result::Result<MethodOutcome, String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Proposed,
    CvLasso,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::CvLasso => "cv_lasso",
        }
    }
}

/// Averages over the successful replications of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    #[serde(deserialize_with = "nan_if_null")]
    pub avg_true_positives: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub avg_false_positives: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub avg_prediction_error: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub avg_prediction_error_normalized: f64,
    /// Total wall-clock seconds across replications.
    pub elapsed_seconds: f64,
    pub succeeded: usize,
    pub failed: usize,
}

impl MethodSummary {
    fn aggregate(method: Method, outcomes: &[&Option<std::result::Result<MethodOutcome, String>>]) -> Option<Self> {
        if outcomes.iter().all(|o| o.is_none()) {
            return None;
        }
        let ok: Vec<&MethodOutcome> = outcomes.iter().filter_map(|o| o.as_ref()?.as_ref().ok()).collect();
        let failed = outcomes.iter().filter(|o| matches!(o, Some(Err(_)))).count();
        let mean = |f: &dyn Fn(&MethodOutcome) -> f64| {
            if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|o| f(o)).sum::<f64>() / ok.len() as f64
            }
        };
        Some(Self {
            method,
            avg_true_positives: mean(&|o| o.true_positives as f64),
            avg_false_positives: mean(&|o| o.false_positives as f64),
            avg_prediction_error: mean(&|o| o.prediction_error),
            avg_prediction_error_normalized: mean(&|o| o.prediction_error_normalized),
            elapsed_seconds: outcomes
                .iter()
                .filter_map(|o| o.as_ref()?.as_ref().ok())
                .map(|o| o.elapsed_seconds)
                .sum(),
            succeeded: ok.len(),
            failed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub proposed: Option<MethodSummary>,
    pub cv_lasso: Option<MethodSummary>,
    pub records: Vec<ReplicationRecord>,
    pub elapsed_seconds: f64,
}

impl ScenarioReport {
    /// Copy with every wall-clock field zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.elapsed_seconds = 0.0;
        for s in [&mut r.proposed, &mut r.cv_lasso].into_iter().flatten() {
            s.elapsed_seconds = 0.0;
        }
        for rec in &mut r.records {
            for o in [&mut rec.proposed, &mut rec.cv_lasso].into_iter().flatten().flatten() {
                o.elapsed_seconds = 0.0;
            }
        }
        r
    }

    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        match method {
            Method::Proposed => self.proposed.as_ref(),
            Method::CvLasso => self.cv_lasso.as_ref(),
        }
    }
}

fn outcome(
    x: &crate::DenseMatrix,
    beta_hat: &[f64],
    beta0: &DenseVector,
    sigma: f64,
    elapsed: f64,
    tuning: f64,
) -> Result<MethodOutcome> {
    let bh = DenseVector::from_column_slice(beta_hat);
    let pe = prediction_error(x, &bh, beta0)?;
    let thresh = support_threshold(beta_hat);
    let sel = selection_metrics(beta_hat, beta0.as_slice(), thresh, Some(0))?;
    Ok(MethodOutcome {
        true_positives: sel.true_positives,
        false_positives: sel.false_positives,
        prediction_error: pe,
        prediction_error_normalized: if sigma > 0.0 { pe / (sigma * sigma) } else { f64::NAN },
        selected: (1..beta_hat.len()).filter(|&j| beta_hat[j].abs() > thresh).collect(),
        elapsed_seconds: elapsed,
        tuning,
    })
}

/// Runs a single replication of `scenario`.
pub fn run_replication(scenario: &Scenario, settings: &SimSettings, replication: usize) -> Result<ReplicationRecord> {
    let seeds = ReplicationSeeds::derive(scenario.base_seed, replication);
    let x = gen_design(scenario.n, scenario.p, seeds.design);
    let beta0 = scenario.beta0_vector();
    let y = gen_response(&x, &beta0, scenario.sigma, seeds.noise)?;

    let proposed = settings.run_proposed.then(|| {
        let t = Instant::now();
        regression_fit(&x, &y, &GaussianSampler::new(seeds.estimator, 0), &settings.solver)
            .and_then(|fit| outcome(&x, &fit.beta_hat, &beta0, scenario.sigma, t.elapsed().as_secs_f64(), fit.sigma_hat))
            .map_err(|e| e.to_string())
    });
    let cv_lasso = settings.run_cv_lasso.then(|| {
        let t = Instant::now();
        let opts = CvOptions {
            folds: settings.folds,
            grid_size: settings.grid_size,
            seed: seeds.folds,
            ..CvOptions::default()
        };
        cv_lasso(&x, &y, &opts)
            .and_then(|fit| outcome(&x, &fit.beta, &beta0, scenario.sigma, t.elapsed().as_secs_f64(), fit.lambda))
            .map_err(|e| e.to_string())
    });
    Ok(ReplicationRecord {
        replication,
        seeds,
        proposed,
        cv_lasso,
    })
}

/// Runs every replication of `scenario` and aggregates in replication
/// order, so the result does not depend on scheduling.
pub fn run_scenario(scenario: &Scenario, settings: &SimSettings) -> Result<ScenarioReport> {
    scenario.validate()?;
    settings.solver.validate()?;
    if settings.run_cv_lasso && (settings.folds < 2 || settings.folds > scenario.n) {
        return Err(Error::InvalidArgument(format!(
            "{} folds cannot be formed from {} rows",
            settings.folds, scenario.n
        )));
    }
    let start = Instant::now();
    let records: Result<Vec<ReplicationRecord>> = if settings.parallel {
        (0..scenario.replications)
            .into_par_iter()
            .map(|r| run_replication(scenario, settings, r))
            .collect()
    } else {
        (0..scenario.replications)
            .map(|r| run_replication(scenario, settings, r))
            .collect()
    };
    let records = records?;
    let proposed: Vec<_> = records.iter().map(|r| &r.proposed).collect();
    let lasso: Vec<_> = records.iter().map(|r| &r.cv_lasso).collect();
    Ok(ScenarioReport {
        scenario: scenario.clone(),
        proposed: MethodSummary::aggregate(Method::Proposed, &proposed),
        cv_lasso: MethodSummary::aggregate(Method::CvLasso, &lasso),
        records,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}
