//! K-fold cross-validated Lasso baseline.

use serde::{Deserialize, Serialize};

use crate::rng::GaussianSampler;
use crate::solvers::lasso::{geometric_grid, CdControl, LassoProblem, LassoState};
use crate::{DenseMatrix, DenseVector, Error, Result};

/// Options for [`cv_lasso`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub grid_size: usize,
    /// Smallest penalty as a fraction of the largest.
    pub min_ratio: f64,
    pub seed: u64,
    /// Columns fitted without penalty, typically the intercept.
    pub unpenalised: Vec<usize>,
    /// Stop the path once the full-data fit explains this fraction of the
    /// null residual sum of squares. Below that point the fit interpolates
    /// and further penalties only cost time.
    pub saturation: f64,
    /// Coordinate-descent convergence tolerance, relative to `|y|^2 / n`.
    /// The default matches common Lasso packages; tightening it changes the
    /// selected penalty only in rare near-ties and costs up to 10x time.
    pub tolerance: f64,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: 10,
            grid_size: 100,
            min_ratio: 1e-4,
            seed: 0,
            unpenalised: vec![0],
            saturation: 0.999,
            tolerance: 1e-7,
        }
    }
}

/// Result of [`cv_lasso`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvLassoFit {
    pub beta: Vec<f64>,
    pub lambda: f64,
    /// Grid actually visited (possibly truncated at saturation).
    pub lambdas: Vec<f64>,
    /// Mean squared held-out error for each visited penalty.
    pub cv_error: Vec<f64>,
    pub selected_index: usize,
}

/// Fold label for each row: a seeded permutation dealt round-robin.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut g = GaussianSampler::new(seed, 0).generator();
    for i in (1..n).rev() {
        let j = (g.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    let mut label = vec![0; n];
    for (pos, &row) in perm.iter().enumerate() {
        label[row] = pos % folds;
    }
    label
}

/// Solves along `lambdas` with warm starts, calling `visit` after each
/// solve. Stops early when `visit` returns `false`.
fn walk_path(
    prob: &LassoProblem,
    lambdas: &[f64],
    control: &CdControl,
    mut visit: impl FnMut(usize, &LassoState) -> bool,
) -> Result<()> {
    let mut state = prob.null_state(control)?;
    let mut prev = lambdas[0];
    for (k, &lam) in lambdas.iter().enumerate() {
        prob.solve(lam, prev, &mut state, control)?;
        prev = lam;
        if !visit(k, &state) {
            break;
        }
    }
    Ok(())
}

/// Lasso with the penalty chosen by K-fold cross-validation (minimum mean
/// held-out squared error), refitted on all rows at the chosen penalty.
pub fn cv_lasso(x: &DenseMatrix, y: &DenseVector, opts: &CvOptions) -> Result<CvLassoFit> {
    let n = x.nrows();
    if opts.folds < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least 2 folds".into()));
    }
    if n < opts.folds {
        return Err(Error::InvalidArgument(format!("{n} rows cannot fill {} folds", opts.folds)));
    }
    if opts.grid_size == 0 || !(opts.min_ratio > 0.0 && opts.min_ratio < 1.0) {
        return Err(Error::InvalidArgument("grid needs size >= 1 and ratio in (0, 1)".into()));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite entry in design or response".into()));
    }
    let control = CdControl {
        tolerance: opts.tolerance,
        ..CdControl::default()
    };

    // full-data path: fixes the grid, its truncation, and the refit
    let full = LassoProblem::new(x, y, &opts.unpenalised)?;
    let null = full.null_state(&control)?;
    let null_rss = null.rss();
    let lmax = full.lambda_max(&null);
    if lmax == 0.0 {
        return Ok(CvLassoFit {
            beta: null.beta,
            lambda: 0.0,
            lambdas: vec![0.0],
            cv_error: vec![0.0],
            selected_index: 0,
        });
    }
    let mut lambdas = geometric_grid(lmax, opts.min_ratio, opts.grid_size);
    let mut path_betas: Vec<Vec<f64>> = Vec::with_capacity(lambdas.len());
    walk_path(&full, &lambdas, &control, |_, s| {
        path_betas.push(s.beta.clone());
        s.rss() > (1.0 - opts.saturation) * null_rss
    })?;
    lambdas.truncate(path_betas.len());

    let labels = fold_assignment(n, opts.folds, opts.seed);
    let mut sse = vec![0.0; lambdas.len()];
    for fold in 0..opts.folds {
        let train: Vec<usize> = (0..n).filter(|&i| labels[i] != fold).collect();
        let test: Vec<usize> = (0..n).filter(|&i| labels[i] == fold).collect();
        let xt = x.select_rows(&train);
        let yt = y.select_rows(&train);
        let xv = x.select_rows(&test);
        let yv = y.select_rows(&test);
        let prob = LassoProblem::new(&xt, &yt, &opts.unpenalised)?;
        let mut last = None;
        walk_path(&prob, &lambdas, &control, |k, s| {
            let b = DenseVector::from_column_slice(&s.beta);
            sse[k] += (&yv - &xv * &b).norm_squared();
            last = Some(k);
            true
        })?;
        debug_assert_eq!(last, Some(lambdas.len() - 1));
    }
    let cv_error: Vec<f64> = sse.iter().map(|s| s / n as f64).collect();
    // first minimum: ties resolve to the larger penalty
    let mut best = 0;
    for (k, &e) in cv_error.iter().enumerate() {
        if e < cv_error[best] {
            best = k;
        }
    }
    Ok(CvLassoFit {
        beta: path_betas.swap_remove(best),
        lambda: lambdas[best],
        lambdas,
        cv_error,
        selected_index: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::design::{gen_design, gen_response};

    #[test]
    fn folds_balanced_and_seeded() {
        let a = fold_assignment(23, 5, 7);
        assert_eq!(a, fold_assignment(23, 5, 7));
        assert_ne!(a, fold_assignment(23, 5, 8));
        for f in 0..5 {
            let c = a.iter().filter(|&&l| l == f).count();
            assert!(c == 4 || c == 5);
        }
    }

    #[test]
    fn rejects_bad_folds() {
        let x = gen_design(5, 3, 1);
        let y = DenseVector::zeros(5);
        let mut o = CvOptions { folds: 1, ..Default::default() };
        assert!(cv_lasso(&x, &y, &o).is_err());
        o.folds = 6;
        assert!(cv_lasso(&x, &y, &o).is_err());
    }

    #[test]
    fn pure_intercept_response_is_null_fit() {
        let x = gen_design(20, 5, 2);
        let y = DenseVector::from_element(20, 3.0);
        let fit = cv_lasso(&x, &y, &CvOptions::default()).unwrap();
        assert!((fit.beta[0] - 3.0).abs() < 1e-12);
        assert!(fit.beta[1..].iter().all(|&b| b == 0.0));
    }

    #[test]
    fn selects_strong_signal() {
        let x = gen_design(100, 50, 3);
        let mut b0 = DenseVector::zeros(51);
        b0[1] = 3.0;
        b0[2] = -3.0;
        let y = gen_response(&x, &b0, 1.0, 4).unwrap();
        let fit = cv_lasso(&x, &y, &CvOptions { seed: 5, ..Default::default() }).unwrap();
        assert!(fit.beta[1] > 2.0 && fit.beta[2] < -2.0);
        assert!(fit.lambda < fit.lambdas[0]);
        assert_eq!(fit.cv_error.len(), fit.lambdas.len());
        let min = fit.cv_error.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(fit.cv_error[fit.selected_index], min);
    }

    #[test]
    fn overdetermined_small_penalty_near_least_squares() {
        let x = gen_design(60, 4, 9);
        let b0 = DenseVector::from_vec(vec![1.0, 2.0, 0.0, -1.0, 0.5]);
        let y = gen_response(&x, &b0, 0.1, 10).unwrap();
        let ls = (x.transpose() * &x).cholesky().unwrap().solve(&(x.transpose() * &y));
        let b = crate::solvers::lasso::lasso_fit(&x, &y, 0.0, &[0]).unwrap();
        assert!((b - ls).amax() < 1e-6);
    }
}
