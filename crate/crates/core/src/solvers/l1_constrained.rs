use super::basis_pursuit::basis_pursuit;
use super::lasso::{CdControl, LassoProblem, LassoState};
use super::linalg::{default_rank_tolerance, orthonormal_column_basis};
use super::SolverSettings;
use crate::{DenseMatrix, DenseVector, Error, Result};

/// Penalty ratio between consecutive path points while bracketing the budget.
const PATH_STEP: f64 = 0.8;
/// Lowest penalty tried, relative to `lambda_max`, before falling back to
/// exact interpolation.
const PATH_FLOOR: f64 = 1e-9;
const MAX_ROOT_STEPS: usize = 200;

/// `argmin |b|_1` subject to `|y - X b|^2 <= budget`.
///
/// The penalised path `(1/2n)|y - Xb|^2 + lambda |b|_1` is followed downward
/// from `lambda_max` until the residual drops below the budget, then the
/// penalty is root-found (Illinois regula falsi in `log lambda`) until the
/// squared residual matches the budget within `budget_root_tolerance`.
/// `budget == 0` reduces to basis pursuit on the column space of `X`.
pub fn l1_constrained_ls(x: &DenseMatrix, y: &DenseVector, budget: f64, settings: &SolverSettings) -> Result<DenseVector> {
    settings.validate()?;
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::InvalidArgument(format!("budget must be finite and nonnegative, got {budget}")));
    }
    let ysq = y.norm_squared();
    if ysq <= budget {
        return Ok(DenseVector::zeros(p));
    }
    if budget == 0.0 {
        return interpolate(x, y, settings);
    }

    let tol = settings.budget_root_tolerance;
    let control = CdControl {
        max_sweeps: settings.max_iterations,
        ..CdControl::default()
    };
    let prob = LassoProblem::new(x, y, &[])?;
    let null = prob.null_state(&control)?;
    let lmax = prob.lambda_max(&null);
    if lmax == 0.0 {
        // y is orthogonal to every column; only b = 0 is reachable
        return Err(Error::Infeasible("response is orthogonal to the design".into()));
    }

    // (penalty, state) with rss above the budget, and one at or below it
    let mut hi = (lmax, null);
    let mut lo: Option<(f64, LassoState)> = None;
    let mut lam = lmax;
    while lam > PATH_FLOOR * lmax {
        let next = lam * PATH_STEP;
        let mut st = hi.1.clone();
        prob.solve(next, lam, &mut st, &control)?;
        let rss = st.rss();
        if (rss - budget).abs() <= tol * budget {
            return Ok(finish(x, y, budget, st));
        }
        lam = next;
        if rss < budget {
            lo = Some((next, st));
            break;
        }
        hi = (next, st);
    }
    let Some(mut lo) = lo else {
        // budget below what the path reaches: interpolate exactly, which is
        // feasible and within the floor's rounding of the optimum
        return interpolate(x, y, settings);
    };

    let f = |st: &LassoState| st.rss() - budget;
    let (mut t_hi, mut f_hi) = (hi.0.ln(), f(&hi.1));
    let (mut t_lo, mut f_lo) = (lo.0.ln(), f(&lo.1));
    let mut side = 0i8;
    for _ in 0..MAX_ROOT_STEPS {
        let mut t = (t_lo * f_hi - t_hi * f_lo) / (f_hi - f_lo);
        if !(t > t_lo && t < t_hi) {
            t = 0.5 * (t_lo + t_hi);
        }
        let lam = t.exp();
        // warm start from the nearer end
        let (mut st, prev) = if t - t_lo < t_hi - t {
            (lo.1.clone(), lo.0)
        } else {
            (hi.1.clone(), hi.0)
        };
        prob.solve(lam, prev, &mut st, &control)?;
        let ft = f(&st);
        if ft.abs() <= tol * budget {
            return Ok(finish(x, y, budget, st));
        }
        if ft > 0.0 {
            t_hi = t;
            f_hi = ft;
            hi = (lam, st);
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        } else {
            t_lo = t;
            f_lo = ft;
            lo = (lam, st);
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        }
        if t_hi - t_lo <= 1e-14 * t_hi.abs().max(1.0) {
            break;
        }
    }
    // bracket exhausted: coordinate descent accuracy limits how well the
    // budget can be hit; the exact segment solve usually still succeeds
    if let Some(b) = exact_on_segment(x, y, budget, &lo.1.beta) {
        return Ok(b);
    }
    Ok(DenseVector::from_vec(lo.1.beta))
}

fn finish(x: &DenseMatrix, y: &DenseVector, budget: f64, st: LassoState) -> DenseVector {
    exact_on_segment(x, y, budget, &st.beta).unwrap_or_else(|| DenseVector::from_vec(st.beta))
}

/// On a fixed active set `S` with signs `s` the penalised solution is
/// `b_S(lambda) = G^-1 (X_S^T y - n lambda s)` with `G = X_S^T X_S`, and its
/// residual sum of squares is `RSS_ls + (n lambda)^2 s^T G^-1 s`. Solves that
/// for the budget and returns the solution if signs and the optimality
/// conditions off the active set still hold.
fn exact_on_segment(x: &DenseMatrix, y: &DenseVector, budget: f64, beta: &[f64]) -> Option<DenseVector> {
    let n = x.nrows() as f64;
    let support: Vec<usize> = (0..beta.len()).filter(|&j| beta[j] != 0.0).collect();
    if support.is_empty() || support.len() > x.nrows() {
        return None;
    }
    let xs = x.select_columns(&support);
    let signs = DenseVector::from_iterator(support.len(), support.iter().map(|&j| beta[j].signum()));
    let chol = (xs.transpose() * &xs).cholesky()?;
    let b_ls = chol.solve(&xs.tr_mul(y));
    let rss_ls = (y - &xs * &b_ls).norm_squared();
    let g_s = chol.solve(&signs);
    let curvature = signs.dot(&g_s);
    if !(curvature > 0.0) || budget < rss_ls {
        return None;
    }
    let lambda = ((budget - rss_ls) / curvature).sqrt() / n;
    let b_s = &b_ls - &g_s * (n * lambda);
    if b_s.iter().zip(signs.iter()).any(|(b, s)| b * s <= 0.0) {
        return None;
    }
    let resid = y - &xs * &b_s;
    let grad = x.tr_mul(&resid) / n;
    let slack = lambda * (1.0 + 1e-7) + 1e-12 * grad.amax();
    let mut in_support = vec![false; x.ncols()];
    for &j in &support {
        in_support[j] = true;
    }
    if (0..x.ncols()).any(|j| !in_support[j] && grad[j].abs() > slack) {
        return None;
    }
    let mut out = DenseVector::zeros(x.ncols());
    for (k, &j) in support.iter().enumerate() {
        out[j] = b_s[k];
    }
    Some(out)
}

/// Minimum-l1 exact solution of `X b = y` restricted to the column space.
fn interpolate(x: &DenseMatrix, y: &DenseVector, settings: &SolverSettings) -> Result<DenseVector> {
    let (n, p) = x.shape();
    let q = orthonormal_column_basis(x, default_rank_tolerance(n, p))?;
    if q.ncols() == 0 {
        return Err(Error::Infeasible("design has rank zero".into()));
    }
    let b = q.tr_mul(y);
    let off = (y - &q * &b).norm();
    if off > settings.primal_tolerance * y.norm().max(1.0) {
        return Err(Error::Infeasible(format!(
            "response leaves the column space of the design (distance {off:.3e})"
        )));
    }
    let a = q.tr_mul(x);
    Ok(basis_pursuit(&a, &b, settings)?.beta)
}
