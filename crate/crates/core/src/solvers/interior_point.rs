//! Mehrotra predictor-corrector method for basis pursuit written as the
//! standard-form LP
//!
//! ```text
//! min 1^T (x+ + x-)  s.t.  A (x+ - x-) = b,  x+, x- >= 0
//! ```
//!
//! Each iteration factors the normal matrix `A diag(d) A^T`. Columns of `A`
//! with a single nonzero entry only touch its diagonal and are kept out of
//! the dense product.

use nalgebra::Cholesky;

use super::SolverSettings;
use crate::{DenseMatrix, DenseVector, Error, Result};

const STEP_FRACTION: f64 = 0.995;
const MAX_IP_ITERATIONS: usize = 500;

pub(crate) struct ColumnSplit {
    dense: Vec<usize>,
    dense_mat: DenseMatrix,
    /// `(column, row, value)` for columns with exactly one nonzero.
    singletons: Vec<(usize, usize, f64)>,
}

impl ColumnSplit {
    pub(crate) fn new(a: &DenseMatrix) -> Self {
        let mut dense = Vec::new();
        let mut singletons = Vec::new();
        for j in 0..a.ncols() {
            let col = a.column(j);
            let mut nz = col.iter().enumerate().filter(|(_, v)| **v != 0.0);
            match (nz.next(), nz.next()) {
                (Some((i, v)), None) => singletons.push((j, i, *v)),
                (None, _) => singletons.push((j, 0, 0.0)),
                _ => dense.push(j),
            }
        }
        let dense_mat = a.select_columns(&dense);
        Self {
            dense,
            dense_mat,
            singletons,
        }
    }

    /// `A diag(d) A^T`.
    fn normal_matrix(&self, d: &[f64]) -> DenseMatrix {
        let n = self.dense_mat.nrows();
        let mut m = if self.dense.is_empty() {
            DenseMatrix::zeros(n, n)
        } else {
            let mut b = self.dense_mat.clone();
            for (k, &j) in self.dense.iter().enumerate() {
                b.column_mut(k).scale_mut(d[j].sqrt());
            }
            &b * b.transpose()
        };
        for &(j, i, v) in &self.singletons {
            m[(i, i)] += v * v * d[j];
        }
        m
    }
}

pub(crate) struct IpSolution {
    pub beta: DenseVector,
    pub dual: DenseVector,
    pub iterations: usize,
}

fn factor(m: DenseMatrix) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let scale = m.diagonal().amax().max(f64::MIN_POSITIVE);
    let mut shift = 0.0;
    for _ in 0..8 {
        let mut mm = m.clone();
        if shift > 0.0 {
            for i in 0..mm.nrows() {
                mm[(i, i)] += shift;
            }
        }
        if let Some(c) = Cholesky::new(mm) {
            return Ok(c);
        }
        shift = if shift == 0.0 { 1e-14 * scale } else { shift * 100.0 };
    }
    Err(Error::NotConverged {
        solver: "interior point (normal equations)",
        iterations: 0,
        primal_residual: f64::NAN,
        gap: f64::NAN,
    })
}

fn max_step(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, d)| **d < 0.0)
        .map(|(xi, di)| -xi / di)
        .fold(1.0, f64::min)
}

struct Direction {
    dxp: Vec<f64>,
    dxm: Vec<f64>,
    dsp: Vec<f64>,
    dsm: Vec<f64>,
    dv: DenseVector,
}

pub(crate) fn interior_point(a: &DenseMatrix, cols: &ColumnSplit, b: &DenseVector, settings: &SolverSettings) -> Result<IpSolution> {
    let (n, q) = a.shape();
    let bnorm = b.norm();
    let tol = (settings.primal_tolerance.min(settings.dual_tolerance) * 1e-3).max(1e-12);

    // starting point
    let chol = factor(cols.normal_matrix(&vec![2.0; q]))?;
    let x0 = a.tr_mul(&chol.solve(b));
    let mut xp: Vec<f64> = x0.iter().copied().collect();
    let mut xm: Vec<f64> = x0.iter().map(|v| -*v).collect();
    let mut sp = vec![1.0; q];
    let mut sm = vec![1.0; q];
    let mut v = DenseVector::zeros(n);
    {
        let dx = (-1.5 * xp.iter().chain(&xm).cloned().fold(f64::INFINITY, f64::min)).max(0.0);
        xp.iter_mut().chain(xm.iter_mut()).for_each(|x| *x += dx);
        let xs: f64 = xp.iter().zip(&sp).chain(xm.iter().zip(&sm)).map(|(x, s)| x * s).sum();
        let sum_x: f64 = xp.iter().chain(&xm).sum();
        let sum_s = 2.0 * q as f64;
        let dxh = 0.5 * xs / sum_s;
        let dsh = 0.5 * xs / sum_x.max(f64::MIN_POSITIVE);
        xp.iter_mut().chain(xm.iter_mut()).for_each(|x| *x += dxh);
        sp.iter_mut().chain(sm.iter_mut()).for_each(|s| *s += dsh);
    }

    let max_it = settings.max_iterations.min(MAX_IP_ITERATIONS);
    let mut last = (f64::NAN, f64::NAN);
    for it in 1..=max_it {
        let beta: DenseVector = DenseVector::from_iterator(q, xp.iter().zip(&xm).map(|(p, m)| p - m));
        let rp = b - a * &beta;
        let atv = a.tr_mul(&v);
        let rdp: Vec<f64> = (0..q).map(|j| 1.0 - atv[j] - sp[j]).collect();
        let rdm: Vec<f64> = (0..q).map(|j| 1.0 + atv[j] - sm[j]).collect();
        let primal_obj: f64 = xp.iter().chain(&xm).sum();
        let dual_obj = b.dot(&v);
        let mu = (xp.iter().zip(&sp).chain(xm.iter().zip(&sm)).map(|(x, s)| x * s).sum::<f64>()) / (2 * q) as f64;

        let pres = rp.norm() / bnorm;
        let dres = rdp.iter().chain(&rdm).fold(0.0f64, |m, r| m.max(r.abs()));
        let gap = (primal_obj - dual_obj).abs() / primal_obj.abs().max(f64::MIN_POSITIVE);
        last = (pres, gap);
        if pres <= tol && dres <= tol && gap <= tol {
            return Ok(IpSolution { beta, dual: v, iterations: it });
        }

        let d: Vec<f64> = (0..q).map(|j| xp[j] / sp[j] + xm[j] / sm[j]).collect();
        let chol = factor(cols.normal_matrix(&d))?;

        let solve = |rcp: &[f64], rcm: &[f64]| -> Direction {
            let w = DenseVector::from_iterator(
                q,
                (0..q).map(|j| (-rcp[j] + xp[j] * rdp[j]) / sp[j] - (-rcm[j] + xm[j] * rdm[j]) / sm[j]),
            );
            let rhs = &rp + a * w;
            let dv = chol.solve(&rhs);
            let g = a.tr_mul(&dv);
            let dsp: Vec<f64> = (0..q).map(|j| rdp[j] - g[j]).collect();
            let dsm: Vec<f64> = (0..q).map(|j| rdm[j] + g[j]).collect();
            let dxp: Vec<f64> = (0..q).map(|j| (rcp[j] - xp[j] * dsp[j]) / sp[j]).collect();
            let dxm: Vec<f64> = (0..q).map(|j| (rcm[j] - xm[j] * dsm[j]) / sm[j]).collect();
            Direction { dxp, dxm, dsp, dsm, dv }
        };

        // predictor
        let rcp: Vec<f64> = (0..q).map(|j| -xp[j] * sp[j]).collect();
        let rcm: Vec<f64> = (0..q).map(|j| -xm[j] * sm[j]).collect();
        let aff = solve(&rcp, &rcm);
        let ap = max_step(&xp, &aff.dxp).min(max_step(&xm, &aff.dxm));
        let ad = max_step(&sp, &aff.dsp).min(max_step(&sm, &aff.dsm));
        let mu_aff = (0..q)
            .map(|j| {
                (xp[j] + ap * aff.dxp[j]) * (sp[j] + ad * aff.dsp[j]) + (xm[j] + ap * aff.dxm[j]) * (sm[j] + ad * aff.dsm[j])
            })
            .sum::<f64>()
            / (2 * q) as f64;
        let centering = (mu_aff / mu).powi(3).min(1.0);

        // corrector
        let rcp: Vec<f64> = (0..q).map(|j| centering * mu - xp[j] * sp[j] - aff.dxp[j] * aff.dsp[j]).collect();
        let rcm: Vec<f64> = (0..q).map(|j| centering * mu - xm[j] * sm[j] - aff.dxm[j] * aff.dsm[j]).collect();
        let dir = solve(&rcp, &rcm);
        let ap = (STEP_FRACTION * max_step(&xp, &dir.dxp).min(max_step(&xm, &dir.dxm))).min(1.0);
        let ad = (STEP_FRACTION * max_step(&sp, &dir.dsp).min(max_step(&sm, &dir.dsm))).min(1.0);
        for j in 0..q {
            xp[j] += ap * dir.dxp[j];
            xm[j] += ap * dir.dxm[j];
            sp[j] += ad * dir.dsp[j];
            sm[j] += ad * dir.dsm[j];
        }
        v.axpy(ad, &dir.dv, 1.0);
    }
    Err(Error::NotConverged {
        solver: "basis pursuit (interior point)",
        iterations: max_it,
        primal_residual: last.0,
        gap: last.1,
    })
}
