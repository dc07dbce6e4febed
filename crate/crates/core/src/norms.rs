//! Norms on `R^n` with their duals and Euclidean ball projections.
//!
//! Matrix norms act on column-major flattenings, so one vector interface
//! serves both the regression and the matrix estimators.

use std::sync::Arc;

use nalgebra::Cholesky;

use crate::solvers::{basis_pursuit, svd, SolverSettings};
use crate::{DenseMatrix, DenseVector, Error, Result};

#[derive(Debug, Clone)]
pub enum NormKind {
    L1,
    L2,
    Sup,
    Nuclear { rows: usize, cols: usize },
    Spectral { rows: usize, cols: usize },
    /// `K(x) = min { |b|_1 : x = A b }`.
    Design(DesignNorm),
}

/// Design-induced norm; `A` is checked for full row rank on construction so
/// the norm is finite everywhere.
#[derive(Debug, Clone)]
pub struct DesignNorm {
    a: Arc<DenseMatrix>,
    settings: SolverSettings,
}

impl DesignNorm {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }
}

impl NormKind {
    pub fn design(a: DenseMatrix) -> Result<Self> {
        Self::design_with(a, SolverSettings::default())
    }

    pub fn design_with(a: DenseMatrix, settings: SolverSettings) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() < n {
            return Err(Error::RankDeficient {
                rank: a.ncols().min(n),
                required: n,
            });
        }
        let g = &a * a.transpose();
        let gmax = g.diagonal().max();
        let ok = gmax > 0.0
            && Cholesky::new(g).is_some_and(|c| {
                let l = c.l_dirty();
                (0..n).all(|i| l[(i, i)] * l[(i, i)] > 1e-13 * gmax)
            });
        if !ok {
            return Err(Error::RankDeficient { rank: n - 1, required: n });
        }
        Ok(NormKind::Design(DesignNorm {
            a: Arc::new(a),
            settings,
        }))
    }

    /// Ambient dimension, when the kind fixes one.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            NormKind::L1 | NormKind::L2 | NormKind::Sup => None,
            NormKind::Nuclear { rows, cols } | NormKind::Spectral { rows, cols } => Some(rows * cols),
            NormKind::Design(d) => Some(d.a.nrows()),
        }
    }

    /// Kind whose primal is this kind's dual, where that has a closed form.
    pub fn dual_kind(&self) -> Option<NormKind> {
        match *self {
            NormKind::L1 => Some(NormKind::Sup),
            NormKind::Sup => Some(NormKind::L1),
            NormKind::L2 => Some(NormKind::L2),
            NormKind::Nuclear { rows, cols } => Some(NormKind::Spectral { rows, cols }),
            NormKind::Spectral { rows, cols } => Some(NormKind::Nuclear { rows, cols }),
            NormKind::Design(_) => None,
        }
    }

    fn check(&self, x: &DenseVector) -> Result<()> {
        match self.dimension() {
            Some(d) if d != x.len() => Err(Error::DimensionMismatch { expected: d, got: x.len() }),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &DenseVector) -> Result<f64> {
        self.check(x)?;
        Ok(match self {
            NormKind::L1 => x.lp_norm(1),
            NormKind::L2 => x.norm(),
            NormKind::Sup => x.amax(),
            NormKind::Nuclear { rows, cols } => singular_values(x, *rows, *cols)?.iter().sum(),
            NormKind::Spectral { rows, cols } => singular_values(x, *rows, *cols)?.first().copied().unwrap_or(0.0),
            NormKind::Design(d) => basis_pursuit(&d.a, x, &d.settings)?.objective,
        })
    }

    pub fn dual_eval(&self, x: &DenseVector) -> Result<f64> {
        self.check(x)?;
        match self {
            NormKind::Design(d) => Ok(d.a.tr_mul(x).amax()),
            k => k.dual_kind().expect("closed-form dual").eval(x),
        }
    }

    /// Euclidean projection of `x` onto `{ v : K(v) <= radius }`.
    pub fn project_ball(&self, x: &DenseVector, radius: f64) -> Result<DenseVector> {
        self.check(x)?;
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius must be finite and nonnegative, got {radius}")));
        }
        match self {
            NormKind::L1 => Ok(project_l1(x, radius)),
            NormKind::L2 => {
                let nx = x.norm();
                Ok(if nx <= radius { x.clone() } else { x * (radius / nx) })
            }
            NormKind::Sup => Ok(x.map(|v| v.clamp(-radius, radius))),
            NormKind::Nuclear { rows, cols } | NormKind::Spectral { rows, cols } => {
                let m = DenseMatrix::from_column_slice(*rows, *cols, x.as_slice());
                let d = svd(&m)?;
                let s = if matches!(self, NormKind::Nuclear { .. }) {
                    project_l1(&d.s, radius)
                } else {
                    d.s.map(|v| v.min(radius))
                };
                let mut u = d.u;
                for (j, sj) in s.iter().enumerate() {
                    u.column_mut(j).scale_mut(*sj);
                }
                let p = u * d.v.transpose();
                Ok(DenseVector::from_column_slice(p.as_slice()))
            }
            NormKind::Design(_) => Err(Error::InvalidArgument(
                "ball projection is not implemented for the design norm".into(),
            )),
        }
    }
}

fn singular_values(x: &DenseVector, rows: usize, cols: usize) -> Result<Vec<f64>> {
    let m = DenseMatrix::from_column_slice(rows, cols, x.as_slice());
    Ok(svd(&m)?.s.as_slice().to_vec())
}

/// Projection onto the l1 ball by sorting magnitudes and soft-thresholding
/// at the level where the shrunk magnitudes sum to the radius.
fn project_l1(x: &DenseVector, radius: f64) -> DenseVector {
    if x.lp_norm(1) <= radius {
        return x.clone();
    }
    if radius == 0.0 {
        return DenseVector::zeros(x.len());
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - radius) / (k + 1) as f64;
        if m > t {
            theta = t;
        } else {
            break;
        }
    }
    x.map(|v| crate::solvers::soft_threshold(v, theta))
}

pub fn norm_eval(kind: &NormKind, x: &DenseVector) -> Result<f64> {
    kind.eval(x)
}

pub fn dual_norm_eval(kind: &NormKind, x: &DenseVector) -> Result<f64> {
    kind.dual_eval(x)
}

pub fn project_ball(kind: &NormKind, x: &DenseVector, radius: f64) -> Result<DenseVector> {
    kind.project_ball(x, radius)
}

/// Estimation norm `k` and noise-level norm `k_tilde` on a common space.
#[derive(Debug, Clone)]
pub struct NormPair {
    pub k: NormKind,
    pub k_tilde: NormKind,
}

impl NormPair {
    pub fn new(k: NormKind, k_tilde: NormKind) -> Result<Self> {
        if let (Some(a), Some(b)) = (k.dimension(), k_tilde.dimension()) {
            if a != b {
                return Err(Error::DimensionMismatch { expected: a, got: b });
            }
        }
        Ok(Self { k, k_tilde })
    }

    pub fn dimension(&self) -> Option<usize> {
        self.k.dimension().or(self.k_tilde.dimension())
    }
}
