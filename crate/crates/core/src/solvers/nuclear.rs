use super::linalg::{svd, Svd};
use crate::{DenseMatrix, Error, Result};

#[derive(Debug, Clone)]
pub struct NuclearShrinkage {
    pub m_hat: DenseMatrix,
    /// Amount subtracted from every singular value.
    pub theta: f64,
    /// Singular values of the input, nonincreasing.
    pub singular_values: Vec<f64>,
}

/// Level `theta >= 0` with `sum_i min(s_i, theta)^2 = budget`, for `s`
/// sorted nonincreasing and `budget < sum_i s_i^2`.
///
/// The left side is piecewise quadratic in `theta`; on the piece where the
/// `k` largest values exceed `theta` it equals `k theta^2 + tail_k`, so the
/// root is found exactly by scanning pieces from the top.
pub fn shrinkage_level(s: &[f64], budget: f64) -> f64 {
    debug_assert!(s.windows(2).all(|w| w[0] >= w[1]));
    let mut tail: f64 = s.iter().map(|v| v * v).sum();
    for k in 1..=s.len() {
        tail -= s[k - 1] * s[k - 1];
        let tail = tail.max(0.0);
        let lower = s.get(k).copied().unwrap_or(0.0);
        // on [lower, s[k-1]] the function is k theta^2 + tail
        if k as f64 * lower * lower + tail <= budget {
            return ((budget - tail) / k as f64).max(0.0).sqrt().min(s[k - 1]);
        }
    }
    0.0
}

/// `argmin ||A||_*` subject to `||Y - A||_HS^2 <= budget`: soft-threshold
/// the singular values of `Y` at the level that makes the constraint tight.
pub fn nuclear_constrained(y: &DenseMatrix, budget: f64) -> Result<NuclearShrinkage> {
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::InvalidArgument(format!("budget must be finite and nonnegative, got {budget}")));
    }
    let (l, m) = y.shape();
    if budget == 0.0 {
        let singular_values = if l.min(m) == 0 { Vec::new() } else { svd(y)?.s.as_slice().to_vec() };
        return Ok(NuclearShrinkage {
            m_hat: y.clone(),
            theta: 0.0,
            singular_values,
        });
    }
    let Svd { u, s, v } = svd(y)?;
    let sv = s.as_slice().to_vec();
    if y.norm_squared() <= budget {
        return Ok(NuclearShrinkage {
            m_hat: DenseMatrix::zeros(l, m),
            theta: sv.first().copied().unwrap_or(0.0),
            singular_values: sv,
        });
    }
    let theta = shrinkage_level(&sv, budget);
    let mut us = u;
    let mut keep = 0;
    for (j, sj) in sv.iter().enumerate() {
        let shrunk = (sj - theta).max(0.0);
        if shrunk > 0.0 {
            keep = j + 1;
        }
        us.column_mut(j).scale_mut(shrunk);
    }
    let m_hat = us.columns(0, keep) * v.columns(0, keep).transpose();
    Ok(NuclearShrinkage {
        m_hat,
        theta,
        singular_values: sv,
    })
}
