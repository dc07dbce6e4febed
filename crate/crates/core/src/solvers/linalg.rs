use crate::{DenseMatrix, DenseVector, Error, Result};

/// Thin singular value decomposition `M = U diag(s) V^T` with `s`
/// nonincreasing; `U` is `l x k`, `V` is `m x k`, `k = min(l, m)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub s: DenseVector,
    pub v: DenseMatrix,
}

impl Svd {
    pub fn recompose(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (j, sj) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(*sj);
        }
        us * self.v.transpose()
    }
}

pub fn svd(m: &DenseMatrix) -> Result<Svd> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd {
            u: DenseMatrix::zeros(rows, 0),
            s: DenseVector::zeros(0),
            v: DenseMatrix::zeros(cols, 0),
        });
    }
    // nalgebra's bidiagonal SVD loses accuracy on exactly rank-deficient
    // inputs when vectors are requested, so decompose with faer instead
    let fm = faer::Mat::from_fn(rows, cols, |i, j| m[(i, j)]);
    let dec = fm.thin_svd().map_err(|_| Error::SvdFailed)?;
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    Ok(Svd {
        u: DenseMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
        s: DenseVector::from_fn(k, |i, _| s[i]),
        v: DenseMatrix::from_fn(cols, k, |i, j| v[(i, j)]),
    })
}

/// Relative rank tolerance `1e-10 * max(n, p)` applied to `s / s_max`.
pub fn default_rank_tolerance(rows: usize, cols: usize) -> f64 {
    1e-10 * rows.max(cols) as f64
}

fn count_above(s: &DenseVector, rel_tol: f64) -> usize {
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Left singular vectors of `x` spanning its numerical column space.
fn left_basis(x: &DenseMatrix, rel_tol: f64) -> Result<(DenseMatrix, usize)> {
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return Ok((DenseMatrix::zeros(n, 0), 0));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    // U of a wide matrix equals U of its n x n Gram-free QR reduction; for
    // wide inputs decompose R^T where X^T = Q R.
    let (u, s) = if p > n {
        let qr = nalgebra::QR::new(x.transpose());
        let rt = qr.r().transpose();
        let dec = svd(&rt)?;
        (dec.u, dec.s)
    } else {
        let dec = svd(x)?;
        (dec.u, dec.s)
    };
    let rank = count_above(&s, rel_tol);
    Ok((u.columns(0, rank).into_owned(), rank))
}

/// Number of singular values exceeding `rel_tol * s_max`.
pub fn numerical_rank(x: &DenseMatrix, rel_tol: f64) -> Result<usize> {
    left_basis(x, rel_tol).map(|(_, r)| r)
}

/// Orthonormal basis (`n x rank`) of the numerical column space of `x`.
pub fn orthonormal_column_basis(x: &DenseMatrix, rel_tol: f64) -> Result<DenseMatrix> {
    left_basis(x, rel_tol).map(|(q, _)| q)
}

/// Euclidean projection of `y` onto the column space of `x`, together with
/// the numerical rank of `x`. `rank_tolerance` is relative to the largest
/// singular value.
pub fn column_space_projection(x: &DenseMatrix, y: &DenseVector, rank_tolerance: f64) -> Result<(DenseVector, usize)> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    let (q, rank) = left_basis(x, rank_tolerance)?;
    if rank == x.nrows() {
        return Ok((y.clone(), rank));
    }
    let coef = q.tr_mul(y);
    Ok((&q * coef, rank))
}
