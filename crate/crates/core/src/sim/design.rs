use crate::rng::GaussianSampler;
use crate::{DenseMatrix, DenseVector, Error, Result};

/// `n x (p + 1)` design: an all-ones intercept in column 0 followed by `p`
/// columns of i.i.d. standard normal entries.
pub fn gen_design(n: usize, p: usize, seed: u64) -> DenseMatrix {
    let g = GaussianSampler::new(seed, 0).matrix(n, p);
    let mut x = DenseMatrix::from_element(n, p + 1, 1.0);
    x.columns_mut(1, p).copy_from(&g);
    x
}

/// `Y = X beta0 + sigma * eps` with `eps ~ N(0, I_n)` drawn from `seed`.
pub fn gen_response(x: &DenseMatrix, beta0: &DenseVector, sigma: f64, seed: u64) -> Result<DenseVector> {
    if x.ncols() != beta0.len() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: beta0.len(),
        });
    }
    let mean = x * beta0;
    if sigma == 0.0 {
        return Ok(mean);
    }
    Ok(mean + GaussianSampler::new(seed, 0).vector(x.nrows()) * sigma)
}
