//! Problem generators shared by the benchmarks.

use tunefree_core::sim::gen_design;
use tunefree_core::{DenseMatrix, DenseVector, GaussianSampler};

/// Gaussian design with an intercept column and a response with two active
/// covariates, as in the smallest simulation row.
pub fn regression_problem(n: usize, p: usize, seed: u64) -> (DenseMatrix, DenseVector) {
    let x = gen_design(n, p, seed);
    let noise = GaussianSampler::new(seed, 1).vector(n) * 2.0;
    let y = x.column(1) + x.column(2) + noise;
    (x, y)
}

/// The augmented design `[X | sqrt(n) gamma I]` used by the noise estimate.
pub fn augmented(x: &DenseMatrix) -> DenseMatrix {
    let (n, p) = x.shape();
    let gamma = x.column_iter().map(|c| c.norm()).fold(0.0, f64::max) / (n as f64).sqrt();
    let mut aug = DenseMatrix::zeros(n, p + n);
    aug.columns_mut(0, p).copy_from(x);
    aug.columns_mut(p, n).fill_diagonal((n as f64).sqrt() * gamma);
    aug
}

/// Rank-`rank` signal plus unit Gaussian noise.
pub fn low_rank_observation(rows: usize, cols: usize, rank: usize, seed: u64) -> DenseMatrix {
    let a = GaussianSampler::new(seed, 0).matrix(rows, rank);
    let b = GaussianSampler::new(seed, 1).matrix(cols, rank);
    a * b.transpose() + GaussianSampler::new(seed, 2).matrix(rows, cols)
}
