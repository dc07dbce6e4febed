#![allow(dead_code)]

use tunefree_core::{DenseMatrix, DenseVector, GaussianSampler};

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian draw.
pub fn random_orthogonal(n: usize, seed: u64) -> DenseMatrix {
    let g = GaussianSampler::new(seed, 99).matrix(n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Columns centred and scaled to Euclidean norm `sqrt(n)`.
pub fn standardized_gaussian_design(n: usize, p: usize, seed: u64) -> DenseMatrix {
    let mut x = GaussianSampler::new(seed, 0).matrix(n, p);
    let sn = (n as f64).sqrt();
    for mut c in x.column_iter_mut() {
        let m = c.mean();
        c.add_scalar_mut(-m);
        let norm = c.norm();
        c *= sn / norm;
    }
    x
}

/// Sparse coefficient vector with `k` entries of magnitude in [1, 2] and
/// random signs.
pub fn sparse_beta(p: usize, k: usize, seed: u64) -> DenseVector {
    let mut g = GaussianSampler::new(seed, 5).generator();
    let mut b = DenseVector::zeros(p);
    let mut placed = 0;
    while placed < k {
        let j = (g.next_u64() % p as u64) as usize;
        if b[j] == 0.0 {
            let mag = 1.0 + g.next_uniform();
            b[j] = if g.next_uniform() < 0.5 { -mag } else { mag };
            placed += 1;
        }
    }
    b
}
