//! Optimality and equivariance checks for the constrained solvers, using
//! randomly sampled feasible competitors.

mod common;

use common::random_orthogonal;
use tunefree_core::solvers::{basis_pursuit, l1_constrained_ls, nuclear_constrained, svd};
use tunefree_core::{DenseMatrix, DenseVector, GaussianSampler, SolverSettings};

fn nuclear(m: &DenseMatrix) -> f64 {
    svd(m).unwrap().s.sum()
}

/// Orthonormal basis of the null space of a wide full-row-rank `a`.
fn null_basis(a: &DenseMatrix) -> DenseMatrix {
    let (n, q) = a.shape();
    let mut padded = DenseMatrix::zeros(q, q);
    padded.rows_mut(0, n).copy_from(a);
    svd(&padded).unwrap().v.columns(n, q - n).into_owned()
}

#[test]
fn basis_pursuit_beats_sampled_feasible_points() {
    let s = SolverSettings::default();
    for seed in 0..10 {
        let n = 5 + seed as usize;
        let a = GaussianSampler::new(seed, 0).matrix(n, 3 * n);
        let y = GaussianSampler::new(seed, 1).vector(n);
        let r = basis_pursuit(&a, &y, &s).unwrap();
        let particular = a.transpose() * (&a * a.transpose()).cholesky().unwrap().solve(&y);
        let null = null_basis(&a);
        for t in 0..200 {
            let w = GaussianSampler::new(seed, 10 + t).vector(null.ncols()) * (0.01 * (t % 20 + 1) as f64);
            // half the candidates perturb the optimum, half a particular solution
            let base = if t % 2 == 0 { &r.beta } else { &particular };
            let cand = base + &null * w;
            assert!((&a * &cand - &y).norm() < 1e-8 * y.norm().max(1.0));
            assert!(r.objective <= cand.lp_norm(1) + 1e-7, "seed {seed} t {t}");
        }
    }
}

#[test]
fn l1_constrained_beats_sampled_feasible_points() {
    let s = SolverSettings::default();
    for seed in 0..10 {
        let (n, p) = (20, 40);
        let x = GaussianSampler::new(seed, 0).matrix(n, p);
        let y = GaussianSampler::new(seed, 1).vector(n) * 3.0;
        let budget = 0.25 * y.norm_squared();
        let b = l1_constrained_ls(&x, &y, budget, &s).unwrap();
        let obj = b.lp_norm(1);
        assert!((&y - &x * &b).norm_squared() <= budget * (1.0 + s.budget_root_tolerance));
        for t in 0..200 {
            // pull a random point towards the optimum until it is feasible
            let far = GaussianSampler::new(seed, 10 + t).vector(p) * 0.5 + &b;
            let rss = |c: &DenseVector| (&y - &x * c).norm_squared();
            let (mut lo, mut hi) = (0.0, 1.0);
            if rss(&far) <= budget {
                lo = 1.0;
            } else {
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if rss(&(&b + (&far - &b) * mid)) <= budget {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
            }
            let cand = &b + (&far - &b) * lo;
            assert!(obj <= cand.lp_norm(1) + 1e-6 * obj.max(1.0), "seed {seed} t {t}");
        }
    }
}

#[test]
fn nuclear_constrained_beats_sampled_feasible_points() {
    for seed in 0..10 {
        let (l, m) = (6, 8);
        let y = GaussianSampler::new(seed, 0).matrix(l, m) * 2.0;
        let budget = 0.3 * y.norm_squared();
        let fit = nuclear_constrained(&y, budget).unwrap();
        let obj = nuclear(&fit.m_hat);
        let radius = budget.sqrt();
        for t in 0..200 {
            let e = GaussianSampler::new(seed, 10 + t).matrix(l, m) * 0.3;
            // residual direction near the optimal one, rescaled into the ball
            let d = &y - &fit.m_hat + e;
            let d = &d * (radius * ((t % 10) as f64 + 1.0) / 10.0 / d.norm());
            let cand = &y - d;
            assert!(obj <= nuclear(&cand) + 1e-9 * obj.max(1.0), "seed {seed} t {t}");
        }
    }
}

#[test]
fn nuclear_constrained_orthogonal_equivariance() {
    for seed in 0..20 {
        let (l, m) = (4 + seed as usize % 5, 3 + seed as usize % 7);
        let y = GaussianSampler::new(seed, 0).matrix(l, m);
        let budget = 0.4 * y.norm_squared();
        let p = random_orthogonal(l, seed);
        let q = random_orthogonal(m, seed + 1000);
        let direct = nuclear_constrained(&(&p * &y * q.transpose()), budget).unwrap().m_hat;
        let mapped = &p * nuclear_constrained(&y, budget).unwrap().m_hat * q.transpose();
        assert!((direct - mapped).amax() < 1e-8, "seed {seed}");
    }
}

#[test]
fn larger_budget_never_increases_objective() {
    let s = SolverSettings::default();
    for seed in 0..5 {
        let x = GaussianSampler::new(seed, 0).matrix(15, 30);
        let y = GaussianSampler::new(seed, 1).vector(15);
        let mm = GaussianSampler::new(seed, 2).matrix(5, 7);
        let (mut prev_l1, mut prev_nuc) = (f64::INFINITY, f64::INFINITY);
        for k in 0..=10 {
            let frac = k as f64 / 10.0;
            let l1 = l1_constrained_ls(&x, &y, frac * y.norm_squared(), &s).unwrap().lp_norm(1);
            let nuc = nuclear(&nuclear_constrained(&mm, frac * mm.norm_squared()).unwrap().m_hat);
            assert!(l1 <= prev_l1 + 1e-7 * prev_l1.clamp(1.0, 1e300));
            assert!(nuc <= prev_nuc + 1e-9);
            prev_l1 = l1;
            prev_nuc = nuc;
        }
        assert!(prev_l1 == 0.0 && prev_nuc == 0.0);
    }
}
