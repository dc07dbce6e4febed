//! Randomised checks of the norm, dual-norm and projection identities.

use proptest::prelude::*;
use tunefree_core::norms::{dual_norm_eval, norm_eval, project_ball};
use tunefree_core::{DenseVector, GaussianSampler, NormKind};

fn vec_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..=max_len)
}

/// Pairs of equal-length vectors.
fn pair_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=12).prop_flat_map(|n| (prop::collection::vec(-10.0f64..10.0, n), prop::collection::vec(-10.0f64..10.0, n)))
}

fn vector_kinds(n: usize) -> Vec<NormKind> {
    let mut kinds = vec![NormKind::L1, NormKind::L2, NormKind::Sup];
    // factor n as rows x cols for the matrix norms
    let rows = (1..=n).rev().find(|r| n.is_multiple_of(*r) && r * r <= n).unwrap_or(1);
    kinds.push(NormKind::Nuclear { rows, cols: n / rows });
    kinds.push(NormKind::Spectral { rows, cols: n / rows });
    kinds
}

fn dv(v: &[f64]) -> DenseVector {
    DenseVector::from_column_slice(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn homogeneity_and_triangle((x, y) in pair_strategy(), c in -5.0f64..5.0) {
        let (x, y) = (dv(&x), dv(&y));
        for kind in vector_kinds(x.len()) {
            let kx = norm_eval(&kind, &x).unwrap();
            let ky = norm_eval(&kind, &y).unwrap();
            let kcx = norm_eval(&kind, &(&x * c)).unwrap();
            prop_assert!((kcx - c.abs() * kx).abs() <= 1e-9 * (c.abs() * kx).max(1e-12), "{kind:?}");
            let ks = norm_eval(&kind, &(&x + &y)).unwrap();
            prop_assert!(ks <= (kx + ky) * (1.0 + 1e-9) + 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn norm_times_dual_dominates_square(x in vec_strategy(12)) {
        let x = dv(&x);
        let sq = x.norm_squared();
        for kind in vector_kinds(x.len()) {
            let prod = norm_eval(&kind, &x).unwrap() * dual_norm_eval(&kind, &x).unwrap();
            prop_assert!(prod >= sq - 1e-9 * sq, "{kind:?}: {prod} < {sq}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn biduality_l1_sup_nuclear_spectral(x in vec_strategy(12)) {
        let x = dv(&x);
        for kind in vector_kinds(x.len()) {
            if matches!(kind, NormKind::L2) {
                continue;
            }
            let dual = kind.dual_kind().unwrap();
            let kdd = dual_norm_eval(&dual, &x).unwrap();
            let k = norm_eval(&kind, &x).unwrap();
            prop_assert!((kdd - k).abs() <= 1e-9 * k.max(1.0), "{kind:?}: {kdd} vs {k}");
        }
    }

    #[test]
    fn projections_onto_nested_balls(x in vec_strategy(12), l1 in 0.0f64..20.0, l2 in 0.0f64..20.0) {
        let x = dv(&x);
        for kind in vector_kinds(x.len()) {
            if matches!(kind, NormKind::Sup | NormKind::Spectral { .. }) {
                continue;
            }
            let w1 = project_ball(&kind, &x, l1).unwrap();
            let w2 = project_ball(&kind, &x, l2).unwrap();
            let lhs = (&w1 - &w2).norm_squared();
            let rhs = ((&x - &w1).norm_squared() - (&x - &w2).norm_squared()).abs();
            prop_assert!(lhs <= rhs + 1e-8, "{kind:?}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn projection_is_feasible_and_nearest(x in vec_strategy(12), radius in 0.0f64..15.0, seed in any::<u64>()) {
        let x = dv(&x);
        for kind in vector_kinds(x.len()) {
            if matches!(kind, NormKind::Sup | NormKind::Spectral { .. }) {
                continue;
            }
            let w = project_ball(&kind, &x, radius).unwrap();
            prop_assert!(norm_eval(&kind, &w).unwrap() <= radius + 1e-9);
            let dist = (&x - &w).norm();
            for t in 0..200 {
                // random point of the ball: random direction scaled inside
                let v = GaussianSampler::new(seed, t).vector(x.len());
                let kv = norm_eval(&kind, &v).unwrap();
                let scale = radius * ((t % 10) as f64 + 1.0) / 10.0 / kv.max(1e-300);
                let v = v * scale;
                prop_assert!(dist <= (&x - &v).norm() + 1e-9);
            }
        }
    }
}

#[test]
fn l1_dual_never_below_sampled_supremum() {
    // sup_y x.y / |y|_1 over random y approaches |x|_inf from below
    for seed in 0..5 {
        let x = GaussianSampler::new(seed, 0).vector(4);
        let exact = dual_norm_eval(&NormKind::L1, &x).unwrap();
        let mut best: f64 = 0.0;
        for t in 0..100_000u64 {
            // fifth powers of normal draws are heavy-tailed, so some land near the axes
            let y = GaussianSampler::new(seed, t + 1).vector(4).map(|v| v.powi(5));
            best = best.max(x.dot(&y) / y.lp_norm(1));
        }
        assert!(best <= exact + 1e-12);
        assert!(exact - best < 1e-2 * exact, "{exact} {best}");
    }
}
