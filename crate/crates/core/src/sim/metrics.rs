use crate::{DenseMatrix, DenseVector, Error, Result};

/// `|X beta_hat - X beta0|^2 / n`.
pub fn prediction_error(x: &DenseMatrix, beta_hat: &DenseVector, beta0: &DenseVector) -> Result<f64> {
    if beta_hat.len() != x.ncols() || beta0.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: if beta_hat.len() != x.ncols() { beta_hat.len() } else { beta0.len() },
        });
    }
    let diff = beta_hat - beta0;
    Ok((x * diff).norm_squared() / x.nrows() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub true_positives: usize,
    pub false_positives: usize,
}

/// Counts selected coordinates (`|beta_hat_j| > threshold`) inside and
/// outside the support of `beta0`, skipping `intercept`.
pub fn selection_metrics(beta_hat: &[f64], beta0: &[f64], threshold: f64, intercept: Option<usize>) -> Result<Selection> {
    if beta_hat.len() != beta0.len() {
        return Err(Error::DimensionMismatch {
            expected: beta0.len(),
            got: beta_hat.len(),
        });
    }
    let mut sel = Selection {
        true_positives: 0,
        false_positives: 0,
    };
    for (j, (b, b0)) in beta_hat.iter().zip(beta0).enumerate() {
        if Some(j) == intercept || b.abs() <= threshold {
            continue;
        }
        if *b0 != 0.0 {
            sel.true_positives += 1;
        } else {
            sel.false_positives += 1;
        }
    }
    Ok(sel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianSampler;

    #[test]
    fn exact_estimate_has_zero_error() {
        let x = GaussianSampler::new(1, 0).matrix(6, 4);
        let b = DenseVector::from_vec(vec![1.0, 0.0, -2.0, 0.5]);
        assert_eq!(prediction_error(&x, &b, &b).unwrap(), 0.0);
    }

    #[test]
    fn unit_offset_identity() {
        let n = 7;
        let x = DenseMatrix::identity(n, n);
        let b0 = DenseVector::zeros(n);
        let mut b = b0.clone();
        b[0] = 1.0;
        assert!((prediction_error(&x, &b, &b0).unwrap() - 1.0 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn matches_naive_double_loop() {
        let x = GaussianSampler::new(2, 0).matrix(9, 5);
        let b = GaussianSampler::new(2, 1).vector(5);
        let b0 = GaussianSampler::new(2, 2).vector(5);
        let mut naive = 0.0;
        for i in 0..9 {
            let mut s = 0.0;
            for j in 0..5 {
                s += x[(i, j)] * (b[j] - b0[j]);
            }
            naive += s * s;
        }
        naive /= 9.0;
        assert!((prediction_error(&x, &b, &b0).unwrap() - naive).abs() < 1e-12);
    }

    #[test]
    fn selection_cases() {
        let t = 1e-8;
        let e = |i: usize| {
            let mut v = vec![0.0; 5];
            v[i] = 1.0;
            v
        };
        let b12: Vec<f64> = e(1).iter().zip(e(2)).map(|(a, b)| a + b).collect();
        assert_eq!(
            selection_metrics(&b12, &b12, t, Some(0)).unwrap(),
            Selection { true_positives: 2, false_positives: 0 }
        );
        assert_eq!(
            selection_metrics(&[0.0; 5], &b12, t, Some(0)).unwrap(),
            Selection { true_positives: 0, false_positives: 0 }
        );
        assert_eq!(
            selection_metrics(&e(3), &e(1), t, Some(0)).unwrap(),
            Selection { true_positives: 0, false_positives: 1 }
        );
        // intercept never counted
        assert_eq!(selection_metrics(&e(0), &e(1), t, Some(0)).unwrap().false_positives, 0);
    }
}
