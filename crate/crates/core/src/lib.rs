//! Tuning-parameter-free estimators for high-dimensional regression and
//! noisy low-rank matrix estimation.
//!
//! The estimators follow one recipe. A noise level is estimated as the ratio
//! `K(Y) / K(Z)` of a norm evaluated on the data and on an independent pure
//! noise draw `Z`, and the mean is then estimated by minimising a (possibly
//! different) norm over the Euclidean ball of squared radius `n * sigma_hat^2`
//! around the data. No penalty level has to be chosen by the user.
//!
//! Vectors and matrices are plain [`nalgebra`] dense types. Matrices that are
//! treated as vectors (nuclear and spectral norms) are flattened column-major.

pub mod error;
pub mod estimators;
pub mod norms;
pub mod rng;
pub mod sim;
pub mod solvers;

pub use error::{Error, Result};
pub use estimators::{
    abstract_fit, estimate_sigma, matrix_fit, matrix_fit_with_noise, regression_fit, risk_bounds,
    MatrixFit, RegressionFit, RiskBound, RiskProblem,
};
pub use norms::{NormKind, NormPair};
pub use rng::GaussianSampler;
pub use solvers::SolverSettings;

/// Column-major dense matrix used for every estimator input and output.
pub type DenseMatrix = nalgebra::DMatrix<f64>;
/// Dense column vector.
pub type DenseVector = nalgebra::DVector<f64>;
