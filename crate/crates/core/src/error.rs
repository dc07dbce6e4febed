use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is rank deficient (rank {rank} < {required})")]
    RankDeficient { rank: usize, required: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{solver} did not converge after {iterations} iterations (primal residual {primal_residual:.3e}, gap {gap:.3e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        primal_residual: f64,
        gap: f64,
    },

    #[error("constraint set is empty: {0}")]
    Infeasible(String),

    #[error("noise draw has zero norm")]
    DegenerateNoise,

    #[error("singular value decomposition failed to converge")]
    SvdFailed,

    #[error("{step}: {source}")]
    Step {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, step: &'static str) -> Error {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    /// Name of the estimator step that failed, when known.
    pub fn step(&self) -> Option<&'static str> {
        match self {
            Error::Step { step, .. } => Some(step),
            _ => None,
        }
    }

    /// The underlying error with step annotations removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for numerical failures (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self.root(),
            Error::NotConverged { .. } | Error::SvdFailed | Error::Infeasible(_) | Error::DegenerateNoise
        )
    }
}
