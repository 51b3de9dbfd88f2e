use alloc::string::String;

/// A caller broke a documented precondition of a numeric routine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContractError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty vector")]
    Empty,
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("lipschitz constant at index {index} is not strictly positive ({value})")]
    NonPositiveLipschitz { index: usize, value: f64 },
    #[error("box bounds inverted at index {index}: lower {lower} > upper {upper}")]
    InvertedBox {
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("all-zero input to greedy selection; termination must fire first")]
    AllZero,
}

/// Errors raised while building a problem instance.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error("label {value} at sample {index} is not +1 or -1")]
    BadLabel { index: usize, value: f64 },
    #[error("feature index {index} out of range for dimension {dim}")]
    FeatureOutOfRange { index: usize, dim: usize },
    #[error("regularization weight must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("matrix is not monotone: smallest eigenvalue of the symmetric part is {0}")]
    NotMonotone(f64),
    #[error("column {0} of the affine map is identically zero")]
    ZeroColumn(usize),
}

/// The adaptive stepsize `β_k` came out negative.
///
/// For a valid componentwise Lipschitz constant `β_k > 0` whenever
/// `F_i(x_k) ≠ 0`, so a negative value means `l_i` underestimates the true
/// constant along `coordinate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepsizeFailure {
    pub iteration: u64,
    /// `None` for full-vector (EG) steps.
    pub coordinate: Option<usize>,
    pub beta: f64,
    /// The constant used for the prediction step (`l_i`, or `L` for EG).
    pub lipschitz: f64,
}

impl core::fmt::Display for StepsizeFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.coordinate {
            Some(i) => write!(
                f,
                "negative stepsize {:e} at iteration {}: l_{} = {} violates the \
                 componentwise Lipschitz condition along coordinate {}",
                self.beta, self.iteration, i, self.lipschitz, i
            ),
            None => write!(
                f,
                "negative stepsize {:e} at iteration {}: L = {} is not a valid \
                 global Lipschitz constant",
                self.beta, self.iteration, self.lipschitz
            ),
        }
    }
}

/// Errors that stop a solver before or during a run.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(
        "EG needs the global Lipschitz constant L; estimate it first \
         (e.g. with_global_lipschitz on the problem, which runs power iteration)"
    )]
    MissingGlobalLipschitz,
    #[error("{0}")]
    Stepsize(StepsizeFailure),
    #[error(transparent)]
    Contract(#[from] ContractError),
}
