use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid truncated space: {0}")]
    InvalidSpace(String),

    #[error("level {level} is outside the truncated space of dimension {dim}")]
    OutOfRange { level: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "truncation tail mass {tail:.3e} exceeds tolerance {tolerance:.3e} \
         (an estimated dimension of {required_dim} is needed)"
    )]
    Truncation { tail: f64, tolerance: f64, required_dim: usize },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace {trace:.12} differs from one")]
    NotNormalized { trace: f64 },

    #[error("outcome probability {probability:.3e} is below the update floor")]
    ZeroProbability { probability: f64 },

    #[error("outcome grid does not cover the state support (completeness defect {defect:.3e})")]
    Coverage { defect: f64 },

    #[error("noise quadrature is too coarse (defect {defect:.3e})")]
    Discretization { defect: f64 },

    #[error("phase-space grids do not match")]
    GridMismatch,

    #[error("invalid direction scheme: {0}")]
    Scheme(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("negative probability {value:.3e} at setting {setting}, outcome {outcome}")]
    NegativeProbability { setting: usize, outcome: usize, value: f64 },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
