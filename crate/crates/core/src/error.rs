use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("value {0} outside the open interval (0, 1)")]
    OutOfRange(f64),
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("quadrature failure: orthonormality deviation {deviation:.3e} at degree {degree}")]
    QuadratureFailure { degree: usize, deviation: f64 },
    #[error("index set of {0} terms exceeds the size limit")]
    SizeOverflow(u128),
    #[error("basis for dimension {dim} has degree {have}, need {need}")]
    DegreeMismatch { dim: usize, have: usize, need: usize },
    #[error("rank-deficient design: {0}")]
    RankDeficient(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("leverage of observation {0} is one")]
    LeverageOne(usize),
    #[error("no feasible model among the candidate hyperparameters")]
    NoFeasibleModel,
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),
    #[error("copula fit failure: {0}")]
    FitFailure(String),
    #[error("unsupported copula family: {0}")]
    UnsupportedFamily(String),
    #[error("insufficient data: need at least {need} rows, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error("model has dependent inputs but no copula")]
    MissingCopula,
    #[error("dimension {0} unsupported (max {1})")]
    DimensionUnsupported(usize, usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("reference value is zero")]
    ZeroReference,
    #[error("grid has {0} nodes, need at least {1}")]
    GridTooCoarse(usize, usize),
    #[error("singular stiffness matrix")]
    SingularStiffness,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
