use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures reported by the library. Offending magnitudes are carried as
/// `f64` regardless of the scalar type the computation ran in.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("malformed matrix: {0}")]
    Shape(String),
    #[error("matrix is {rows}x{cols}, expected a non-empty square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |A_ij - conj(A_ji)| = {asymmetry:e}")]
    NotHermitian { asymmetry: f64 },
    #[error("trace deviates from one by {deviation:e}")]
    TraceNotOne { deviation: f64 },
    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error("matrix is not symmetric: max |S_ij - S_ji| = {asymmetry:e}")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is not antisymmetric: max |N_ij + N_ji| = {defect:e}")]
    NotAntisymmetric { defect: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("populations not sorted in descending order at index {index}")]
    NotSorted { index: usize },
    #[error("probability vector is not normalized: sum = {sum}")]
    NotNormalized { sum: f64 },
    #[error("negative probability {value:e} at index {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("U_max = {umax:e} is degenerate (single-sector support), cohesion index undefined")]
    UmaxDegenerate { umax: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("lambda must be positive, got {lambda}")]
    BadLambda { lambda: f64 },
    #[error("index pair ({i}, {j}) is not a valid off-diagonal pair for dimension {dim}")]
    IndexOutOfRange { i: usize, j: usize, dim: usize },
    #[error("sector ({i}, {j}) carries no population (weight {weight:e})")]
    EmptySector { i: usize, j: usize, weight: f64 },
    #[error("negative rate {gamma} for channel {index}")]
    NegativeRate { index: usize, gamma: f64 },
    #[error(
        "generator is not IRB-selective: max commutator norm {max_commutator_norm:e} > tol {tol:e} \
         (epsilon estimate {epsilon_estimate:e})"
    )]
    NotSelective {
        max_commutator_norm: f64,
        tol: f64,
        per_channel_deviation: Vec<f64>,
        hamiltonian_deviation: f64,
        epsilon_estimate: f64,
    },
    #[error("sample times must be strictly increasing (violated at index {index})")]
    NonMonotoneTimes { index: usize },
    #[error("integration step too coarse: {0}")]
    StepTooCoarse(String),
    #[error("matrix is not doubly stochastic: deviation {deviation:e}")]
    NotDoublyStochastic { deviation: f64 },
    #[error("epsilon must lie in (0, 1), got {epsilon}")]
    BadEpsilon { epsilon: f64 },
    #[error("dephasing rate must be positive")]
    ZeroRate,
    #[error("state is already classical at this threshold")]
    AlreadyClassical,
    #[error("cohesion index undefined at trajectory sample {index}")]
    UndefinedPc { index: usize },
    #[error("population gap {gap:e} too small for a per-vector frame bound")]
    DegenerateGap { gap: f64 },
    #[error("json: {0}")]
    Json(String),
}

impl Error {
    /// Stable short name of the error kind, used by the command-line tool.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "Shape",
            Error::NotSquare { .. } => "NotSquare",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::TraceNotOne { .. } => "TraceNotOne",
            Error::NotPsd { .. } => "NotPSD",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::NotAntisymmetric { .. } => "NotAntisymmetric",
            Error::DimMismatch { .. } => "DimMismatch",
            Error::NotSorted { .. } => "NotSorted",
            Error::NotNormalized { .. } => "NotNormalized",
            Error::NegativeProbability { .. } => "NegativeProbability",
            Error::UmaxDegenerate { .. } => "UmaxDegenerate",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::BadLambda { .. } => "BadLambda",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::EmptySector { .. } => "EmptySector",
            Error::NegativeRate { .. } => "NegativeRate",
            Error::NotSelective { .. } => "NotSelective",
            Error::NonMonotoneTimes { .. } => "NonMonotoneTimes",
            Error::StepTooCoarse(_) => "StepTooCoarse",
            Error::NotDoublyStochastic { .. } => "NotDoublyStochastic",
            Error::BadEpsilon { .. } => "BadEpsilon",
            Error::ZeroRate => "ZeroRate",
            Error::AlreadyClassical => "AlreadyClassical",
            Error::UndefinedPc { .. } => "UndefinedPc",
            Error::DegenerateGap { .. } => "DegenerateGap",
            Error::Json(_) => "Json",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
