use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |A - A*| entry = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("trace is {trace} but must be 1")]
    TraceNotOne { trace: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("log of a singular operator (min eigenvalue {min_eigenvalue:e})")]
    SingularLog { min_eigenvalue: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("duplicate channel label `{0}`")]
    DuplicateLabel(String),

    #[error("label `{0}` is not an input of the channel")]
    UnknownLabel(String),

    #[error("distribution weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },

    #[error("negative weight {weight} for label `{label}`")]
    NegativeWeight { label: String, weight: f64 },

    #[error("cost function missing label `{0}`")]
    MissingCost(String),

    #[error("no input satisfies the cost budget {budget}")]
    InfeasibleBudget { budget: f64 },

    #[error("dimension {required} exceeds the configured bound {bound}")]
    DimensionBound { required: u128, bound: usize },

    #[error("{count} type classes exceed the configured bound {bound}")]
    CombinatorialBound { count: u128, bound: usize },

    #[error("threshold e^(n a) with n a = {na} is not representable")]
    ThresholdOverflow { na: f64 },

    #[error(
        "capacity iteration did not reach gap <= {tol:e} in {iterations} steps (gap {gap:e})"
    )]
    NonConvergence {
        tol: f64,
        iterations: usize,
        gap: f64,
        best: Box<crate::capacity::CapacityResult>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel file: {0}")]
    ChannelFile(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
