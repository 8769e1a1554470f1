use thiserror::Error;

/// Errors raised across the walk, POVM, compiler, simulation and tomography layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {0} out of range 1..=4")]
    IndexOutOfRange(usize),
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("coin at site {site} is not unitary (residual {residual:.3e})")]
    NonUnitaryCoin { site: i64, residual: f64 },
    #[error("operator is not unitary (residual {0:.3e})")]
    NonUnitary(f64),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("schedule has no steps")]
    EmptySchedule,
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("POVM completeness violated (residual {0:.3e})")]
    Incomplete(f64),
    #[error("tetrahedron assignment is ambiguous (best score {best}, runner-up {runner_up})")]
    AmbiguousMatch { best: f64, runner_up: f64 },
    #[error("cannot assign {elements} POVM elements to {targets} targets")]
    TooManyElements { elements: usize, targets: usize },
    #[error("visibility {0} outside [0, 1]")]
    InvalidVisibility(f64),
    #[error("angle jitter {0} must be finite and non-negative")]
    InvalidJitter(f64),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("count record is empty")]
    EmptyRecord,
    #[error("number of shots must be positive")]
    ZeroShots,
    #[error("bootstrap needs at least 100 trials, got {0}")]
    TooFewTrials(usize),
    #[error("plate solver failed: {0}")]
    Solver(String),
    #[error("table entries do not match the schedule: {0}")]
    Table(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
