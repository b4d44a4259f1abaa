use thiserror::Error;

/// Errors raised by the simulation and validation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("event cap of {cap} exceeded in interval {interval}; the system is too stiff for the fine solver")]
    StiffnessOverflow { interval: u64, cap: u64 },
    #[error("state left the bounding box at t = {time}: species {species} = {value}")]
    BoxViolation { time: f64, species: usize, value: f64 },
    #[error("newton iteration failed to converge after {iterations} iterations (residual {residual:e})")]
    CoarseFailure { iterations: usize, residual: f64 },
    #[error("singular jacobian in implicit solve")]
    SingularJacobian,
    #[error("adaptive step size underflow at t = {time}")]
    StepSizeUnderflow { time: f64 },
    #[error("coarse solve failed in parareal cell (k = {k}, n = {n})")]
    CoarseCell {
        k: usize,
        n: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("fine solve failed in parareal cell (k = {k}, n = {n})")]
    FineCell {
        k: usize,
        n: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("degenerate denominator 1 + v = 0 at interval {interval}, species {species}")]
    DegenerateDenominator { interval: usize, species: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("state space too large: {size} states exceeds cap {cap}")]
    StateSpaceTooLarge { size: u128, cap: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("{0}")]
    Validation(String),
    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
