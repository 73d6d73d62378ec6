use thiserror::Error;

/// Errors raised by the estimation core, the TMA models and the benchmark harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("spread matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error(
        "possibility function is too concentrated: its total mass is {mass:e} < 1, so no \
         probability density is dominated by it; rescale the state units (e.g. metres instead \
         of kilometres) or widen the spread"
    )]
    TooConcentrated { mass: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("weight {value} at index {index} is outside (0, 1]")]
    WeightsOutOfRange { index: usize, value: f64 },

    #[error("weights must contain a unit maximum, found max = {max}")]
    NoUnitWeight { max: f64 },

    #[error("all input values are zero")]
    AllZero,

    #[error("all particle weights vanished at scan {scan}")]
    AllWeightsZero { scan: usize },

    #[error("bearing undefined at the origin")]
    AtOrigin,

    #[error("singular information matrix at scan {scan}")]
    SingularInformation { scan: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
