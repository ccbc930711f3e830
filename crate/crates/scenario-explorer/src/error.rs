use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid path geometry: {0}")]
    InvalidPath(String),

    #[error("invalid parameter dimension `{name}`: {reason}")]
    InvalidDim { name: String, reason: String },

    #[error("index {index:?} out of range for grid with shape {shape:?}")]
    IndexOutOfRange {
        index: Vec<usize>,
        shape: Vec<usize>,
    },

    #[error("arc coordinate {s} outside [0, {length}]")]
    ArcOutOfRange { s: f64, length: f64 },

    #[error(
        "value {value} for `{dim}` is off the sample lattice; nearest lattice values are {below} and {above}"
    )]
    OffLattice {
        dim: String,
        value: f64,
        below: f64,
        above: f64,
    },

    #[error("unknown scenario `{0}` (expected A, B, A3 or B3)")]
    UnknownScenario(String),

    #[error("unknown metric `{0}` (expected euclidean, trajectory, wttc, gap_time or pet)")]
    UnknownMetric(String),

    #[error("unknown dimension `{0}`")]
    UnknownDim(String),

    #[error("actor `{0}` not present in scenario")]
    UnknownActor(String),

    #[error("invalid scenario definition: {0}")]
    InvalidScenario(String),

    #[error("invalid run configuration: {0}")]
    Config(String),

    #[error("surrogate fit failed: {0}")]
    FitFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed records file: {0}")]
    Records(String),
}

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::FitFailure(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}
