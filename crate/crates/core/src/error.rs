//! Error type shared by every module of the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building profiles, solving the
/// trade-off problem, or running an experiment.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("a distribution needs at least 2 categories, got {0}")]
    TooFewCategories(usize),

    #[error("dimension mismatch: {left} vs {right} categories")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite mass {value} at category {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("negative mass {value} at category {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("masses sum to {sum}, which is too far from 1 to renormalize")]
    NotNormalized { sum: f64 },

    #[error("zero or negative probability in categories {categories:?}")]
    PositivityViolation { categories: Vec<usize> },

    #[error("reference has zero mass at category {index} where the other distribution does not")]
    SupportViolation { index: usize },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("{name} = {value} is outside its domain {domain}")]
    RateOutOfRange {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("operation undefined in the critical interior region")]
    RegionError,

    #[error("infeasible strategy: {0}")]
    FeasibilityViolation(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("grid oracle supports at most {max} categories, got {got}")]
    DimensionTooLarge { got: usize, max: usize },

    #[error("descent did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence {
        residual: f64,
        iterations: usize,
        best: Box<crate::oracle::OracleResult>,
    },

    #[error("apparent mass vector is infeasible: {0}")]
    InfeasibleU(String),

    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("line {line}: unknown genre {genre:?}")]
    UnknownGenre { line: usize, genre: String },

    #[error("rating references unknown movie {movie_id}")]
    UnknownMovie { movie_id: u32 },

    #[error("population profile has zero mass in categories {categories:?}")]
    PopulationDegenerate { categories: Vec<usize> },

    #[error("no eligible users")]
    EmptyPopulation,

    #[error("user {0} not found in the profile store")]
    UserNotFound(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("self-check failed: {0}")]
    SelfCheckFailed(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end:
    /// 1 self-check failure, 2 usage/domain error, 3 data error.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            SelfCheckFailed(_) => 1,
            TooFewCategories(_)
            | DimensionMismatch { .. }
            | NonFinite { .. }
            | NegativeMass { .. }
            | NotNormalized { .. }
            | PositivityViolation { .. }
            | SupportViolation { .. }
            | RateOutOfRange { .. }
            | RegionError
            | FeasibilityViolation(_)
            | DegenerateInput(_)
            | DimensionTooLarge { .. }
            | InvalidArgument(_) => 2,
            InvariantViolation(_)
            | NonConvergence { .. }
            | InfeasibleU(_)
            | MalformedLine { .. }
            | UnknownGenre { .. }
            | UnknownMovie { .. }
            | PopulationDegenerate { .. }
            | EmptyPopulation
            | UserNotFound(_)
            | Io { .. }
            | Json(_)
            | Csv(_) => 3,
        }
    }
}
