use std::io;

use thiserror::Error;

/// Errors raised across the solver, decomposition and balancing layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric positive definite (pivot {pivot} at row {row})")]
    NotSpd { row: usize, pivot: f64 },

    #[error("normal matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("right-hand side violates flow conservation: sum = {sum:e}")]
    InconsistentRhs { sum: f64 },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("innovation covariance is singular")]
    SingularInnovation,

    #[error("index range {start}..={end} out of bounds for length {len}")]
    RangeOutOfBounds { start: usize, end: usize, len: usize },

    #[error("subdomains {0} and {1} do not overlap")]
    EmptyOverlap(usize, usize),

    #[error("index {0} is not covered by any subdomain")]
    CoverageGap(usize),

    #[error("subdomain {0} cannot be split: neighbour holds fewer than 2 observations")]
    Unsplittable(usize),

    #[error("every subdomain is empty")]
    AllEmpty,

    #[error("subdomain {from} must send {needed} observations to {to} but holds {held}")]
    InsufficientLoad {
        from: usize,
        to: usize,
        needed: u64,
        held: u64,
    },

    #[error("subdomain {0} has zero load")]
    ZeroLoad(usize),

    #[error("infeasible observation distribution: {0}")]
    InfeasibleDistribution(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O failure: {0}")]
    Io(#[from] io::Error),

    #[error("serialization failure: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
