use alloc::string::String;

use crate::time::Timestamp;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors produced by the forecasting and optimisation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(Timestamp),
    #[error("timestamp {0} is not aligned to the {1} s grid")]
    MisalignedTimestamp(Timestamp, i64),
    #[error("grid gap of {gap_steps} steps before {at} exceeds the limit of {limit} steps")]
    GridGap {
        at: Timestamp,
        gap_steps: usize,
        limit: usize,
    },
    #[error("insufficient history: need {required} rows, have {available}")]
    InsufficientHistory { required: usize, available: usize },
    #[error("series extent too short: earliest feasible test day is {0}")]
    ExtentTooShort(Timestamp),
    #[error("timestamps misaligned between inputs at {0}")]
    TimestampMismatch(Timestamp),
    #[error("predicted quantiles cross: level {lower_level} value {lower} > level {upper_level} value {upper}")]
    QuantileCrossing {
        lower_level: f64,
        lower: f64,
        upper_level: f64,
        upper: f64,
    },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("optimiser did not converge: max KKT violation {0}")]
    NonConvergence(f64),
    #[error("infeasible problem: {0}")]
    Infeasible(String),
    #[error("{stage} failed for day {day}: {source}")]
    Stage {
        day: Timestamp,
        stage: &'static str,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wrap an error with the backtest day and stage it occurred in.
    pub fn at_stage(self, day: Timestamp, stage: &'static str) -> Self {
        Error::Stage {
            day,
            stage,
            source: alloc::boxed::Box::new(self),
        }
    }
}
