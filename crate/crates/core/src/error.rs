use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A flux argument left `[0, u_max]` by more than the rounding slack.
    #[error("state {value} outside the invariant region [0, {u_max}]")]
    Domain { value: f64, u_max: f64 },

    #[error("invalid initial datum: cell {cell} average {value} outside [0, {u_max}]")]
    InvalidInitialDatum { cell: usize, value: f64, u_max: f64 },

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("nonlinear solve failed at step {step}: {reason}")]
    StepFailure {
        step: usize,
        reason: String,
        /// Last iterate and its residual, kept for inspection.
        iterate: Vec<f64>,
        residual: Vec<f64>,
    },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
