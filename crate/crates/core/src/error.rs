use thiserror::Error;

use crate::expr::{EvalError, ParseError};

/// Errors raised by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A stencil or schedule needs data that is not there (missing time slice, schedule underrun).
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller broke an ordering contract (wrong phase label, wrong substep parity).
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("field sampling failed at time index {time_index}, site ({ix}, {iy}): {reason}")]
    Sampling {
        time_index: usize,
        ix: usize,
        iy: usize,
        reason: String,
    },
    /// A quantity that must vanish identically did not (signals a stencil bug).
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("integrator instability: {0}")]
    Instability(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T> = std::result::Result<T, Error>;
