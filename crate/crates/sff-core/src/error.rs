use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside its documented domain.
    InvalidParameter(String),
    /// An input matrix or spectrum violates a structural precondition.
    InvalidInput(String),
    /// An iterative solver did not converge within its budget.
    Convergence {
        routine: &'static str,
        iterations: usize,
    },
    /// A quantity cannot be estimated from the data supplied.
    InsufficientData(String),
    /// A closed form was evaluated outside its range of validity.
    OutsideSupport(String),
    /// A denominator vanishes at the requested point.
    Singularity(String),
    /// The requested order is larger than the routine supports.
    UnsupportedOrder { requested: usize, max: usize },
    /// The result would overflow `f64`.
    Overflow(String),
    /// Finite differences failed to settle at the chosen step.
    StepSize(String),
    /// Two accumulators or snapshots describe different runs.
    Mismatch(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Convergence {
                routine,
                iterations,
            } => {
                write!(
                    f,
                    "{routine} did not converge after {iterations} iterations"
                )
            }
            Error::InsufficientData(msg) => write!(f, "insufficient data: {msg}"),
            Error::OutsideSupport(msg) => write!(f, "outside support: {msg}"),
            Error::Singularity(msg) => write!(f, "singular point: {msg}"),
            Error::UnsupportedOrder { requested, max } => {
                write!(f, "order {requested} not supported (maximum {max})")
            }
            Error::Overflow(msg) => write!(f, "overflow: {msg}"),
            Error::StepSize(msg) => write!(f, "finite-difference step: {msg}"),
            Error::Mismatch(msg) => write!(f, "mismatch: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
