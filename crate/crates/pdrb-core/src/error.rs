//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors reported by the diagram, metric and solver operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A point or value was NaN or infinite where a finite one is required.
    NonFinite(String),
    /// A point has `birth > death` (below the diagonal).
    BelowDiagonal { birth: f64, death: f64 },
    /// An exponent `q < 1` was supplied.
    InvalidExponent(f64),
    /// A pruning threshold or tolerance was negative.
    NegativeThreshold(f64),
    /// A weight vector is not a point of the probability simplex.
    InvalidWeights(String),
    /// Mismatched sizes between paired inputs.
    SizeMismatch(String),
    /// An argument was structurally invalid (empty ensemble, zero grid, ...).
    InvalidArgument(String),
    /// A brute-force routine was asked to exceed its enumeration bound.
    TooLarge { size: usize, max: usize },
    /// An iterative solver hit its iteration cap before meeting tolerance.
    /// The best iterate is still usable; this is surfaced when a caller
    /// asked for failure instead of a flagged result.
    DidNotConverge { iterations: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::BelowDiagonal { birth, death } => {
                write!(
                    f,
                    "point ({birth}, {death}) lies below the diagonal (birth > death)"
                )
            }
            Error::InvalidExponent(q) => write!(f, "exponent q must satisfy q >= 1, got {q}"),
            Error::NegativeThreshold(t) => write!(f, "threshold must be non-negative, got {t}"),
            Error::InvalidWeights(why) => write!(f, "invalid weight vector: {why}"),
            Error::SizeMismatch(why) => write!(f, "size mismatch: {why}"),
            Error::InvalidArgument(why) => write!(f, "invalid argument: {why}"),
            Error::TooLarge { size, max } => {
                write!(f, "problem size {size} exceeds brute-force bound {max}")
            }
            Error::DidNotConverge { iterations } => {
                write!(f, "solver did not converge within {iterations} iterations")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
