//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by field evaluation, solvers and state construction.
#[derive(Debug, Error)]
pub enum FieldflowError {
    /// An equation-of-state argument left its supported domain (V <= 0, T <= 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A fluid configuration stopped being a diffeomorphism (folded map,
    /// non-positive Jacobian determinant, non-monotone field).
    #[error("configuration error: {0}")]
    Configuration(String),

    /// An iterative solver (Newton, fixed point) failed to converge.
    #[error("solver error: {0}")]
    Solver(String),

    /// Malformed call: bad grid size, missing history levels, step-size guard.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, FieldflowError>;
