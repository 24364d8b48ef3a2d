//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants mirror the failure
//! modes of the individual modules so callers can match on exactly the
//! condition they care about (a point sitting on a divisor, a resource cap,
//! a degenerate instantiation, ...).

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation that requires a nonzero rational received zero.
    #[error("input must be nonzero")]
    ZeroInput,

    /// Attempt to build a finite place from a composite or unit.
    #[error("{0} is not a prime")]
    NotPrime(u64),

    /// A projective point needs at least one nonzero coordinate.
    #[error("projective point has no nonzero coordinate")]
    ZeroPoint,

    /// A polynomial operation received the zero polynomial.
    #[error("polynomial has no nonzero coefficient")]
    ZeroPolynomial,

    /// Mismatched variable counts between two objects.
    #[error("dimension mismatch: expected {expected} variables, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A Weil function was evaluated at a zero of its polynomial.
    #[error("point lies on the divisor")]
    PointOnDivisor,

    /// Normalization pivot has zero (or absent) coefficient.
    #[error("pivot monomial has zero coefficient")]
    ZeroPivot,

    /// Polynomial text did not describe a homogeneous polynomial.
    #[error("polynomial is not homogeneous: offending monomial {monomial}")]
    NotHomogeneous { monomial: String },

    /// Grammar-level parse failure (polynomials, sequence expressions,
    /// places, rationals).
    #[error("parse error: {0}")]
    Parse(String),

    /// A configured resource cap was exceeded.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// Degree extraction was asked for on an empty projective scheme.
    #[error("projective scheme is empty")]
    EmptyScheme,

    /// The weighted factor needs at least one positive weight.
    #[error("all weights are zero")]
    AllWeightsZero,

    /// The filtration lower bound needs at least one nonzero c entry.
    #[error("all c entries are zero")]
    AllCZero,

    /// The filtration upper bound needs b_1 != 0.
    #[error("b_1 must be nonzero")]
    B1Zero,

    /// A sequence expression divided by zero at a specific index.
    #[error("division by zero at alpha = {0}")]
    DivisionByZeroAt(u64),

    /// A moving hypersurface or point degenerated at a specific index.
    #[error("degenerate instance at alpha = {alpha}: {what}")]
    DegenerateInstance { alpha: u64, what: String },

    /// A verification row had to be skipped; carries the reason.
    #[error("alpha = {alpha} excluded: {reason}")]
    ExcludedAlpha { alpha: u64, reason: String },

    /// A hypersurface of a weighted configuration lies in the variety ideal.
    #[error("hypersurface {index} is contained in the variety ideal")]
    ContainsVariety { index: usize },

    /// Caller violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Configuration-level problem with field context.
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// Exact cross-checks that can only fail on an implementation bug.
    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
