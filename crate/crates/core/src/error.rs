//! Error type shared by all algebra layers.

use thiserror::Error;

/// Errors surfaced by fallible algebra operations.
///
/// Structural misuse (mixing jets of different dimension, adding Grassmann
/// elements over different numbers of generators, …) is a programming error
/// and panics instead; every variant here describes a *domain* failure that
/// valid code can run into on valid-looking input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    /// Inversion of an element whose leading/constant part vanishes.
    #[error("not invertible: {0}")]
    NotInvertible(String),

    /// exp/log/antiderivative called outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Laurent series vanishes through its entire tracked range, so its
    /// leading term (and hence inverse) is indeterminate.
    #[error("series is zero up to its tracked order {0}; leading term unknown")]
    IndeterminateLeading(i64),

    /// The base-point Hessian of a potential is singular.
    #[error("degenerate potential: {0}")]
    DegenerateHessian(String),

    /// The fermionic pairing matrix of a nilpotent potential is singular.
    #[error("degenerate nilpotent potential: {0}")]
    DegenerateNilpotent(String),

    /// Matrix inversion over the star algebra failed; the element does not
    /// define a product.
    #[error("not admissible: {0}")]
    NotAdmissible(String),

    /// A gradient system failed its mixed-partials consistency check.
    #[error("inconsistent gradient system: {0}")]
    InconsistentGradient(String),

    /// A symbolic logarithm was requested for a base that is not a positive
    /// rational number.
    #[error("log base must be a positive rational, got {0}")]
    BadLogBase(String),

    /// Scenario validation failure (which invariant failed, and where).
    #[error("invalid scenario: {0}")]
    Validation(String),

    /// Resource guardrail: the requested configuration exceeds the work
    /// budget and was refused.
    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;
