use crate::expr::ExprError;

/// Errors produced by estimation, catalog evaluation, and property checks.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input lies outside the domain it is required to be in, or an
    /// evaluation left the admissible region.
    #[error("domain error: {0}")]
    Domain(String),

    /// Bracket expansion exhausted its budget without finding both signs.
    #[error("no sign change found after {expansions} bracket expansions: {context}")]
    NoSignChange { expansions: u32, context: String },

    /// The function is zero on a plateau wider than the bracket tolerance,
    /// so the point of sign change is not a single point.
    #[error("sign change is not unique: zero plateau spans [{lo}, {hi}]")]
    NonUniqueSignChange { lo: f64, hi: f64 },

    /// Bisection failed to shrink the bracket below tolerance in the
    /// configured number of iterations.
    #[error("bisection did not converge in {limit} iterations (bracket [{lo}, {hi}])")]
    MaxIterations { limit: u32, lo: f64, hi: f64 },

    /// A weight vector was identically zero.
    #[error("weight vector must contain at least one positive entry")]
    ZeroWeightVector,

    /// A sample, block, or count list was empty where at least one
    /// observation is required.
    #[error("sample must contain at least one observation")]
    EmptySample,

    /// A weight grid violated a positivity requirement (for example a row
    /// or column of a bisymmetry grid summed to zero).
    #[error("positivity violation: {0}")]
    PositivityViolation(String),

    /// A probe point produced by a perturbation left the admissible weight
    /// region even after clamping.
    #[error("invalid probe: {0}")]
    InvalidProbe(String),

    /// A query object (for example a sensitivity query) was inconsistent.
    #[error("invalid query: {0}")]
    InvalidQuery(String),

    /// A configuration value was out of range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The requested operation is not defined for this estimator.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Expression parsing or evaluation failed.
    #[error(transparent)]
    Expr(#[from] ExprError),
}

impl Error {
    /// True for failures raised by the solver itself rather than by input
    /// validation: useful for mapping to process exit codes.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NoSignChange { .. }
                | Error::NonUniqueSignChange { .. }
                | Error::MaxIterations { .. }
        )
    }
}
