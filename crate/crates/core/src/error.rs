//! Error types shared across the library.

use crate::data::Group;

/// Errors produced by estimation, projection, planning and power routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An MLE lies on the boundary of the parameter domain (e.g. an all-zero
    /// binary group). Reported rather than silently clipped; callers choose a
    /// policy (see [`crate::families::ClipPolicy`]).
    #[error("degenerate data in group {group}: MLE {value} lies on the domain boundary")]
    DegenerateData { group: Group, value: f64 },

    /// The Fisher information is not invertible at the given parameter.
    #[error("singular Fisher information at theta = {theta}")]
    SingularInformation { theta: f64 },

    /// A parameter is outside the family's domain, or an input is outside its
    /// mathematically valid range.
    #[error("domain error: {0}")]
    Domain(String),

    /// The convex combination of efficacy values leaves the range of the
    /// efficacy map, so no boundary parameter exists.
    #[error("range error: {0}")]
    Range(String),

    /// The numerical optimizer did not converge within its iteration cap.
    #[error("optimization failure: {0}")]
    OptimizationFailure(String),

    /// The radicand of the closed-form projection is negative.
    #[error("negative discriminant in closed-form projection (radicand = {radicand})")]
    NegativeDiscriminant { radicand: f64 },

    /// Optimal allocation would assign weight zero to a group, which violates
    /// the standing assumption w_k in (0,1). Carries the limiting two-arm
    /// suggestion.
    #[error("degenerate allocation at delta = {delta}: {suggestion}")]
    DegenerateAllocation { delta: f64, suggestion: String },

    /// The alternative does not satisfy the assumptions of the requested
    /// comparison (e.g. the rule of thumb needs theta_R = theta_T).
    #[error("hypothesis mismatch: {0}")]
    HypothesisMismatch(String),

    /// An exact enumeration would exceed the configured evaluation budget.
    #[error("budget exceeded: enumeration needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u64, budget: u64 },

    /// Invalid user input (configuration values, malformed statistics, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A text input could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An input file is missing one of the three trial groups.
    #[error("missing group {0} in input")]
    MissingGroup(Group),

    /// A group statistic is inconsistent (duplicate rows, count exceeding n, ...).
    #[error("inconsistent statistic: {0}")]
    InconsistentStat(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 validation, 3 numerical, 4 budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Invalid(_)
            | Error::Parse { .. }
            | Error::MissingGroup(_)
            | Error::InconsistentStat(_)
            | Error::DegenerateAllocation { .. }
            | Error::HypothesisMismatch(_) => 2,
            Error::DegenerateData { .. }
            | Error::SingularInformation { .. }
            | Error::Range(_)
            | Error::OptimizationFailure(_)
            | Error::NegativeDiscriminant { .. } => 3,
            Error::BudgetExceeded { .. } => 4,
        }
    }
}
