use thiserror::Error;

/// Errors raised by the solvers. Validation itself never fails; see
/// [`crate::model::ValidationReport`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("infeasible {what}: {value} (must lie in ({lo}, {hi}])")]
    Infeasible {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("quadrature did not reach tolerance on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("indifference function is not positive at zero (J(0) = {0})")]
    NonPositiveAtZero(f64),

    #[error("closed-form threshold unavailable: {0}")]
    ClosedForm(String),

    #[error("non-interior effort {what} = {value}; cost is not convex enough")]
    NonInterior { what: &'static str, value: f64 },

    #[error("no interior crossing of marginal cost and marginal benefit: {0}")]
    NoInteriorCrossing(String),

    #[error("comparative statics precondition failed: {0}")]
    Statics(String),
}

pub type Result<T> = std::result::Result<T, Error>;
