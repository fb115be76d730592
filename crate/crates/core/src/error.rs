use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter that must be strictly positive was zero or negative.
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },

    /// A parameter violated a range or consistency rule.
    #[error("{name} is invalid: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A trajectory plan with no segments was passed to the scenario engine.
    #[error("trajectory plan has no segments")]
    EmptyPlan,

    /// Metrics were requested on a trace with no recorded steps.
    #[error("simulation trace is empty")]
    EmptyTrace,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and >= 0 (got {value})"),
        })
    }
}
