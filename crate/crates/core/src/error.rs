use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A construction parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter {
        /// Parameter name.
        name: &'static str,
        /// Human readable constraint.
        reason: String,
    },

    /// An argument lies outside the domain of a function.
    #[error("domain error in {function}: {reason}")]
    Domain {
        /// Function that rejected the argument.
        function: &'static str,
        /// Human readable constraint.
        reason: String,
    },

    /// The operation is not defined for this spacetime model.
    #[error("{operation} is not supported for the {model} model")]
    UnsupportedModel {
        /// Requested operation.
        operation: &'static str,
        /// Model kind name.
        model: &'static str,
    },

    /// The metric is numerically singular at the evaluation point.
    #[error("singular metric (condition estimate {condition:e})")]
    SingularMetric {
        /// 1-norm condition estimate, `inf` when a pivot vanished.
        condition: f64,
    },

    /// An iterative approximation missed its tolerance within its budget.
    #[error("{what} did not reach tolerance: best value {best}, error estimate {error_estimate:e}")]
    Accuracy {
        /// Which approximation failed.
        what: &'static str,
        /// Best available value.
        best: f64,
        /// Error estimate for `best`.
        error_estimate: f64,
    },

    /// Spectral flow sampling too coarse to resolve the crossings of a branch.
    #[error("mode {mode} may cross zero more than once in [{t_lo}, {t_hi}]; increase the number of samples")]
    Resolution {
        /// Offending mode index.
        mode: i64,
        /// Left end of the sampling interval.
        t_lo: f64,
        /// Right end of the sampling interval.
        t_hi: f64,
    },

    /// A precondition of the index formula does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

/// Crate result alias.
pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(function: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            function,
            reason: reason.into(),
        }
    }
}
