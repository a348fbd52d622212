use alloc::string::String;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),
    /// An enumeration would exceed its configured budget. Checked before any
    /// allocation happens.
    #[error("resource limit: {what} needs {required:.3e} units, budget is {budget:.3e}")]
    ResourceLimit {
        what: &'static str,
        required: f64,
        budget: f64,
    },
    #[error("numerical overflow: {0}")]
    NumericalOverflow(String),
    #[error("divergent series: {0}")]
    DivergentSeries(String),
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
