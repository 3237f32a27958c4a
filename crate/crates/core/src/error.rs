use thiserror::Error;

/// Errors raised by the model constructors and evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An optimization problem has no feasible point.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Root finding on a CDF did not converge.
    #[error("quantile inversion failed: {0}")]
    Inversion(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
