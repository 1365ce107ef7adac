use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// `Config` covers anything the caller can fix by changing inputs; every
/// other variant is a numerical failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CasimirError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("perfect_metal has no numerical permittivity; use the perfect-metal reflection path")]
    PerfectMetalQueried,

    #[error("non-finite integrand value at xi = {xi}")]
    NonFinite { xi: f64 },

    #[error("truncation not converged: {what} (last term {last:e})")]
    Truncation { what: String, last: f64 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("internal consistency violated: {0}")]
    Consistency(String),
}

impl CasimirError {
    pub fn config(msg: impl Into<String>) -> Self {
        CasimirError::Config(msg.into())
    }

    /// True for errors the user can fix in the scenario description.
    pub fn is_config(&self) -> bool {
        matches!(self, CasimirError::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, CasimirError>;
