use thiserror::Error;

/// Errors raised by the numerical engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("class-A expansion did not reach mass 1 - {tolerance:e} within {max_components} components")]
    TruncationNotConverged {
        tolerance: f64,
        max_components: usize,
    },

    #[error(
        "quadrature did not converge after {panels} panels: estimate {estimate:e}, residual {residual:e}"
    )]
    QuadratureNotConverged {
        estimate: f64,
        residual: f64,
        panels: usize,
    },

    #[error("too many mixture component pairs: {pairs} > {limit}")]
    TooManyComponents { pairs: usize, limit: usize },

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
