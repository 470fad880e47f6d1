use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("eigen-solver did not converge for a {0}x{0} matrix")]
    EigenNonConvergence(usize),

    #[error("selected eigenvalue is degenerate: {0} and {1} are within tolerance")]
    DegenerateEigenvalue(String, String),

    #[error("lifetime fit failed: {0}")]
    Fit(String),

    #[error("insufficient trace: {0}")]
    InsufficientTrace(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures that come from numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNonConvergence(_) | Error::DegenerateEigenvalue(..) | Error::Fit(_)
        )
    }
}
