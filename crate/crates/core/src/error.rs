use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input lies outside the domain of the operation, e.g. a matrix that
    /// should be positive definite is not.
    #[error("domain error: {0}")]
    Domain(String),

    /// A gamma factor was evaluated at one of its poles. `order` counts how
    /// many scalar factors hit a pole simultaneously.
    #[error("pole of order {order} at {at}")]
    Pole { order: usize, at: f64 },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
