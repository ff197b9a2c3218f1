use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed input: non-finite numbers, bad pmf, empty block list.
    #[error("invalid input: {0}")]
    Input(String),

    /// The operation is not defined for this argument (e.g. a concentration
    /// function of a measure with negative atoms).
    #[error("domain error: {0}")]
    Domain(String),

    /// The exponential series needs more terms than the configured cap.
    #[error("series needs {required} terms, cap is {cap}")]
    Resource { required: usize, cap: usize },

    /// Quadrature did not settle within the refinement budget.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A validator was called on input violating its hypotheses.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
