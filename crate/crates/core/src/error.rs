use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The main-term formulas do not cover the requested parameters.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    /// `F^I_x` is empty, so the density ratio is undefined.
    #[error("undefined density: F^I_x is empty at x = {x}")]
    EmptyFareySet { x: u64 },
}

impl Error {
    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Precondition(_) => "precondition",
            Error::OutOfRegime(_) => "out-of-regime",
            Error::Capacity(_) => "capacity",
            Error::Overflow(_) => "overflow",
            Error::EmptyFareySet { .. } => "empty-farey-set",
        }
    }
}
