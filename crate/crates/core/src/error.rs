use thiserror::Error;

/// Errors raised anywhere in the relay simulator and analysis chain.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input violates a documented precondition (ordering, shape, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A matrix or estimate that should describe a physical state does not.
    #[error("non-physical input: {0}")]
    NonPhysical(String),

    /// Not enough data to carry out an estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A result that must hold by construction (e.g. a fidelity inside
    /// [0, 1]) was found violated at run time.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
