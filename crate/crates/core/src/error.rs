use thiserror::Error;

/// Errors raised by the model, operators, solver and constants engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model parameter violates one of the admissible inequalities.
    #[error("parameter out of domain: {0}")]
    ParamDomain(String),

    /// A function argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is only defined for a different interaction regime.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// A named inequality of the bootstrap chain does not hold.
    #[error("validity check `{name}` failed (margin {margin:e})")]
    Validity { name: String, margin: f64 },

    /// The time step collapsed below the configured floor.
    #[error("blow-up suspected at t = {t}: dt = {dt:e} below dt_min")]
    BlowupSuspected { t: f64, dt: f64 },

    /// A property the discrete scheme guarantees was violated.
    #[error("scheme invariant violated: {0}")]
    Invariant(String),

    /// Malformed input data (series, snapshots).
    #[error("invalid data: {0}")]
    Data(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
