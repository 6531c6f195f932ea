use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A linear map built from machine rules does not preserve inner products.
    #[error("isometry violation: max Gram deviation {deviation:.3e}")]
    IsometryViolation { deviation: f64 },

    #[error("conflicting deleter rules: {0}")]
    ConflictingRules(String),

    /// The Bloch-form coherence expression has a negative radicand.
    #[error("Bloch-form coherence outside its domain (radicand {radicand:.3e})")]
    Domain { radicand: f64 },

    #[error("coherence difference does not change sign on (0, 1)")]
    NoRoot,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IsometryViolation { .. }
                | Error::ConflictingRules(_)
                | Error::Domain { .. }
                | Error::NoRoot
        )
    }
}
