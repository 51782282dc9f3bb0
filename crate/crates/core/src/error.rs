use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Requested mass is at or beyond the critical value 8π.
    #[error("mass {mass} is outside (0, 8π) (critical threshold {limit})")]
    CriticalMass { mass: f64, limit: f64 },

    /// Quadratic `x² − 8πx + 2β = 0` has no real roots.
    #[error("β = {beta} exceeds 8π², the quadratic has complex roots")]
    ComplexRoots { beta: f64 },

    #[error("fields live on different grids: {0}")]
    GridMismatch(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
