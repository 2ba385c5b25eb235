use thiserror::Error;

/// Errors produced by geometry, field evaluation and integration routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("radius {r} outside the working range (0, {r_max}]")]
    Domain { r: f64, r_max: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pole evaluation is not available: {0}")]
    Pole(String),

    #[error("non-finite value at r = {r}: {what}")]
    NonFinite { r: f64, what: String },

    #[error("geodesic left the working radius {r_max} at parameter {s}")]
    LeftDomain { s: f64, r_max: f64 },

    #[error(transparent)]
    Expr(#[from] crate::expr::ExprError),
}

pub type Result<T> = std::result::Result<T, Error>;
