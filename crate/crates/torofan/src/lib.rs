//! Exact-rational machinery for rational polyhedral fans with boundary
//! decorations, sortedness certificates, convex subdivisions, and the
//! cohomology of Danilov-style sheaves of differential forms on the
//! associated toric varieties.
//!
//! Everything is computed over `num::BigRational`; no floating point is used
//! anywhere, so every verdict and certificate is exact and reproducible.

pub mod cech;
pub mod cone;
pub mod fan;
pub mod forms;
pub mod linalg;
pub mod lp;
pub mod sorting;
pub mod subdivide;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("wedge power {p} out of range for ambient dimension {n}")]
    WedgeOutOfRange { p: usize, n: usize },
    #[error("cochain maps do not respect the listed terms at index {0}")]
    MapEscapesTerm(usize),
    #[error("d^2 != 0 at index {0}")]
    DSquaredNonzero(usize),
    #[error("complex shape mismatch: {0}")]
    BadComplex(String),
    #[error("vector is not inside the cone")]
    NotInCone,
    #[error("zero vector cannot be normalized to a primitive ray")]
    ZeroVector,
    #[error("invalid fan: {0}")]
    InvalidFan(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("order must list every !- and *-ray with every *-ray before every !-ray")]
    BadResolutionOrder,
    #[error("well-sorted input")]
    WellSortedInput,
    #[error("image escapes target piece at degree {0:?}")]
    EscapesPiece(Vec<num::BigInt>),
    #[error("twisting divisor must have integer coefficients")]
    NonIntegralTwist,
    #[error("unbounded chamber carries nonvanishing cohomology: {0}")]
    UnboundedChamber(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
