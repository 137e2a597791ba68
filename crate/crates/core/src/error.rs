use thiserror::Error;

/// Coarse error class, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Budget,
    Internal,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: form has dimension {form}, point has dimension {point}")]
    DimensionMismatch { form: usize, point: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("non-finite entry in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("signature (p={p}, q={q}, z={z}) does not match dimension {dim}")]
    SignatureMismatch { p: usize, q: usize, z: usize, dim: usize },

    #[error("degenerate signature: z = {z} zero eigenvalues, a nondegenerate form is required")]
    DegenerateSignature { z: usize },

    #[error("singular deformation: |det g| = {det:e} is below threshold {threshold:e}")]
    Singular { det: f64, threshold: f64 },

    #[error("inverted window: lambda_min = {min} exceeds lambda_max = {max}")]
    InvertedWindow { min: f64, max: f64 },

    #[error("enumeration of {required} points exceeds the budget of {budget}; use a smaller box or word radius")]
    Budget { required: u128, budget: u64 },

    #[error("window too small: box radius {box_radius} produced {distinct} distinct eigenvalue(s), need at least 2")]
    WindowTooSmall { box_radius: u32, distinct: usize },

    #[error("matrix is not in the group: determinant {det} drifts from 1 by more than {tolerance:e}")]
    NotInGroup { det: f64, tolerance: f64 },

    #[error("vector {coords:?} is outside the closed dominant chamber")]
    OutsideChamber { coords: Vec<f64> },

    #[error("chamber dimension mismatch: {left} vs {right}")]
    ChamberMismatch { left: usize, right: usize },

    #[error("no usable data: {0}")]
    NoData(String),

    #[error("sampling failed: {0}")]
    Sampling(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Budget { .. } => ErrorClass::Budget,
            Error::Sampling(_) => ErrorClass::Internal,
            _ => ErrorClass::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
