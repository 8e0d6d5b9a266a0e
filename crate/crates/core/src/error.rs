use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for a sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {z} coincides with the eigenvalue mu_{index} of the unperturbed operator")]
    OnSpectrum { z: Complex64, index: usize },

    #[error("dominance certificate violated at ({row}, {col}): |v| = {value:e} > {bound:e}")]
    Certificate {
        row: usize,
        col: usize,
        value: f64,
        bound: f64,
    },

    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("eigenvalue {lambda} lies within {distance:e} of the contour")]
    NearContour { lambda: Complex64, distance: f64 },

    #[error("resolvent bound violated: ||B(z)|| <= {bound} > 1/2 at z = {z}")]
    ResolventBound { z: Complex64, bound: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
