//! Dense complex helpers shared by the operator and spectral modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// `(largest, smallest)` singular values.
pub fn singular_extremes(m: &CMatrix) -> (f64, f64) {
    let s = m.clone().singular_values();
    (s.max(), s.min())
}

/// 2-norm condition number; infinite for singular input.
pub fn cond(m: &CMatrix) -> f64 {
    let (hi, lo) = singular_extremes(m);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// LU inverse; `what` names the matrix in the error.
pub fn inverse(m: &CMatrix, what: &str) -> Result<CMatrix> {
    let inv = m
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular(what.to_string()))?;
    if inv.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular(what.to_string()));
    }
    Ok(inv)
}

/// `diag(d) m`.
pub fn scale_rows(d: &[Complex64], m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| d[i] * m[(i, j)])
}
