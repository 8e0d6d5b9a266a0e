use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{op_norm, CMatrix};
use crate::sequence_models::Spectrum;

/// `w^s = |w|^s e^{i s arg w}` with `arg w` in `(-pi, pi]`; a signed zero
/// imaginary part never flips the branch.
pub fn principal_pow(w: Complex64, s: f64) -> Complex64 {
    let mut arg = w.im.atan2(w.re);
    if arg == -std::f64::consts::PI {
        arg = std::f64::consts::PI;
    }
    Complex64::from_polar(w.norm().powf(s), s * arg)
}

fn check_off_spectrum(spec: &Spectrum, z: Complex64, size: usize) -> Result<()> {
    for k in 1..=size {
        let m = spec.mu_unchecked(k);
        if (z - m).norm() <= 4.0 * f64::EPSILON * m.max(1.0) {
            return Err(Error::OnSpectrum { z, index: k });
        }
    }
    Ok(())
}

fn check_size(spec: &Spectrum, size: usize) -> Result<()> {
    match spec.len() {
        Some(l) if size > l => Err(Error::IndexOutOfRange {
            index: size,
            len: l,
        }),
        _ => Ok(()),
    }
}

/// Diagonal of `K(z) = (z - A)^{-1/2}` on the first `size` basis vectors.
pub fn k_diag(spec: &Spectrum, z: Complex64, size: usize) -> Result<Vec<Complex64>> {
    check_size(spec, size)?;
    check_off_spectrum(spec, z, size)?;
    Ok((1..=size)
        .map(|k| principal_pow(z - spec.mu_unchecked(k), -0.5))
        .collect())
}

/// `sum_{j <= size} omega_j^2 / |z - mu_j|`.
pub fn truncated_form_sum(
    spec: &Spectrum,
    w: &crate::sequence_models::WeightSequence,
    z: Complex64,
    size: usize,
) -> f64 {
    (1..=size)
        .map(|j| w.omega_sq(j) / (z - spec.mu_unchecked(j)).norm())
        .sum()
}

/// Matrix of `B(z) = K V K` in the basis `e_1..e_size`; column `l` holds
/// the coefficients of `B e_l`, so `B[(m, l)] = v_lm k_l k_m`.
pub fn b_matrix(
    spec: &Spectrum,
    v: &super::PerturbationMatrix,
    z: Complex64,
    size: usize,
) -> Result<CMatrix> {
    if size > v.size() {
        return Err(Error::IndexOutOfRange {
            index: size,
            len: v.size(),
        });
    }
    let k = k_diag(spec, z, size)?;
    Ok(CMatrix::from_fn(size, size, |m, l| {
        k[m] * v.get(l + 1, m + 1) * k[l]
    }))
}

/// `(||B||_HS, sum_{j <= size} omega_j^2 / |z - mu_j|)`; the first never
/// exceeds the second.
pub fn hs_bound_check(
    spec: &Spectrum,
    w: &crate::sequence_models::WeightSequence,
    v: &super::PerturbationMatrix,
    z: Complex64,
    size: usize,
) -> Result<(f64, f64)> {
    let b = b_matrix(spec, v, z, size)?;
    Ok((b.norm(), truncated_form_sum(spec, w, z, size)))
}

/// Operator norm of truncated `B(z)`.
pub fn b_norm(
    spec: &Spectrum,
    v: &super::PerturbationMatrix,
    z: Complex64,
    size: usize,
) -> Result<f64> {
    Ok(op_norm(&b_matrix(spec, v, z, size)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn branch_examples() {
        let lin = Spectrum::linear();
        let k = k_diag(&lin, Complex64::new(2.0, 0.0), 1).unwrap();
        assert_abs_diff_eq!(k[0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k[0].im, 0.0, epsilon = 1e-15);
        // arg(-2) = pi, so (-2)^{-1/2} = 2^{-1/2} e^{-i pi/2}
        for im in [0.0, -0.0] {
            let k = k_diag(&lin, Complex64::new(-1.0, im), 1).unwrap();
            assert_abs_diff_eq!(k[0].re, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(k[0].im, -std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        }
        let k = k_diag(&lin, Complex64::new(1.0, 1.0), 1).unwrap();
        assert_abs_diff_eq!(k[0].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(k[0].im, -std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn rejects_spectrum() {
        let e = k_diag(&Spectrum::linear(), Complex64::new(3.0, 0.0), 5).unwrap_err();
        assert!(matches!(e, Error::OnSpectrum { index: 3, .. }));
        // beyond the truncation the point is admissible
        assert!(k_diag(&Spectrum::linear(), Complex64::new(7.0, 0.0), 5).is_ok());
    }
}
