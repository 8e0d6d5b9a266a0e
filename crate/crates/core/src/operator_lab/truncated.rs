use num_complex::Complex64;

use super::branch::{b_matrix, k_diag};
use super::perturbation::PerturbationMatrix;
use crate::error::{Error, Result};
use crate::linalg::{cond, inverse, op_norm, scale_rows, CMatrix};
use crate::sequence_models::{Spectrum, WeightSequence};

/// Dense `diag(mu_1..mu_size) + V` with the certificate checked.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    matrix: CMatrix,
    spectrum: Spectrum,
    weights: WeightSequence,
}

impl TruncatedOperator {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }
}

/// `T_size = A_size + V_size`; column `l` is `T e_l`.
pub fn build_truncated_t(
    spec: &Spectrum,
    v: &PerturbationMatrix,
    size: usize,
) -> Result<TruncatedOperator> {
    if size > v.size() {
        return Err(Error::IndexOutOfRange {
            index: size,
            len: v.size(),
        });
    }
    if let Some(l) = spec.len() {
        if size > l {
            return Err(Error::IndexOutOfRange {
                index: size,
                len: l,
            });
        }
    }
    let v = v.truncate(size)?;
    v.verify()?;
    let mut m = v.operator_matrix(size);
    for k in 0..size {
        m[(k, k)] += spec.mu_unchecked(k + 1);
    }
    Ok(TruncatedOperator {
        matrix: m,
        spectrum: spec.clone(),
        weights: v.weights().clone(),
    })
}

/// Residual of `(z - T)^{-1} = K (I - B)^{-1} K` at truncated scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationResidual {
    /// Operator norm of the difference.
    pub residual: f64,
    /// Condition number of `I - B(z)`.
    pub cond: f64,
    pub b_norm: f64,
}

pub fn resolvent_factorization_residual(
    spec: &Spectrum,
    v: &PerturbationMatrix,
    z: Complex64,
    size: usize,
) -> Result<FactorizationResidual> {
    let t = build_truncated_t(spec, v, size)?;
    let k = k_diag(spec, z, size)?;
    let b = b_matrix(spec, v, z, size)?;
    let i_minus_b = CMatrix::identity(size, size) - &b;
    let inv_ib = inverse(&i_minus_b, "I - B(z)")?;
    let z_minus_t = CMatrix::from_diagonal_element(size, size, z) - t.matrix();
    let res = inverse(&z_minus_t, "z - T")?;
    // K (I - B)^{-1} K with K diagonal
    let rhs = scale_rows(&k, &scale_rows(&k, &inv_ib.transpose()).transpose());
    Ok(FactorizationResidual {
        residual: op_norm(&(res - rhs)),
        cond: cond(&i_minus_b),
        b_norm: op_norm(&b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_lab::Storage;

    #[test]
    fn unperturbed_is_diagonal() {
        let lin = Spectrum::linear();
        let v = PerturbationMatrix::zero(3, WeightSequence::zero());
        let t = build_truncated_t(&lin, &v, 3).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let want = if j == k { (j + 1) as f64 } else { 0.0 };
                assert_eq!(t.matrix()[(j, k)], Complex64::new(want, 0.0));
            }
        }
        let r = resolvent_factorization_residual(&lin, &v, Complex64::new(-1.0, 0.0), 3).unwrap();
        assert!(r.residual < 1e-15);
    }

    #[test]
    fn power_weights_identity() {
        use rand::SeedableRng;
        let lin = Spectrum::linear();
        let w = WeightSequence::power(1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let v = PerturbationMatrix::random(200, Storage::Dense, w, &mut rng);
        let r =
            resolvent_factorization_residual(&lin, &v, Complex64::new(-10.0, 0.0), 200).unwrap();
        assert!(r.residual < 1e-9, "{r:?}");
    }
}
