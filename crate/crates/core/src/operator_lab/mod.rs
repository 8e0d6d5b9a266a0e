//! Finite truncations of `A`, `V`, `K(z)`, `B(z)` and `T = A + V`.

mod branch;
mod perturbation;
mod truncated;

pub use branch::{b_matrix, b_norm, hs_bound_check, k_diag, principal_pow, truncated_form_sum};
pub use perturbation::{PerturbationMatrix, Storage, CERTIFICATE_SLACK};
pub use truncated::{
    build_truncated_t, resolvent_factorization_residual, FactorizationResidual, TruncatedOperator,
};
