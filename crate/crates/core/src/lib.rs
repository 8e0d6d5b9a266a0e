//! Numerical laboratory for Riesz-basis criteria of `T = A + V`, where `A`
//! is diagonal with simple positive eigenvalues `mu_n` and `V` is locally
//! form-subordinate: `|<V e_k, e_j>| <= omega_j omega_k`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod error;
pub mod linalg;
pub mod operator_lab;
pub mod scenarios;
pub mod sequence_models;
pub mod spectral_analysis;

pub use error::{Error, Result};
