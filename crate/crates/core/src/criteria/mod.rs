//! Tail transforms of the weight sequence and the criteria built on them.

mod decay;
mod gtilde;
mod rates;
mod schur;
mod tables;
mod transforms;
mod verdicts;

pub use decay::{monotone_l1_implies_decay_check, DecayCheck};
pub use gtilde::{
    g_tilde_transform, GTilde, GrowthSignature, DELTA_BOUNDED, DELTA_DIVERGENT, Q_FLOOR,
};
pub use rates::{dyadic_points, rate_fit, RateFit, RateModel};
pub use schur::{
    certified_n0, certified_n_star, m_matrix, matrix_m_norm, schur_bounds, schur_from_table,
    search_box, spectral_norm_power, tau_n, BoxParams, MVariant, SchurBounds,
};
pub use tables::{GTable, SigmaValue};
pub use transforms::{
    g_transform, is_conclusive, k_n, relative_form_bound, rho_n, sigma_n, sigma_prime_sample,
};
pub use verdicts::{
    evaluate, sample_rows, CriteriaParams, CriteriaReport, Status, Verdict, Verdicts,
    DIRECT_WORK_LIMIT,
};
