//! Truncated eigensystems, Riesz projections and the basis diagnostics.

mod contour;
mod eigen;
mod localization;
mod projection;
mod report;
mod series;

pub use contour::{
    check_clearance, contour_projection, riesz_projection_contour, Contour, CONTOUR_CLEARANCE,
};
pub use eigen::{components, eigensystem, EigenPair, Eigensystem, CLUSTER_TOL};
pub use localization::{basis_condition_number, localization_report, pairs_in_disc, Localization};
pub use projection::{
    disjointness_residual, riesz_projection_eig, riesz_quadratic_sum, sum_of_eig_projections,
    Projection, RieszSum,
};
pub use report::{
    random_unit_vector, spectral_report, AgreementRow, EigenRow, ProjectionRow, SpectralParams,
    SpectralReport,
};
pub use series::{series_residue_checks, series_term_check, SeriesTermCheck};
