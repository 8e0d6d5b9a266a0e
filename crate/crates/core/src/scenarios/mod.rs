//! Generators for the worked examples, wired for one-command runs.

mod builders;
mod registry;
mod setup;

pub use builders::{
    make_counterexample, make_finite_band, make_gap_supported, make_lnln, make_log_power,
    make_power_alpha, random_dense, FiniteBand,
};
pub use registry::{
    build, build_models, Scenario, ScenarioKind, ScenarioSpec, Truncation, DEFAULT_HORIZON,
    DEFAULT_SIZE,
};
pub use setup::{setup_for, spectral_setup, SpectralSetup};
