//! Unperturbed spectra, subordination weights, localization regions and
//! tail-bounded infinite sums.

mod region;
mod spectrum;
mod tail;
mod weights;

pub use region::{regions, Region};
pub use spectrum::{Envelope, GapData, Spectrum, SpectrumKind};
pub use tail::{
    rho_tail, schatten_sum, schatten_tail, shifted_tail, weighted_power_tail, TailBound,
    TailEstimate, TailMethod, ROUND_UP,
};
pub use weights::{
    counter_s, counter_t, floor_pow, GapProfile, GapSupported, WeightKind, WeightSequence,
};
