use crate::criteria::CriteriaReport;
use crate::sequence_models::Spectrum;
use crate::spectral_analysis::SpectralParams;

use super::Scenario;

/// Localization parameters handed to the spectral pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSetup {
    pub n0: usize,
    pub h1: f64,
    pub h2: f64,
    /// `false` when the criteria gave no usable `N_0` inside the truncation
    /// and the fallback `N_0 = 1` was used.
    pub certified: bool,
}

impl SpectralSetup {
    pub fn params(&self, sc: &Scenario) -> SpectralParams {
        self.params_for(sc.size, sc.buffer)
    }

    pub fn params_for(&self, size: usize, buffer: usize) -> SpectralParams {
        let mut p = SpectralParams::new(size, self.n0, self.h1, self.h2);
        p.buffer = Some(buffer);
        p
    }
}

/// Uses the certified `N_0` and box when `N_0` lies below the disc range of
/// the truncation. Otherwise falls back to `N_0 = 1` and `h1 = h2 = mu_1 / 2`;
/// a box searched for `N_0 = 1` can swallow most of the spectrum when the
/// weights are large.
pub fn spectral_setup(sc: &Scenario, report: &CriteriaReport) -> SpectralSetup {
    setup_for(&sc.spectrum, sc.size, sc.buffer, report)
}

/// [`spectral_setup`] for a spectrum without a scenario around it.
pub fn setup_for(
    spectrum: &Spectrum,
    size: usize,
    buffer: usize,
    report: &CriteriaReport,
) -> SpectralSetup {
    let last = size.saturating_sub(buffer);
    if let (Some(n0), Some(b)) = (report.n0, report.box_params) {
        if n0 < last {
            return SpectralSetup {
                n0,
                h1: b.h1,
                h2: b.h2,
                certified: true,
            };
        }
    }
    let floor = 0.5 * spectrum.mu_unchecked(1);
    SpectralSetup {
        n0: 1,
        h1: floor,
        h2: floor,
        certified: false,
    }
}
