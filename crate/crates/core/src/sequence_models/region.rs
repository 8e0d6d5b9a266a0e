use num_complex::Complex64;

use super::spectrum::Spectrum;
use crate::error::{invalid, Result};

/// Localization region: the box around the low spectrum or a disc around
/// one eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// `(-h1, right] x [-h2, h2]` with `right = mu_N + r_N`.
    Box {
        n: usize,
        h1: f64,
        h2: f64,
        right: f64,
    },
    /// Disc of radius `r_k` around `mu_k`.
    Disc {
        index: usize,
        center: f64,
        radius: f64,
    },
}

impl Region {
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::Box { h1, h2, right, .. } => z.re > -h1 && z.re <= right && z.im.abs() <= h2,
            Region::Disc { center, radius, .. } => (z - center).norm() <= radius,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Region::Box { .. } => "box".to_string(),
            Region::Disc { index, .. } => format!("disc:{index}"),
        }
    }
}

/// The box `Pi_0(n0, h1, h2)` followed by the discs `Pi_k`, `n0 < k <= n_max`.
pub fn regions(spec: &Spectrum, n0: usize, h1: f64, h2: f64, n_max: usize) -> Result<Vec<Region>> {
    if n0 == 0 || n_max <= n0 {
        return Err(invalid(format!(
            "need 1 <= N0 < n_max, got N0 = {n0}, n_max = {n_max}"
        )));
    }
    if !(h1 > 0.0 && h2 > 0.0) {
        return Err(invalid(format!(
            "box half-widths must be positive (h1 = {h1}, h2 = {h2})"
        )));
    }
    let mut out = Vec::with_capacity(n_max - n0 + 1);
    out.push(Region::Box {
        n: n0,
        h1,
        h2,
        right: spec.mu(n0)? + spec.half_gap(n0)?,
    });
    for k in (n0 + 1)..=n_max {
        out.push(Region::Disc {
            index: k,
            center: spec.mu(k)?,
            radius: spec.half_gap(k)?,
        });
    }
    Ok(out)
}
