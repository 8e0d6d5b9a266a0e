use num_complex::Complex64;

use super::tables::{GTable, SigmaValue};
use crate::error::{invalid, Error, Result};
use crate::sequence_models::{
    rho_tail, shifted_tail, Spectrum, TailBound, TailEstimate, WeightSequence,
};

/// Last index actually summed: `depth`, or the end of a finite support when
/// that is within reach so the sum is exact.
pub(crate) fn summation_end(spec: &Spectrum, w: &WeightSequence, depth: usize) -> usize {
    let cap = spec.max_index();
    let finite = match (spec.len(), w.support_end()) {
        (Some(l), Some(e)) => Some(l.min(e)),
        (l, e) => l.or(e),
    };
    match finite {
        Some(e) if e <= depth.max(10_000_000) => e.min(cap),
        _ => depth.min(cap),
    }
}

fn check_index(spec: &Spectrum, n: usize) -> Result<()> {
    if n == 0 || n >= spec.max_index() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: spec.max_index().saturating_sub(1),
        });
    }
    Ok(())
}

/// Enclosure of `G(n) = sum_{j != n} omega_j^2 / |mu_n - mu_j| + omega_n^2 / r_n`.
pub fn g_transform(
    spec: &Spectrum,
    w: &WeightSequence,
    n: usize,
    depth: usize,
) -> Result<TailBound> {
    check_index(spec, n)?;
    if depth < n {
        return Err(invalid(format!("depth {depth} below index {n}")));
    }
    let end = summation_end(spec, w, depth);
    let mu = spec.mu_unchecked(n);
    let mut value = 0.0;
    for j in 1..=end {
        if j != n {
            let t = w.omega_sq(j);
            if t != 0.0 {
                value += t / (mu - spec.mu_unchecked(j)).abs();
            }
        }
    }
    value += w.omega_sq(n) / spec.half_gap_unchecked(n);
    Ok(shifted_tail(spec, w, end, mu).into_bound(value))
}

/// `sigma_N` over `N <= n <= horizon`, with `G` summed to `depth`.
pub fn sigma_n(
    spec: &Spectrum,
    w: &WeightSequence,
    n: usize,
    horizon: usize,
    depth: usize,
) -> Result<SigmaValue> {
    if n < 2 || horizon < n {
        return Err(invalid(format!(
            "need 2 <= N <= horizon, got N = {n}, horizon = {horizon}"
        )));
    }
    Ok(GTable::build(spec, w, horizon, depth)?.sigma(n))
}

/// Enclosure of `sum_j omega_j^2 / |z - mu_j|`.
pub fn sigma_prime_sample(
    spec: &Spectrum,
    w: &WeightSequence,
    z: Complex64,
    depth: usize,
) -> Result<TailBound> {
    let cap = spec.max_index();
    let mut end = summation_end(spec, w, depth.max(1));
    if spec.len().is_none() && w.support_end().is_none() {
        while end < cap && spec.mu_unchecked(end + 1) <= 2.0 * z.re.max(0.0) + spec.mu_unchecked(1)
        {
            end = (end * 2).min(cap);
        }
    }
    let mut value = 0.0;
    for j in 1..=end {
        let dist = (z - spec.mu_unchecked(j)).norm();
        if dist == 0.0 {
            return Err(Error::OnSpectrum { z, index: j });
        }
        let t = w.omega_sq(j);
        if t != 0.0 {
            value += t / dist;
        }
    }
    if z.im == 0.0 && end < cap && spec.mu_unchecked(end + 1) == z.re {
        return Err(Error::OnSpectrum { z, index: end + 1 });
    }
    Ok(shifted_tail(spec, w, end, z.re).into_bound(value))
}

/// Enclosure of `sum_j omega_j^2 / (mu_j + z0)`.
pub fn relative_form_bound(
    spec: &Spectrum,
    w: &WeightSequence,
    z0: f64,
    depth: usize,
) -> Result<TailBound> {
    if !(z0 >= 0.0 && z0.is_finite()) {
        return Err(invalid(format!(
            "shift z0 = {z0} must be a finite non-negative number"
        )));
    }
    let end = summation_end(spec, w, depth.max(1));
    let value = (1..=end)
        .map(|j| {
            let t = w.omega_sq(j);
            if t == 0.0 {
                0.0
            } else {
                t / (spec.mu_unchecked(j) + z0)
            }
        })
        .sum();
    Ok(rho_tail(spec, w, end).into_bound(value))
}

/// Enclosure of `rho_N = sum_{n >= N} omega_n^2 / mu_n`.
pub fn rho_n(spec: &Spectrum, w: &WeightSequence, n: usize, depth: usize) -> Result<TailBound> {
    if n == 0 {
        return Err(invalid("rho_N needs N >= 1"));
    }
    let end = summation_end(spec, w, depth.max(n));
    let value = (n..=end)
        .map(|j| w.omega_sq(j) / spec.mu_unchecked(j))
        .sum();
    Ok(rho_tail(spec, w, end).into_bound(value))
}

/// Largest `k <= N` with `mu_N - r_N >= 2 mu_k`.
pub fn k_n(spec: &Spectrum, n: usize) -> Result<Option<usize>> {
    if n < 2 {
        return Err(invalid("k_N needs N >= 2"));
    }
    spec.k_n(n)
}

/// Whether a tail estimate is usable for a verdict.
pub fn is_conclusive(t: &TailEstimate) -> bool {
    matches!(t, TailEstimate::Finite(..))
}
