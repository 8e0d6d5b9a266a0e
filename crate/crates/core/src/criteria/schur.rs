use super::tables::{GTable, SigmaValue};
use super::transforms::{relative_form_bound, summation_end};
use crate::error::{invalid, Error, Result};
use crate::sequence_models::{shifted_tail, Spectrum, TailBound, TailEstimate, WeightSequence};

/// Schur-test bounds on the off-diagonal operators at one `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurBounds {
    pub n: usize,
    pub k_n: usize,
    pub bound_m: f64,
    pub bound_m_prime: f64,
    pub rho_n: TailBound,
    pub sigma_n: SigmaValue,
    pub sigma_kn: SigmaValue,
    pub tau_n: f64,
}

/// Evaluates the Schur bounds from a precomputed table.
///
/// `bound_M^2 = sigma_N max{2 rho_N, sigma_{k_N}}`, `bound_M' = 2 bound_M` and
/// `tau_N = max{bound_M', 2 sigma_N}`, all on upper enclosure ends.
pub fn schur_from_table(spec: &Spectrum, table: &GTable, n: usize) -> Result<SchurBounds> {
    if n < 2 || n > table.horizon() {
        return Err(invalid(format!("N = {n} outside 2..={}", table.horizon())));
    }
    let k = spec
        .k_n(n)?
        .ok_or_else(|| invalid(format!("k_N does not exist for N = {n}")))?;
    let sigma_n = table.sigma(n);
    let sigma_kn = table.sigma(k);
    let rho = table.rho(n);
    let m2 = sigma_n.bound.upper() * (2.0 * rho.upper()).max(sigma_kn.bound.upper());
    let bound_m = m2.sqrt();
    let bound_m_prime = 2.0 * bound_m;
    Ok(SchurBounds {
        n,
        k_n: k,
        bound_m,
        bound_m_prime,
        rho_n: rho,
        sigma_n,
        sigma_kn,
        tau_n: bound_m_prime.max(2.0 * sigma_n.bound.upper()),
    })
}

/// Schur bounds at `N`, with `sigma` taken over `N <= n <= horizon`.
pub fn schur_bounds(
    spec: &Spectrum,
    w: &WeightSequence,
    n: usize,
    horizon: usize,
    depth: usize,
) -> Result<SchurBounds> {
    schur_from_table(spec, &GTable::build(spec, w, horizon, depth)?, n)
}

/// `tau_N = max{||M||, ||M'||, sigma_N, sigma'_N}` via its bounds.
pub fn tau_n(
    spec: &Spectrum,
    w: &WeightSequence,
    n: usize,
    horizon: usize,
    depth: usize,
) -> Result<f64> {
    Ok(schur_bounds(spec, w, n, horizon, depth)?.tau_n)
}

/// Which truncated operator `matrix_m_norm` measures.
#[derive(Debug, Clone, PartialEq)]
pub enum MVariant {
    /// Zero diagonal, `omega_n omega_k / |mu_n - mu_k|` off it.
    M,
    /// `omega_n omega_k / |z_n - mu_k|` with `z_n = mu_n + r_n e^{i theta_n}`.
    /// One angle is broadcast to every row.
    MPrime(Vec<f64>),
}

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 100_000;

/// Dense `size x size` truncation of `M` or `M'`, rows with `n < N` zeroed.
pub fn m_matrix(
    spec: &Spectrum,
    w: &WeightSequence,
    n: usize,
    size: usize,
    variant: &MVariant,
) -> Result<Vec<f64>> {
    if size < n || n == 0 {
        return Err(invalid(format!(
            "need 1 <= N <= size, got N = {n}, size = {size}"
        )));
    }
    if size >= spec.max_index() {
        return Err(invalid(format!(
            "size {size} needs r_{size}, beyond the spectrum"
        )));
    }
    if let MVariant::MPrime(a) = variant {
        if a.is_empty() || (a.len() != 1 && a.len() < size) {
            return Err(invalid("angle list must have one entry or one per row"));
        }
    }
    let om: Vec<f64> = (1..=size).map(|j| w.omega_unchecked(j)).collect();
    let mu: Vec<f64> = (1..=size).map(|j| spec.mu_unchecked(j)).collect();
    let mut m = vec![0.0; size * size];
    for row in n..=size {
        let i = row - 1;
        let z = match variant {
            MVariant::M => None,
            MVariant::MPrime(a) => {
                let theta = if a.len() == 1 { a[0] } else { a[i] };
                let r = spec.half_gap_unchecked(row);
                Some(num_complex::Complex64::new(
                    mu[i] + r * theta.cos(),
                    r * theta.sin(),
                ))
            }
        };
        for k in 0..size {
            let v = match z {
                None if k == i => 0.0,
                None => om[i] * om[k] / (mu[i] - mu[k]).abs(),
                Some(z) => om[i] * om[k] / (z - mu[k]).norm(),
            };
            m[i * size + k] = v;
        }
    }
    Ok(m)
}

/// Largest singular value of a dense row-major square matrix, by power
/// iteration on `A^T A`.
pub fn spectral_norm_power(a: &[f64], size: usize) -> Result<f64> {
    if a.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let mut x = vec![1.0 / (size as f64).sqrt(); size];
    let mut y = vec![0.0; size];
    let mut prev = 0.0;
    for _ in 0..POWER_MAX_ITER {
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &a[i * size..(i + 1) * size];
            *yi = row.iter().zip(&x).map(|(p, q)| p * q).sum();
        }
        let mut z = vec![0.0; size];
        for (i, yi) in y.iter().enumerate() {
            if *yi != 0.0 {
                let row = &a[i * size..(i + 1) * size];
                for (zk, p) in z.iter_mut().zip(row) {
                    *zk += p * yi;
                }
            }
        }
        let norm_z = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm_z == 0.0 {
            return Ok(0.0);
        }
        let sigma = norm_z.sqrt();
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi = zi / norm_z;
        }
        if (sigma - prev).abs() <= POWER_TOL * sigma {
            return Ok(sigma);
        }
        prev = sigma;
    }
    Err(Error::NoConvergence(POWER_MAX_ITER))
}

/// Operator norm of the truncated `M` or `M'`.
pub fn matrix_m_norm(
    spec: &Spectrum,
    w: &WeightSequence,
    n: usize,
    size: usize,
    variant: &MVariant,
) -> Result<f64> {
    let m = m_matrix(spec, w, n, size, variant)?;
    spectral_norm_power(&m, size)
}

/// Smallest `N` with `2 sigma_N <= 1/2`.
/// Only `N <= H/2` counts: near the horizon sigma_N sees too short a window.
pub fn certified_n0(table: &GTable) -> Option<usize> {
    (2..=table.horizon() / 2).find(|&n| 2.0 * table.sigma(n).bound.upper() <= 0.5)
}

/// Smallest `N` with `tau_N <= 1/4`, scanning up to `limit`.
pub fn certified_n_star(spec: &Spectrum, table: &GTable, limit: usize) -> Option<usize> {
    (2..=limit.min(table.horizon() / 2)).find(|&n| {
        schur_from_table(spec, table, n)
            .map(|s| s.tau_n <= 0.25)
            .unwrap_or(false)
    })
}

/// Box half-widths for which the form bound stays below 1/2 off the box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxParams {
    pub h1: f64,
    pub h2: f64,
}

fn bisect(mut lo: f64, mut hi: f64, ok: impl Fn(f64) -> bool) -> Option<f64> {
    let mut grow = 0;
    while !ok(hi) {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return None;
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-9 * hi {
            break;
        }
    }
    Some(hi)
}

/// `h1`: `sum omega_j^2 / (mu_j + h1) <= 1/2`, floored at `mu_1 / 2`.
/// `h2`: for `|Im z| >= h2`, `Re z <= mu_N0 + r_N0` the sum
/// `sum_j omega_j^2 / |z - mu_j|` stays `<= 1/2`.
pub fn search_box(
    spec: &Spectrum,
    w: &WeightSequence,
    n0: usize,
    depth: usize,
) -> Result<BoxParams> {
    let floor = 0.5 * spec.mu_unchecked(1);
    let f1 = |h: f64| {
        relative_form_bound(spec, w, h, depth)
            .map(|b| b.upper() <= 0.5)
            .unwrap_or(false)
    };
    let h1 = if f1(floor) {
        floor
    } else {
        bisect(floor, 2.0 * floor, f1)
            .ok_or_else(|| invalid("no finite h1: form bound tail unavailable"))?
    };

    let end = summation_end(spec, w, depth.max(n0 + 1));
    let right = spec.mu(n0)? + spec.half_gap(n0)?;
    let tail = match shifted_tail(spec, w, end, right) {
        TailEstimate::Finite(t, _) => t,
        _ => return Err(invalid("no finite h2: tail of the form bound unavailable")),
    };
    let head: f64 = (1..=n0.min(end)).map(|j| w.omega_sq(j)).sum();
    let far: Vec<(f64, f64)> = ((n0 + 1)..=end)
        .map(|j| (w.omega_sq(j), spec.mu_unchecked(j) - right))
        .filter(|(t, _)| *t != 0.0)
        .collect();
    let f2 = |h: f64| {
        let s: f64 = far.iter().map(|(t, d)| t / (d * d + h * h).sqrt()).sum();
        head / h + s + tail <= 0.5
    };
    let h2 = bisect(floor, 2.0 * floor, f2).ok_or_else(|| invalid("no finite h2"))?;
    Ok(BoxParams { h1, h2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_weights() {
        let lin = Spectrum::linear();
        let z = WeightSequence::zero();
        let s = schur_bounds(&lin, &z, 10, 100, 100).unwrap();
        assert_eq!(
            (
                s.bound_m,
                s.bound_m_prime,
                s.rho_n.upper(),
                s.sigma_kn.bound.upper()
            ),
            (0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(s.tau_n, 0.0);
        assert_eq!(matrix_m_norm(&lin, &z, 1, 20, &MVariant::M).unwrap(), 0.0);
    }

    #[test]
    fn prime_bound_is_twice() {
        let w = WeightSequence::power(1.0).unwrap();
        let s = schur_bounds(&Spectrum::linear(), &w, 10, 1000, 4000).unwrap();
        assert_eq!(s.bound_m_prime, 2.0 * s.bound_m);
        assert_eq!(s.k_n, 4);
    }

    #[test]
    fn two_by_two_norm() {
        let w = WeightSequence::explicit(vec![0.7, 0.4]).unwrap();
        let norm = matrix_m_norm(&Spectrum::linear(), &w, 1, 2, &MVariant::M).unwrap();
        assert_abs_diff_eq!(norm, 0.28, epsilon = 1e-10);
    }

    #[test]
    fn truncated_norm_below_bound() {
        let lin = Spectrum::linear();
        let w = WeightSequence::power(1.0).unwrap();
        let s = schur_bounds(&lin, &w, 5, 500, 2000).unwrap();
        let m = matrix_m_norm(&lin, &w, 5, 500, &MVariant::M).unwrap();
        assert!(m <= s.bound_m + 1e-8, "{m} > {}", s.bound_m);
        let mp = matrix_m_norm(&lin, &w, 5, 500, &MVariant::MPrime(vec![0.0])).unwrap();
        assert!(mp <= s.bound_m_prime + 1e-8);
    }

    #[test]
    fn tau_decays() {
        let lin = Spectrum::linear();
        let w = WeightSequence::power(1.0).unwrap();
        let t = GTable::build(&lin, &w, 4000, 16_000).unwrap();
        let t10 = schur_from_table(&lin, &t, 10).unwrap().tau_n;
        let t100 = schur_from_table(&lin, &t, 100).unwrap().tau_n;
        assert!(t100 < t10);
        let n_star = certified_n_star(&lin, &t, 4000).unwrap();
        assert!(schur_from_table(&lin, &t, n_star).unwrap().tau_n <= 0.25);
        assert!(schur_from_table(&lin, &t, n_star - 1)
            .map(|s| s.tau_n > 0.25)
            .unwrap_or(true));
    }

    #[test]
    fn missing_k_n() {
        let w = WeightSequence::power(1.0).unwrap();
        assert!(schur_bounds(&Spectrum::linear(), &w, 2, 10, 10).is_err());
    }

    #[test]
    fn box_search_meets_targets() {
        let lin = Spectrum::linear();
        let w = WeightSequence::power(0.5).unwrap();
        let b = search_box(&lin, &w, 20, 10_000).unwrap();
        assert!(relative_form_bound(&lin, &w, b.h1, 10_000).unwrap().upper() <= 0.5);
        assert!(b.h2 > 0.0);
    }
}
