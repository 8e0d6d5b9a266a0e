use nalgebra::DVector;
use num_complex::Complex64;

use super::contour::Contour;
use crate::criteria::tau_n;
use crate::error::{invalid, Error, Result};
use crate::linalg::CMatrix;
use crate::operator_lab::{b_matrix, truncated_form_sum, PerturbationMatrix};
use crate::sequence_models::{Spectrum, WeightSequence};

/// Term-by-term check of the Neumann-series bounds on the discs `n >= N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTermCheck {
    pub s: u32,
    pub n: usize,
    /// `sum_n |(2 pi i)^{-1} \oint_{Gamma_n} <K B^{s+1} K f, f> dz|`.
    pub lhs: f64,
    /// `2^{s+2} tau_N^{s+1} ||f||^2`.
    pub bound_tau: f64,
    /// `2^{-s} ||f||^2`, valid once `tau_N <= 1/4`.
    pub bound_geometric: f64,
    pub tau_n: f64,
    /// `|lhs(nodes) - lhs(nodes / 2)|`.
    pub quad_error: f64,
    pub summands: Vec<(usize, f64)>,
    /// Last disc index used (the top `size / 8` are dropped).
    pub last: usize,
}

/// Depths used for `tau_N`: FFT-backed tables for affine spectra, direct
/// sums otherwise.
fn tau_depths(spec: &Spectrum, n: usize) -> (usize, usize) {
    let h = if spec.affine_coefficients().is_some() {
        1 << 16
    } else {
        2048
    };
    let h = h.max(2 * n).min(spec.max_index().saturating_sub(1));
    (h, 4 * h)
}

/// `<D (V D)^{s+1} f, f>` with `D = (z - A)^{-1}`, which equals
/// `<K B^{s+1} K f, f>`.
fn integrand(mu: &[f64], vop: &CMatrix, f: &DVector<Complex64>, z: Complex64, s: u32) -> Complex64 {
    let d: Vec<Complex64> = mu.iter().map(|m| 1.0 / (z - m)).collect();
    let mut g = DVector::from_iterator(f.len(), f.iter().zip(&d).map(|(x, di)| x * di));
    for _ in 0..=s {
        g = vop * g;
        for (x, di) in g.iter_mut().zip(&d) {
            *x *= di;
        }
    }
    f.dotc(&g)
}

/// Compares the contour integrals of the `(s+1)`-st series term against
/// both bounds. `‖B(z)‖ <= 1/2` is required at every node; it is checked
/// with the truncated HS bound, falling back to the Frobenius norm.
pub fn series_term_check(
    spec: &Spectrum,
    w: &WeightSequence,
    v: &PerturbationMatrix,
    s: u32,
    n: usize,
    f: &DVector<Complex64>,
    quad_nodes: usize,
) -> Result<SeriesTermCheck> {
    let size = v.size();
    if s > 6 {
        return Err(invalid(format!("series exponent {s} above 6")));
    }
    if f.len() != size {
        return Err(invalid(format!(
            "vector length {} does not match size {size}",
            f.len()
        )));
    }
    if quad_nodes < 16 || !quad_nodes.is_multiple_of(2) {
        return Err(invalid("quadrature needs an even node count >= 16"));
    }
    let last = size - size / 8;
    if n < 2 || n > last {
        return Err(invalid(format!("N = {n} outside 2..={last}")));
    }
    let mu: Vec<f64> = (1..=size).map(|j| spec.mu_unchecked(j)).collect();
    let vop = v.operator_matrix(size);
    let (h, d) = tau_depths(spec, n);
    let tau = tau_n(spec, w, n, h, d)?;

    let mut summands = Vec::with_capacity(last - n + 1);
    let (mut lhs, mut coarse) = (0.0, 0.0);
    for k in n..=last {
        let contour = Contour::Circle {
            center: Complex64::new(mu[k - 1], 0.0),
            radius: spec.half_gap(k)?,
        };
        let rule = contour.rule(quad_nodes)?;
        let (mut fine, mut half) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (i, &(z, wt)) in rule.iter().enumerate() {
            if truncated_form_sum(spec, w, z, size) > 0.5 {
                let hs = b_matrix(spec, v, z, size)?.norm();
                if hs > 0.5 {
                    return Err(Error::ResolventBound { z, bound: hs });
                }
            }
            let val = integrand(&mu, &vop, f, z, s);
            fine += wt * val;
            if i % 2 == 0 {
                half += wt * val * 2.0;
            }
        }
        summands.push((k, fine.norm()));
        lhs += fine.norm();
        coarse += half.norm();
    }
    let f2 = f.norm_squared();
    Ok(SeriesTermCheck {
        s,
        n,
        lhs,
        bound_tau: 2f64.powi(s as i32 + 2) * tau.powi(s as i32 + 1) * f2,
        bound_geometric: 2f64.powi(-(s as i32)) * f2,
        tau_n: tau,
        quad_error: (lhs - coarse).abs(),
        summands,
        last,
    })
}

/// `‖B(z)‖ <= 1/2` on the circle around `mu_k`, sampled at `nodes` points.
fn check_disc_bound(
    spec: &Spectrum,
    w: &WeightSequence,
    v: &PerturbationMatrix,
    k: usize,
    nodes: usize,
) -> Result<()> {
    let size = v.size();
    let contour = Contour::Circle {
        center: Complex64::new(spec.mu(k)?, 0.0),
        radius: spec.half_gap(k)?,
    };
    for (z, _) in contour.rule(nodes)? {
        if truncated_form_sum(spec, w, z, size) > 0.5 {
            let hs = b_matrix(spec, v, z, size)?.norm();
            if hs > 0.5 {
                return Err(Error::ResolventBound { z, bound: hs });
            }
        }
    }
    Ok(())
}

/// Same quantities as [`series_term_check`] for every `s <= s_max` and every
/// vector in `fs`, indexed `[f][s]`. Each disc encloses the single pole
/// `mu_k`, so its integral is the residue there; it is read off a Laurent
/// expansion in `e = z - mu_k` instead of a quadrature rule, which makes
/// `quad_error` zero. The premise `‖B‖ <= 1/2` is still sampled on each
/// circle at `quad_nodes` points.
pub fn series_residue_checks(
    spec: &Spectrum,
    w: &WeightSequence,
    v: &PerturbationMatrix,
    s_max: u32,
    n: usize,
    fs: &[DVector<Complex64>],
    quad_nodes: usize,
) -> Result<Vec<Vec<SeriesTermCheck>>> {
    let size = v.size();
    if s_max > 6 {
        return Err(invalid(format!("series exponent {s_max} above 6")));
    }
    if let Some(f) = fs.iter().find(|f| f.len() != size) {
        return Err(invalid(format!(
            "vector length {} does not match size {size}",
            f.len()
        )));
    }
    let last = size - size / 8;
    if n < 2 || n > last {
        return Err(invalid(format!("N = {n} outside 2..={last}")));
    }
    let mu: Vec<f64> = (1..=size).map(|j| spec.mu_unchecked(j)).collect();
    let vop = v.operator_matrix(size);
    let (h, d) = tau_depths(spec, n);
    let tau = tau_n(spec, w, n, h, d)?;

    let m = fs.len();
    let steps = s_max as usize + 1;
    // window length: exponents -(t+1) ..= steps - 1 - t after t steps
    let len = steps + 1;
    let zero = Complex64::new(0.0, 0.0);
    // lhs[f][s], summands[f][s]
    let mut sums = vec![vec![0.0; steps]; m];
    let mut parts: Vec<Vec<Vec<(usize, f64)>>> =
        vec![vec![Vec::with_capacity(last - n + 1); steps]; m];
    for k in n..=last {
        check_disc_bound(spec, w, v, k, quad_nodes)?;
        let c = k - 1;
        let inv: Vec<f64> = mu.iter().map(|x| 1.0 / (x - mu[c])).collect();
        // column (f, l) holds the coefficient of e^{lo + l}
        let mut g = CMatrix::zeros(size, m * len);
        for (fi, f) in fs.iter().enumerate() {
            // D f, window -1 ..= steps - 1
            g[(c, fi * len)] = f[c];
            for j in (0..size).filter(|&j| j != c) {
                let mut p = -f[j] * inv[j];
                for l in 1..len {
                    g[(j, fi * len + l)] = p;
                    p *= inv[j];
                }
            }
        }
        for t in 1..=steps {
            let hm = &vop * &g;
            // new window starts one lower: coefficient l of D h is
            // h_{l} at the pole row (exponent shift by one) and
            // -sum_{q <= l-1} h_{q} inv^{l-q} elsewhere
            for fi in 0..m {
                let base = fi * len;
                for j in 0..size {
                    if j == c {
                        for l in 0..len {
                            g[(j, base + l)] = hm[(j, base + l)];
                        }
                    } else {
                        let r = inv[j];
                        for l in 0..len {
                            let mut acc = zero;
                            let mut p = r;
                            for q in (0..l).rev() {
                                acc -= hm[(j, base + q)] * p;
                                p *= r;
                            }
                            g[(j, base + l)] = acc;
                        }
                    }
                }
                // exponent -1 sits at l = t after t steps
                let f = &fs[fi];
                let res: Complex64 = (0..size).map(|j| f[j].conj() * g[(j, base + t)]).sum();
                sums[fi][t - 1] += res.norm();
                parts[fi][t - 1].push((k, res.norm()));
            }
        }
    }
    Ok(fs
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            let f2 = f.norm_squared();
            (0..steps)
                .map(|s| SeriesTermCheck {
                    s: s as u32,
                    n,
                    lhs: sums[fi][s],
                    bound_tau: 2f64.powi(s as i32 + 2) * tau.powi(s as i32 + 1) * f2,
                    bound_geometric: 2f64.powi(-(s as i32)) * f2,
                    tau_n: tau,
                    quad_error: 0.0,
                    summands: std::mem::take(&mut parts[fi][s]),
                    last,
                })
                .collect()
        })
        .collect())
}
