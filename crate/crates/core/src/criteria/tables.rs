use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::sequence_models::{
    rho_tail, shifted_tail, Spectrum, TailBound, TailEstimate, TailMethod, WeightSequence,
};

/// Tabulated `G(n)` for `1 <= n <= horizon`, each summed over `j <= depth`.
///
/// The off-diagonal part `sum_{j != n} omega_j^2 / |mu_n - mu_j|` is kept
/// separately from the diagonal term `omega_n^2 / r_n` so the same table
/// serves the `G~` double sum.
#[derive(Debug, Clone)]
pub struct GTable {
    horizon: usize,
    depth: usize,
    off: Vec<f64>,
    off_tail: Vec<f64>,
    diag: Vec<f64>,
    method: TailMethod,
    upper_suffix: Vec<f64>,
    lower_suffix: Vec<f64>,
    arg_suffix: Vec<usize>,
    rho_suffix: Vec<f64>,
    rho_tail: TailEstimate,
}

/// `sigma_N` over `N <= n <= horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaValue {
    pub n: usize,
    pub bound: TailBound,
    pub argmax: usize,
    /// The supremum is attained at the horizon itself, so the horizon may be
    /// too small to capture it.
    pub at_boundary: bool,
}

/// Smallest 5-smooth integer `>= n`.
fn smooth_len(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p5 = 1usize;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut v = p35;
            while v < n {
                v *= 2;
            }
            best = best.min(v);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

/// `out[n - 1] = sum_{j <= a.len(), j != n} a[j - 1] / (c |n - j|)` for
/// `n <= horizon`, plus a bound on the floating-point error of the
/// transform.
fn fft_hilbert(a: &[f64], horizon: usize, c: f64) -> (Vec<f64>, f64) {
    let d = a.len();
    let len = smooth_len(d + horizon);
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);

    let mut x: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); len];
    for (slot, v) in x.iter_mut().zip(a) {
        slot.re = *v;
    }
    let mut k: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); len];
    for (o, slot) in k.iter_mut().enumerate().take(horizon).skip(1) {
        slot.re = 1.0 / (c * o as f64);
    }
    for o in 1..d {
        k[len - o].re = 1.0 / (c * o as f64);
    }
    let norm_a = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_k = k.iter().map(|v| v.re * v.re).sum::<f64>().sqrt();

    fwd.process(&mut x);
    fwd.process(&mut k);
    for (xi, ki) in x.iter_mut().zip(&k) {
        *xi *= *ki;
    }
    drop(k);
    inv.process(&mut x);
    let scale = 1.0 / len as f64;
    let out = x[..horizon].iter().map(|v| v.re * scale).collect();
    let allowance =
        10.0 * f64::EPSILON * (len as f64).sqrt() * (len as f64).log2() * norm_a * norm_k;
    (out, allowance)
}

impl GTable {
    /// Builds the table. Affine spectra use an FFT convolution; other kinds
    /// sum directly, at `O(horizon * depth)` cost.
    pub fn build(
        spec: &Spectrum,
        w: &WeightSequence,
        horizon: usize,
        depth: usize,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(invalid("horizon must be at least 1"));
        }
        if depth < horizon {
            return Err(invalid(format!(
                "depth {depth} is below the horizon {horizon}"
            )));
        }
        let top = spec.max_index();
        if horizon >= top {
            return Err(invalid(format!(
                "horizon {horizon} needs mu_{} but the spectrum ends at {top}",
                horizon + 1
            )));
        }
        let mut depth = depth.min(top);
        let support = w.support_end();
        let finite_end = match (spec.len(), support) {
            (Some(l), Some(e)) => Some(l.min(e)),
            (l, e) => l.or(e),
        };
        if let Some(end) = finite_end {
            if end <= depth {
                depth = depth.min(end.max(horizon));
            }
        }

        let a = w.omega_sq_vec(depth);
        let (off, allowance) = match spec.affine_coefficients() {
            Some((c, _)) if !w.is_zero() => fft_hilbert(&a, horizon, c),
            Some(_) => (vec![0.0; horizon], 0.0),
            None => {
                let mu: Vec<f64> = (1..=depth).map(|j| spec.mu_unchecked(j)).collect();
                let out = (1..=horizon)
                    .map(|n| {
                        let m = mu[n - 1];
                        let mut s = 0.0;
                        for (j, (&aj, &mj)) in a.iter().zip(&mu).enumerate() {
                            if j + 1 != n && aj != 0.0 {
                                s += aj / (m - mj).abs();
                            }
                        }
                        s
                    })
                    .collect();
                (out, 0.0)
            }
        };

        let rho = rho_tail(spec, w, depth);
        let next = if depth < top {
            spec.mu_unchecked(depth + 1)
        } else {
            f64::INFINITY
        };
        let method = match rho {
            TailEstimate::Finite(_, m) => m,
            TailEstimate::Divergent => TailMethod::Divergent,
            TailEstimate::Unknown => TailMethod::Unbounded,
        };
        let mut off_lower = Vec::with_capacity(horizon);
        let mut off_tail = Vec::with_capacity(horizon);
        for (i, v) in off.into_iter().enumerate() {
            let n = i + 1;
            let t = match rho {
                TailEstimate::Finite(_, TailMethod::FiniteSupport) => {
                    match shifted_tail(spec, w, depth, spec.mu_unchecked(n)) {
                        TailEstimate::Finite(t, _) => t,
                        _ => f64::INFINITY,
                    }
                }
                TailEstimate::Finite(r, _) => {
                    r / (1.0 - spec.mu_unchecked(n) / next) * crate::sequence_models::ROUND_UP
                }
                _ => f64::INFINITY,
            };
            let lower = (v - allowance).max(0.0);
            off_lower.push(lower);
            off_tail.push(t + (v + allowance - lower));
        }

        let diag: Vec<f64> = (1..=horizon)
            .map(|n| a[n - 1] / spec.half_gap_unchecked(n))
            .collect();

        let mut upper_suffix = vec![0.0; horizon + 2];
        let mut lower_suffix = vec![0.0; horizon + 2];
        let mut arg_suffix = vec![0usize; horizon + 2];
        upper_suffix[horizon + 1] = f64::NEG_INFINITY;
        for n in (1..=horizon).rev() {
            let lo = off_lower[n - 1] + diag[n - 1];
            let up = lo + off_tail[n - 1];
            if up >= upper_suffix[n + 1] {
                upper_suffix[n] = up;
                arg_suffix[n] = n;
            } else {
                upper_suffix[n] = upper_suffix[n + 1];
                arg_suffix[n] = arg_suffix[n + 1];
            }
            lower_suffix[n] = lo.max(lower_suffix[n + 1]);
        }

        let mut rho_suffix = vec![0.0; depth + 2];
        for j in (1..=depth).rev() {
            rho_suffix[j] = rho_suffix[j + 1] + a[j - 1] / spec.mu_unchecked(j);
        }

        Ok(Self {
            horizon,
            depth,
            off: off_lower,
            off_tail,
            diag,
            method,
            upper_suffix,
            lower_suffix,
            arg_suffix,
            rho_suffix,
            rho_tail: rho,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn method(&self) -> TailMethod {
        self.method
    }

    fn bound(&self, value: f64, tail: f64) -> TailBound {
        TailBound {
            value,
            tail_upper: tail,
            method: if tail.is_finite() {
                self.method
            } else {
                self.method.max(TailMethod::Unbounded)
            },
        }
    }

    /// `G(n)`.
    pub fn g(&self, n: usize) -> TailBound {
        let i = n - 1;
        self.bound(self.off[i] + self.diag[i], self.off_tail[i])
    }

    /// `G(n)` without the diagonal term `omega_n^2 / r_n`.
    pub fn g0(&self, n: usize) -> TailBound {
        let i = n - 1;
        self.bound(self.off[i], self.off_tail[i])
    }

    /// Diagonal term `omega_n^2 / r_n`, exact.
    pub fn diag(&self, n: usize) -> f64 {
        self.diag[n - 1]
    }

    /// `sigma_N = sup_{N <= n <= horizon} G(n)`.
    pub fn sigma(&self, n: usize) -> SigmaValue {
        let (lo, up) = (self.lower_suffix[n], self.upper_suffix[n]);
        let argmax = self.arg_suffix[n];
        SigmaValue {
            n,
            bound: self.bound(lo, up - lo),
            argmax,
            at_boundary: argmax == self.horizon && n < self.horizon,
        }
    }

    /// `rho_N = sum_{n >= N} omega_n^2 / mu_n`.
    pub fn rho(&self, n: usize) -> TailBound {
        let value = if n <= self.depth {
            self.rho_suffix[n]
        } else {
            0.0
        };
        self.rho_tail.into_bound(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::transforms::g_transform;

    #[test]
    fn smooth_lengths() {
        assert_eq!(smooth_len(1000), 1000);
        assert_eq!(smooth_len(1001), 1024);
        for n in [7, 1001, 5_000_001, 12_345_678] {
            let mut m = smooth_len(n);
            assert!(m >= n && m <= n.next_power_of_two());
            for p in [2, 3, 5] {
                while m.is_multiple_of(p) {
                    m /= p;
                }
            }
            assert_eq!(m, 1);
        }
    }

    #[test]
    fn fft_matches_direct_sums() {
        let lin = Spectrum::linear();
        for w in [
            WeightSequence::power(0.3).unwrap(),
            WeightSequence::counterexample(),
            WeightSequence::log_power(1.0).unwrap(),
        ] {
            let t = GTable::build(&lin, &w, 300, 1200).unwrap();
            for n in [1, 2, 17, 150, 300] {
                let direct = g_transform(&lin, &w, n, 1200).unwrap();
                let tab = t.g(n);
                assert!(
                    (tab.value - direct.value).abs() < 1e-11,
                    "{n}: {tab:?} vs {direct:?}"
                );
                assert!(tab.upper() >= direct.upper() - 1e-12);
                assert!(tab.value <= direct.value + 1e-12);
            }
        }
    }

    #[test]
    fn direct_path_for_power_spectra() {
        let spec = Spectrum::power(1.0, 2.0).unwrap();
        let w = WeightSequence::power(0.5).unwrap();
        let t = GTable::build(&spec, &w, 50, 400).unwrap();
        let direct = g_transform(&spec, &w, 30, 400).unwrap();
        assert!((t.g(30).value - direct.value).abs() < 1e-13);
    }

    #[test]
    fn sigma_is_suffix_max() {
        let w = WeightSequence::explicit(vec![1.0, 1.0, 1.0]).unwrap();
        let t = GTable::build(&Spectrum::linear(), &w, 50, 60).unwrap();
        let s = t.sigma(4);
        assert!((s.bound.value - 11.0 / 6.0).abs() < 1e-12);
        assert_eq!(s.argmax, 4);
        assert!(!s.at_boundary);
        // only the FFT rounding allowance remains
        assert!(s.bound.tail_upper < 1e-10);
    }

    #[test]
    fn zero_weights_vanish() {
        let t = GTable::build(&Spectrum::linear(), &WeightSequence::zero(), 100, 100).unwrap();
        assert_eq!(t.sigma(2).bound.upper(), 0.0);
        assert_eq!(t.rho(1).upper(), 0.0);
    }
}
