use super::rates::{rate_fit, RateModel};
use super::tables::GTable;
use super::verdicts::Verdict;
use crate::error::{invalid, Result};
use crate::sequence_models::{Spectrum, TailBound, TailMethod, WeightSequence, ROUND_UP};

/// Decay exponent below which `G0(n) log n` is treated as non-decaying.
pub const DELTA_DIVERGENT: f64 = 0.75;
/// Decay exponent above which the outer sums are treated as bounded.
pub const DELTA_BOUNDED: f64 = 1.5;
/// Lower bound on `G0(n) log n` that makes the outer sum diverge like
/// `sum 1 / (n log n)`.
pub const Q_FLOOR: f64 = 0.5;

/// Engine for `G~(k) = sum_{n > N1, n != k} r_n / |mu_n - mu_k| G0(n)`,
/// where `G0` is `G` without its diagonal term.
#[derive(Debug, Clone)]
pub struct GTilde {
    spec: Spectrum,
    table: GTable,
    outer: usize,
    support_mass: Option<(usize, f64)>,
}

/// Fit of `q(n) = G0(n) log n ~ (log n)^-delta` over the upper dyadic window.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSignature {
    pub samples: Vec<(usize, f64)>,
    pub delta: f64,
    pub q_min: f64,
}

impl GTilde {
    /// `outer` bounds the `n` range, `inner` the `j` range of `G0(n)`.
    pub fn build(spec: &Spectrum, w: &WeightSequence, outer: usize, inner: usize) -> Result<Self> {
        let outer = outer.min(spec.max_index().saturating_sub(1));
        if outer < 2 {
            return Err(invalid("outer depth must be at least 2"));
        }
        let table = GTable::build(spec, w, outer, inner.max(outer))?;
        let support_mass = w
            .support_end()
            .map(|e| (e, (1..=e).map(|j| w.omega_sq(j)).sum()));
        Ok(Self {
            spec: spec.clone(),
            table,
            outer,
            support_mass,
        })
    }

    pub fn outer(&self) -> usize {
        self.outer
    }

    pub fn table(&self) -> &GTable {
        &self.table
    }

    fn coeff(&self, n: usize, k: usize) -> f64 {
        let d = (self.spec.mu_unchecked(n) - self.spec.mu_unchecked(k)).abs();
        self.spec.half_gap_unchecked(n) / d
    }

    /// Lower partial sums `S(D) = sum_{N1 < n <= D, n != k} ...` at each
    /// checkpoint `D` (ascending, each `<= outer`).
    pub fn partial_sums(&self, k: usize, n1: usize, checkpoints: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut s = 0.0;
        let mut n = n1 + 1;
        for &cp in checkpoints {
            let cp = cp.min(self.outer);
            while n <= cp {
                if n != k {
                    s += self.coeff(n, k) * self.table.g0(n).value;
                }
                n += 1;
            }
            out.push(s);
        }
        out
    }

    /// Enclosure of `G~(k)`; the outer tail is bounded only for finitely
    /// supported weights on affine or finite spectra.
    pub fn value(&self, k: usize, n1: usize) -> TailBound {
        let (mut value, mut tail) = (0.0, 0.0);
        for n in (n1 + 1)..=self.outer {
            if n == k {
                continue;
            }
            let c = self.coeff(n, k);
            let g = self.table.g0(n);
            value += c * g.value;
            tail += c * g.tail_upper;
        }
        let mut method = self.table.method();
        let finite_model = self.spec.len().is_some_and(|l| self.outer + 1 >= l);
        let outer_tail = if finite_model {
            Some(0.0)
        } else {
            match (self.support_mass, self.spec.affine_coefficients()) {
                (Some((_, 0.0)), _) => Some(0.0),
                (Some((end, mass)), Some((c, _))) => {
                    let m = end.max(k);
                    (self.outer > m).then(|| mass / (2.0 * c * (self.outer - m) as f64) * ROUND_UP)
                }
                _ => None,
            }
        };
        match outer_tail {
            Some(t) => tail += t,
            None => {
                tail = f64::INFINITY;
                method = TailMethod::Unbounded;
            }
        }
        TailBound {
            value,
            tail_upper: tail,
            method,
        }
    }

    /// `G0(n) log n` over the dyadic window `2^(top-8) .. 2^top`.
    pub fn growth_signature(&self) -> Option<GrowthSignature> {
        let top = (usize::BITS - 1 - self.outer.leading_zeros()) as usize;
        if top < 11 {
            return None;
        }
        let samples: Vec<(usize, f64)> = ((top - 8)..=top)
            .map(|i| {
                let n = 1usize << i;
                (n, self.table.g0(n).value * (n as f64).ln())
            })
            .collect();
        let q_min = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        if q_min <= 0.0 {
            return Some(GrowthSignature {
                samples,
                delta: f64::INFINITY,
                q_min,
            });
        }
        let pts: Vec<(f64, f64)> = samples.iter().map(|&(n, q)| (n as f64, q)).collect();
        let fit = rate_fit(&pts, RateModel::LogPower).ok()?;
        Some(GrowthSignature {
            samples,
            delta: fit.beta,
            q_min,
        })
    }

    /// Boundedness verdict for `sup_k G~(k)`.
    pub fn verdict(&self, n1: usize) -> Verdict {
        let probe = self.value(1, n1);
        if probe.is_finite() {
            return Verdict::holds(format!(
                "outer tail bounded in closed form; G~(1) <= {:.6e}",
                probe.upper()
            ));
        }
        if self.spec.affine_coefficients().is_none() {
            return Verdict::inconclusive("growth signature only calibrated for affine spectra");
        }
        let Some(sig) = self.growth_signature() else {
            return Verdict::inconclusive(
                "outer depth below 2^11, too short for a growth signature",
            );
        };
        let (lo, hi) = (sig.samples[0].0, sig.samples.last().unwrap().0);
        let k = 1;
        let sums = self.partial_sums(k, n1, &[hi / 2, hi]);
        let jump = sums[1] - sums[0];
        if sig.delta < DELTA_DIVERGENT && sig.q_min >= Q_FLOOR {
            Verdict::fails(format!(
                "G0(n) log n >= {:.4} on [{lo}, {hi}] with decay exponent {:.3}; \
                 the outer sum grows like sum 1/(n log n) (doubling {}..{} adds {:.6e} at k = {k})",
                sig.q_min,
                sig.delta,
                hi / 2,
                hi,
                jump
            ))
        } else if sig.delta > DELTA_BOUNDED {
            Verdict::holds(format!(
                "G0(n) log n decays like (log n)^-{:.3} on [{lo}, {hi}]; doubling {}..{} adds {:.6e} at k = {k}",
                sig.delta,
                hi / 2,
                hi,
                jump
            ))
        } else {
            Verdict::inconclusive(format!(
                "decay exponent {:.3} of G0(n) log n between thresholds on [{lo}, {hi}]",
                sig.delta
            ))
        }
    }
}

/// Enclosure of `G~(k)` with outer sum up to `depth`, inner sums up to
/// `4 depth`.
pub fn g_tilde_transform(
    spec: &Spectrum,
    w: &WeightSequence,
    k: usize,
    n1: usize,
    depth: usize,
) -> Result<TailBound> {
    if k == 0 || n1 < 2 {
        return Err(invalid(format!(
            "need k >= 1 and N1 >= 2, got k = {k}, N1 = {n1}"
        )));
    }
    Ok(GTilde::build(spec, w, depth, 4 * depth)?.value(k, n1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::verdicts::Status;

    #[test]
    fn zero_weights() {
        let t =
            g_tilde_transform(&Spectrum::linear(), &WeightSequence::zero(), 5, 2, 1000).unwrap();
        assert_eq!(t.upper(), 0.0);
    }

    #[test]
    fn matches_direct_double_sum() {
        let lin = Spectrum::linear();
        let w = WeightSequence::explicit(vec![0.3, 0.2, 0.5, 0.1, 0.4]).unwrap();
        let g = g_tilde_transform(&lin, &w, 3, 2, 400).unwrap();
        let mut direct = 0.0;
        for n in 3..=400usize {
            if n == 3 {
                continue;
            }
            let inner: f64 = (1..=5usize)
                .filter(|&j| j != n)
                .map(|j| w.omega_sq(j) / (n as f64 - j as f64).abs())
                .sum();
            direct += 0.5 / (n as f64 - 3.0).abs() * inner;
        }
        assert!((g.value - direct).abs() < 1e-10);
        assert!(g.is_finite());
        let beyond = g.upper() - g.value;
        assert!(beyond > 0.0 && beyond < 0.1);
    }

    #[test]
    fn log_power_branches() {
        let lin = Spectrum::linear();
        let a2 = GTilde::build(
            &lin,
            &WeightSequence::log_power(2.0).unwrap(),
            1 << 16,
            1 << 18,
        )
        .unwrap();
        assert_eq!(a2.verdict(2).status, Status::Holds);
        let a1 = GTilde::build(
            &lin,
            &WeightSequence::log_power(1.0).unwrap(),
            1 << 16,
            1 << 18,
        )
        .unwrap();
        assert_eq!(a1.verdict(2).status, Status::Fails);
    }
}
