use crate::error::{invalid, Error, Result};

/// Closed-form or tabulated eigenvalue sequence of the unperturbed operator.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumKind {
    /// mu_n = n.
    Linear,
    /// mu_n = c n + d.
    Affine { c: f64, d: f64 },
    /// mu_n = c n^gamma.
    Power { c: f64, gamma: f64 },
    /// mu_n = c q^(n-1).
    Geometric { c: f64, q: f64 },
    /// Finite list; the model is finite-dimensional.
    Explicit(Vec<f64>),
}

/// Strictly increasing, strictly positive sequence `mu_1 < mu_2 < ...`.
///
/// Only the validated constructors produce values, so every accessor may
/// rely on the ordering invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kind: SpectrumKind,
}

/// Neighbour gaps at an index. `r_minus` is absent at `n = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapData {
    pub n: usize,
    pub r_plus: f64,
    pub r_minus: Option<f64>,
    pub r: f64,
}

/// Lower envelope `mu_j >= kappa * j^gamma`, valid past some index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub kappa: f64,
    pub gamma: f64,
}

impl Spectrum {
    pub fn linear() -> Self {
        Self {
            kind: SpectrumKind::Linear,
        }
    }

    pub fn affine(c: f64, d: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && d.is_finite()) || c + d <= 0.0 {
            return Err(invalid(format!(
                "affine spectrum needs c > 0 and c + d > 0 (c = {c}, d = {d})"
            )));
        }
        Ok(Self {
            kind: SpectrumKind::Affine { c, d },
        })
    }

    pub fn power(c: f64, gamma: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid(format!(
                "power spectrum needs c > 0 and gamma > 0 (c = {c}, gamma = {gamma})"
            )));
        }
        Ok(Self {
            kind: SpectrumKind::Power { c, gamma },
        })
    }

    pub fn geometric(c: f64, q: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && q > 1.0 && q.is_finite()) {
            return Err(invalid(format!(
                "geometric spectrum needs c > 0 and q > 1 (c = {c}, q = {q})"
            )));
        }
        Ok(Self {
            kind: SpectrumKind::Geometric { c, q },
        })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("explicit spectrum is empty"));
        }
        if !(values[0] > 0.0) {
            return Err(invalid(format!("mu_1 = {} is not positive", values[0])));
        }
        for (i, w) in values.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(invalid(format!(
                    "explicit spectrum not strictly increasing at index {}",
                    i + 2
                )));
            }
        }
        Ok(Self {
            kind: SpectrumKind::Explicit(values),
        })
    }

    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    /// Number of eigenvalues, `None` for the unbounded closed-form kinds.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            SpectrumKind::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    /// Largest index whose eigenvalue is representable as a finite double.
    pub fn max_index(&self) -> usize {
        match &self.kind {
            SpectrumKind::Explicit(v) => v.len(),
            SpectrumKind::Geometric { c, q } => {
                let n = ((1e300 / c).ln() / q.ln()).floor();
                (n.max(0.0) as usize).saturating_add(1)
            }
            _ => usize::MAX / 4,
        }
    }

    pub fn mu(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.max_index() {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: self.max_index(),
            });
        }
        Ok(self.mu_unchecked(n))
    }

    /// `mu_n` without range checks; callers guarantee `1 <= n <= max_index()`.
    #[inline]
    pub fn mu_unchecked(&self, n: usize) -> f64 {
        let x = n as f64;
        match &self.kind {
            SpectrumKind::Linear => x,
            SpectrumKind::Affine { c, d } => c * x + d,
            SpectrumKind::Power { c, gamma } => c * x.powf(*gamma),
            SpectrumKind::Geometric { c, q } => c * q.powi(n as i32 - 1),
            SpectrumKind::Explicit(v) => v[n - 1],
        }
    }

    pub fn gaps(&self, n: usize) -> Result<GapData> {
        if n == 0 || n >= self.max_index() {
            return Err(Error::IndexOutOfRange {
                index: n + 1,
                len: self.max_index(),
            });
        }
        let mu = self.mu_unchecked(n);
        let r_plus = self.mu_unchecked(n + 1) - mu;
        if n == 1 {
            return Ok(GapData {
                n,
                r_plus,
                r_minus: None,
                r: r_plus / 2.0,
            });
        }
        let r_minus = mu - self.mu_unchecked(n - 1);
        Ok(GapData {
            n,
            r_plus,
            r_minus: Some(r_minus),
            r: r_minus.min(r_plus) / 2.0,
        })
    }

    /// Half-gap `r_n`, with `r_1 = (mu_2 - mu_1) / 2`.
    pub fn half_gap(&self, n: usize) -> Result<f64> {
        self.gaps(n).map(|g| g.r)
    }

    /// `r_n` without range checks; needs `1 <= n < max_index()`.
    #[inline]
    pub fn half_gap_unchecked(&self, n: usize) -> f64 {
        match &self.kind {
            SpectrumKind::Linear => 0.5,
            SpectrumKind::Affine { c, .. } => 0.5 * c,
            _ => {
                let mu = self.mu_unchecked(n);
                let plus = self.mu_unchecked(n + 1) - mu;
                if n == 1 {
                    plus / 2.0
                } else {
                    plus.min(mu - self.mu_unchecked(n - 1)) / 2.0
                }
            }
        }
    }

    /// `(c, d)` when `mu_n = c n + d`, which makes `mu_n - mu_j` depend on
    /// `n - j` only.
    pub fn affine_coefficients(&self) -> Option<(f64, f64)> {
        match &self.kind {
            SpectrumKind::Linear => Some((1.0, 0.0)),
            SpectrumKind::Affine { c, d } => Some((*c, *d)),
            SpectrumKind::Power { c, gamma } if *gamma == 1.0 => Some((*c, 0.0)),
            _ => None,
        }
    }

    /// Envelope `mu_j >= kappa j^gamma` valid for every `j > d`.
    /// `None` for geometric and explicit kinds.
    pub fn envelope_after(&self, d: usize) -> Option<Envelope> {
        match &self.kind {
            SpectrumKind::Linear => Some(Envelope {
                kappa: 1.0,
                gamma: 1.0,
            }),
            SpectrumKind::Affine { c, d: shift } => {
                let kappa = if *shift >= 0.0 {
                    *c
                } else {
                    c + shift / (d as f64 + 1.0)
                };
                Some(Envelope { kappa, gamma: 1.0 })
            }
            SpectrumKind::Power { c, gamma } => Some(Envelope {
                kappa: *c,
                gamma: *gamma,
            }),
            _ => None,
        }
    }

    /// Largest `k <= n` with `mu_n - r_n >= 2 mu_k`.
    pub fn k_n(&self, n: usize) -> Result<Option<usize>> {
        let g = self.gaps(n)?;
        let target = self.mu_unchecked(n) - g.r;
        if 2.0 * self.mu_unchecked(1) > target {
            return Ok(None);
        }
        let (mut lo, mut hi) = (1usize, n);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if 2.0 * self.mu_unchecked(mid) <= target {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Ok(Some(lo))
    }
}
