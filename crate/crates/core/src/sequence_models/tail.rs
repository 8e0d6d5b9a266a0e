use super::spectrum::{Spectrum, SpectrumKind};
use super::weights::{GapProfile, WeightKind, WeightSequence};

/// Multiplier applied to every analytic tail bound to absorb rounding.
pub const ROUND_UP: f64 = 1.0 + 1e-12;

/// How the omitted part of an infinite sum was bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TailMethod {
    /// Nothing was omitted.
    FiniteSupport,
    IntegralTest,
    Geometric,
    /// No bound is available; the enclosure is open above.
    Unbounded,
    /// The series is known to diverge.
    Divergent,
}

impl TailMethod {
    pub fn name(self) -> &'static str {
        match self {
            TailMethod::FiniteSupport => "finite_support",
            TailMethod::IntegralTest => "integral_test",
            TailMethod::Geometric => "geometric",
            TailMethod::Unbounded => "none",
            TailMethod::Divergent => "divergent",
        }
    }

    /// Dominant method when two bounds are combined.
    pub fn combine(self, other: Self) -> Self {
        self.max(other)
    }
}

/// Enclosure `[value, value + tail_upper]` of a sum of non-negative terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub value: f64,
    pub tail_upper: f64,
    pub method: TailMethod,
}

impl TailBound {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            tail_upper: 0.0,
            method: TailMethod::FiniteSupport,
        }
    }

    pub fn new(value: f64, tail: f64, method: TailMethod) -> Self {
        let tail_upper = match method {
            TailMethod::FiniteSupport => tail,
            TailMethod::Unbounded | TailMethod::Divergent => f64::INFINITY,
            _ => tail * ROUND_UP,
        };
        Self {
            value,
            tail_upper,
            method,
        }
    }

    pub fn upper(&self) -> f64 {
        self.value + self.tail_upper
    }

    pub fn is_finite(&self) -> bool {
        self.tail_upper.is_finite()
    }

    pub fn midpoint(&self) -> f64 {
        self.value + 0.5 * self.tail_upper
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            value: c * self.value,
            tail_upper: if self.tail_upper.is_finite() {
                c * self.tail_upper
            } else {
                self.tail_upper
            },
            method: self.method,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            value: self.value + other.value,
            tail_upper: self.tail_upper + other.tail_upper,
            method: self.method.combine(other.method),
        }
    }
}

/// Outcome of bounding an omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailEstimate {
    Finite(f64, TailMethod),
    Divergent,
    Unknown,
}

impl TailEstimate {
    pub fn scale(self, c: f64) -> Self {
        match self {
            TailEstimate::Finite(v, m) => TailEstimate::Finite(c * v, m),
            other => other,
        }
    }

    pub fn into_bound(self, value: f64) -> TailBound {
        match self {
            TailEstimate::Finite(t, m) => TailBound::new(value, t, m),
            TailEstimate::Divergent => TailBound::new(value, 0.0, TailMethod::Divergent),
            TailEstimate::Unknown => TailBound::new(value, 0.0, TailMethod::Unbounded),
        }
    }
}

fn is_one(x: f64) -> bool {
    (x - 1.0).abs() < 1e-14
}

/// `sum_{m >= m0} m^-p` for `p > 1`, `m0 >= 1`.
fn zeta_tail(m0: usize, p: f64) -> f64 {
    let m = m0 as f64;
    m.powf(-p) + m.powf(1.0 - p) / (p - 1.0)
}

/// Bound on `sum_{j > d} omega_j^2 j^-gamma` from the family's closed form.
pub fn weighted_power_tail(w: &WeightSequence, d: usize, gamma: f64) -> TailEstimate {
    let d = d.max(1);
    if let Some(end) = w.support_end() {
        let s = ((d + 1)..=end.max(d))
            .map(|j| w.omega_sq(j) * (j as f64).powf(-gamma))
            .sum();
        return TailEstimate::Finite(s, TailMethod::FiniteSupport);
    }
    let it = TailMethod::IntegralTest;
    match w.kind() {
        WeightKind::Zero | WeightKind::Explicit(_) => {
            TailEstimate::Finite(0.0, TailMethod::FiniteSupport)
        }
        WeightKind::Power { alpha } => {
            let p = 2.0 * alpha + gamma;
            if p > 1.0 {
                TailEstimate::Finite((d as f64).powf(1.0 - p) / (p - 1.0), it)
            } else {
                TailEstimate::Divergent
            }
        }
        WeightKind::LogPower { a } => {
            if d < 2 {
                return with_head(w, d, 2, gamma);
            }
            let x = d as f64;
            if is_one(gamma) {
                if 2.0 * a > 1.0 {
                    TailEstimate::Finite(x.ln().powf(1.0 - 2.0 * a) / (2.0 * a - 1.0), it)
                } else {
                    TailEstimate::Divergent
                }
            } else if gamma > 1.0 {
                TailEstimate::Finite(
                    x.ln().powf(-2.0 * a) * x.powf(1.0 - gamma) / (gamma - 1.0),
                    it,
                )
            } else {
                TailEstimate::Divergent
            }
        }
        WeightKind::SqrtLogLogLog { a } => {
            if d < 3 {
                return with_head(w, d, 3, gamma);
            }
            let x = d as f64;
            let ll = x.ln().ln();
            if is_one(gamma) {
                if 2.0 * a > 1.0 {
                    TailEstimate::Finite(ll.powf(1.0 - 2.0 * a) / (2.0 * a - 1.0), it)
                } else {
                    TailEstimate::Divergent
                }
            } else if gamma > 1.0 {
                let wd = 1.0 / (x.ln() * ll.powf(2.0 * a));
                TailEstimate::Finite(wd * x.powf(1.0 - gamma) / (gamma - 1.0), it)
            } else {
                TailEstimate::Divergent
            }
        }
        WeightKind::Counterexample => {
            // Pair m sits at 2m^2 - 1, 2m^2 with omega^2 <= 1/2 and
            // 2m^2 - 1 >= m^2, so the pair contributes at most m^(-2 gamma).
            if 2.0 * gamma <= 1.0 {
                return TailEstimate::Divergent;
            }
            let mut m0 = 1usize;
            while 2 * m0 * m0 <= d {
                m0 += 1;
            }
            TailEstimate::Finite(zeta_tail(m0, 2.0 * gamma), it)
        }
        WeightKind::GapSupported(g) => {
            // b_m >= (m - 1)^a for m >= 2.
            let m0 = g.first_m_after(d).max(2);
            let level = match g.profile() {
                GapProfile::List(_) => unreachable!("list profiles are finitely supported"),
                GapProfile::InvLog { level } => level / ((m0 + 2) as f64).ln(),
                GapProfile::Constant { level } => *level,
            };
            let p = g.a() * gamma;
            if p <= 1.0 {
                return TailEstimate::Divergent;
            }
            TailEstimate::Finite(level * zeta_tail(m0 - 1, p), it)
        }
        WeightKind::Scaled { factor, inner } => {
            weighted_power_tail(inner, d, gamma).scale(factor * factor)
        }
        WeightKind::Sum(a, b) => match (
            weighted_power_tail(a, d, gamma),
            weighted_power_tail(b, d, gamma),
        ) {
            (TailEstimate::Finite(x, mx), TailEstimate::Finite(y, my)) => {
                TailEstimate::Finite(2.0 * (x + y), mx.combine(my))
            }
            (TailEstimate::Divergent, _) | (_, TailEstimate::Divergent) => TailEstimate::Divergent,
            _ => TailEstimate::Unknown,
        },
    }
}

fn with_head(w: &WeightSequence, d: usize, start: usize, gamma: f64) -> TailEstimate {
    let head: f64 = ((d + 1)..=start)
        .map(|j| w.omega_sq(j) * (j as f64).powf(-gamma))
        .sum();
    match weighted_power_tail(w, start, gamma) {
        TailEstimate::Finite(t, m) => TailEstimate::Finite(head + t, m),
        other => other,
    }
}

/// Bound on `sum_{j > d} omega_j^2 / mu_j`.
pub fn rho_tail(spec: &Spectrum, w: &WeightSequence, d: usize) -> TailEstimate {
    if let Some(len) = spec.len() {
        let s = ((d + 1)..=len)
            .map(|j| w.omega_sq(j) / spec.mu_unchecked(j))
            .sum();
        return TailEstimate::Finite(s, TailMethod::FiniteSupport);
    }
    if let Some(end) = w.support_end() {
        let end = end.min(spec.max_index());
        let s = ((d + 1)..=end)
            .map(|j| w.omega_sq(j) / spec.mu_unchecked(j))
            .sum();
        return TailEstimate::Finite(s, TailMethod::FiniteSupport);
    }
    match spec.kind() {
        SpectrumKind::Geometric { c, q } => {
            let sup = w.sup_sq_after(d);
            let t = sup * q.powf(-(d as f64)) / (c * (1.0 - 1.0 / q));
            TailEstimate::Finite(t, TailMethod::Geometric)
        }
        _ => {
            let env = spec
                .envelope_after(d)
                .expect("closed-form spectrum has an envelope");
            weighted_power_tail(w, d, env.gamma).scale(1.0 / env.kappa)
        }
    }
}

/// Bound on `sum_{j > d} omega_j^2 / |x - mu_j|` for real `x < mu_{d+1}`;
/// `|z - mu_j| >= mu_j - Re z` extends it to complex `z`.
pub fn shifted_tail(spec: &Spectrum, w: &WeightSequence, d: usize, x: f64) -> TailEstimate {
    let end = match (spec.len(), w.support_end()) {
        (Some(l), Some(e)) => Some(l.min(e)),
        (l, e) => l.or(e),
    };
    if let Some(end) = end {
        let end = end.min(spec.max_index());
        let s = ((d + 1)..=end)
            .map(|j| w.omega_sq(j) / (spec.mu_unchecked(j) - x).abs())
            .sum();
        return TailEstimate::Finite(s, TailMethod::FiniteSupport);
    }
    let next = spec.mu_unchecked(d + 1);
    if x >= next {
        return TailEstimate::Unknown;
    }
    // mu_j - x >= mu_j (1 - x / mu_{d+1}) for j > d when x >= 0.
    let factor = if x > 0.0 { 1.0 / (1.0 - x / next) } else { 1.0 };
    rho_tail(spec, w, d).scale(factor)
}

/// Bound on `sum_{n > d} mu_n^-p`.
pub fn schatten_tail(spec: &Spectrum, p: f64, d: usize) -> TailEstimate {
    match spec.kind() {
        SpectrumKind::Explicit(_) => TailEstimate::Finite(0.0, TailMethod::FiniteSupport),
        SpectrumKind::Geometric { c, q } => {
            let t = c.powf(-p) * q.powf(-p * d as f64) / (1.0 - q.powf(-p));
            TailEstimate::Finite(t, TailMethod::Geometric)
        }
        _ => {
            let env = spec
                .envelope_after(d)
                .expect("closed-form spectrum has an envelope");
            let e = p * env.gamma;
            if e > 1.0 {
                let t = env.kappa.powf(-p) * (d.max(1) as f64).powf(1.0 - e) / (e - 1.0);
                TailEstimate::Finite(t, TailMethod::IntegralTest)
            } else {
                TailEstimate::Divergent
            }
        }
    }
}

/// Enclosure of `sum_n mu_n^-p`, summed up to `depth`.
pub fn schatten_sum(spec: &Spectrum, p: f64, depth: usize) -> TailBound {
    let depth = depth.max(1).min(spec.max_index());
    let value: f64 = (1..=depth).map(|n| spec.mu_unchecked(n).powf(-p)).sum();
    schatten_tail(spec, p, depth).into_bound(value)
}
