use crate::error::{invalid, Error, Result};

/// Values `t_{b_m}` attached to the support points `b_m = floor(m^a)`.
#[derive(Debug, Clone, PartialEq)]
pub enum GapProfile {
    /// `t_{b_m} = values[m - 1]`, zero past the end of the list.
    List(Vec<f64>),
    /// `t_{b_m} = level / log(m + 2)`.
    InvLog { level: f64 },
    /// `t_{b_m} = level`.
    Constant { level: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapSupported {
    a: f64,
    profile: GapProfile,
    m_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Zero,
    /// omega_j = j^-alpha.
    Power {
        alpha: f64,
    },
    /// omega_j = (log j)^-1/2 (log log j)^-a, constant on j <= 3.
    SqrtLogLogLog {
        a: f64,
    },
    /// omega_j = (log j)^-a, with omega_1 = omega_2.
    LogPower {
        a: f64,
    },
    /// omega_{b_m}^2 = t_{b_m}, zero off the range of b.
    GapSupported(GapSupported),
    /// omega_j^2 = t_j / 2 for the 2x2 block counterexample.
    Counterexample,
    /// Finite list of omega values, zero afterwards.
    Explicit(Vec<f64>),
    /// factor * inner.
    Scaled {
        factor: f64,
        inner: Box<WeightSequence>,
    },
    /// first + second.
    Sum(Box<WeightSequence>, Box<WeightSequence>),
}

/// Non-negative subordination weights `omega_j`, `j >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    kind: WeightKind,
}

/// Exact integer floor of `m^a`.
///
/// When `a` is a ratio `p/q` with a small denominator the candidate is
/// confirmed in integer arithmetic, so perfect powers never round down.
pub fn floor_pow(m: usize, a: f64) -> usize {
    let x = (m as f64).powf(a);
    let guess = x.floor();
    let near = (x - x.round()).abs() <= 1e-9 * x.max(1.0);
    if near {
        if let Some(exact) = floor_pow_rational(m as u128, a) {
            return exact;
        }
    }
    guess as usize
}

fn floor_pow_rational(m: u128, a: f64) -> Option<usize> {
    for q in 1u32..=8 {
        let p = a * q as f64;
        if (p - p.round()).abs() > 1e-12 {
            continue;
        }
        let p = p.round() as u32;
        let target = m.checked_pow(p)?;
        let mut k = ((m as f64).powf(a).round() as u128).saturating_add(1);
        while k > 0 && k.checked_pow(q).is_none_or(|v| v > target) {
            k -= 1;
        }
        return Some(k as usize);
    }
    None
}

fn pos_finite(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl GapSupported {
    /// `m_max` cuts the support after `b_{m_max}`; a list profile is cut at
    /// its own length anyway.
    pub fn new(a: f64, profile: GapProfile, m_max: Option<usize>) -> Result<Self> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(invalid(format!("gap exponent a = {a} must exceed 1")));
        }
        match &profile {
            GapProfile::List(v) => {
                if let Some(bad) = v.iter().position(|t| !(*t >= 0.0 && t.is_finite())) {
                    return Err(invalid(format!(
                        "t_(b_{}) is negative or not finite",
                        bad + 1
                    )));
                }
            }
            GapProfile::InvLog { level } | GapProfile::Constant { level } => {
                if !(*level >= 0.0 && level.is_finite()) {
                    return Err(invalid(format!("profile level {level} must be >= 0")));
                }
            }
        }
        let g = Self { a, profile, m_max };
        let check = g.m_end().unwrap_or(10_000).min(100_000);
        let mut prev = 0;
        for m in 1..=check {
            let b = g.b(m);
            if b <= prev {
                return Err(invalid(format!("support collision b_{m} = b_{}", m - 1)));
            }
            prev = b;
        }
        Ok(g)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn profile(&self) -> &GapProfile {
        &self.profile
    }

    /// `b_m = floor(m^a)`.
    pub fn b(&self, m: usize) -> usize {
        floor_pow(m, self.a)
    }

    /// Last `m` carrying a possibly non-zero value.
    pub fn m_end(&self) -> Option<usize> {
        let list = match &self.profile {
            GapProfile::List(v) => Some(v.len()),
            _ => None,
        };
        match (list, self.m_max) {
            (Some(l), Some(m)) => Some(l.min(m)),
            (l, m) => l.or(m),
        }
    }

    pub fn t(&self, m: usize) -> f64 {
        if m == 0 || self.m_end().is_some_and(|e| m > e) {
            return 0.0;
        }
        match &self.profile {
            GapProfile::List(v) => v[m - 1],
            GapProfile::InvLog { level } => level / ((m + 2) as f64).ln(),
            GapProfile::Constant { level } => *level,
        }
    }

    /// `m` with `b_m = j`, if any.
    pub fn preimage(&self, j: usize) -> Option<usize> {
        if j == 0 {
            return None;
        }
        let m0 = (j as f64).powf(1.0 / self.a).round() as usize;
        (m0.saturating_sub(1).max(1)..=m0 + 1).find(|&m| self.b(m) == j)
    }

    /// Smallest `m` with `b_m > d`.
    pub fn first_m_after(&self, d: usize) -> usize {
        let mut m = ((d as f64).powf(1.0 / self.a).floor() as usize)
            .saturating_sub(1)
            .max(1);
        while self.b(m) <= d {
            m += 1;
        }
        while m > 1 && self.b(m - 1) > d {
            m -= 1;
        }
        m
    }

    /// Whether the supplied values look like they tend to zero.
    pub fn tends_to_zero(&self) -> bool {
        match &self.profile {
            GapProfile::InvLog { .. } => true,
            GapProfile::Constant { level } => *level == 0.0 || self.m_max.is_some(),
            GapProfile::List(v) => {
                let v = &v[..self.m_end().unwrap_or(0).min(v.len())];
                if v.len() < 2 {
                    return true;
                }
                let half = v.len() / 2;
                let head = v[..half].iter().cloned().fold(0.0, f64::max);
                let tail = v[half..].iter().cloned().fold(0.0, f64::max);
                tail == 0.0 || tail <= 0.5 * head
            }
        }
    }

    fn sup_t_from(&self, m0: usize) -> f64 {
        if self.m_end().is_some_and(|e| m0 > e) {
            return 0.0;
        }
        match &self.profile {
            GapProfile::List(v) => {
                let end = self.m_end().unwrap_or(v.len()).min(v.len());
                v[(m0 - 1).min(end)..end]
                    .iter()
                    .cloned()
                    .fold(0.0, f64::max)
            }
            GapProfile::InvLog { level } => level / ((m0 + 2) as f64).ln(),
            GapProfile::Constant { level } => *level,
        }
    }
}

/// Counterexample block coefficient `s_k`: `sqrt(1 - 1/k)` at perfect
/// squares, zero elsewhere.
pub fn counter_s(k: usize) -> f64 {
    let m = (k as f64).sqrt().round() as usize;
    if m * m == k && k > 0 {
        (1.0 - 1.0 / k as f64).sqrt()
    } else {
        0.0
    }
}

/// `t_j = s_k` for `j in {2k - 1, 2k}`.
pub fn counter_t(j: usize) -> f64 {
    counter_s(j.div_ceil(2))
}

impl WeightSequence {
    pub fn zero() -> Self {
        Self {
            kind: WeightKind::Zero,
        }
    }

    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(invalid(format!(
                "power weights need alpha >= 0, got {alpha}"
            )));
        }
        Ok(Self {
            kind: WeightKind::Power { alpha },
        })
    }

    pub fn sqrtlog_loglog(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid(format!(
                "sqrtlog-loglog weights need a > 0, got {a}"
            )));
        }
        Ok(Self {
            kind: WeightKind::SqrtLogLogLog { a },
        })
    }

    pub fn log_power(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid(format!("log-power weights need a > 0, got {a}")));
        }
        Ok(Self {
            kind: WeightKind::LogPower { a },
        })
    }

    pub fn gap_supported(g: GapSupported) -> Self {
        Self {
            kind: WeightKind::GapSupported(g),
        }
    }

    pub fn counterexample() -> Self {
        Self {
            kind: WeightKind::Counterexample,
        }
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().position(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(invalid(format!(
                "omega_{} is negative or not finite",
                bad + 1
            )));
        }
        Ok(Self {
            kind: WeightKind::Explicit(values),
        })
    }

    pub fn scaled(self, factor: f64) -> Result<Self> {
        if !pos_finite(factor) {
            return Err(invalid(format!("weight scale {factor} must be positive")));
        }
        Ok(Self {
            kind: WeightKind::Scaled {
                factor,
                inner: Box::new(self),
            },
        })
    }

    pub fn sum(first: Self, second: Self) -> Self {
        Self {
            kind: WeightKind::Sum(Box::new(first), Box::new(second)),
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// `omega_j`. Explicit lists reject indices past their end.
    pub fn omega(&self, j: usize) -> Result<f64> {
        if j == 0 {
            return Err(Error::IndexOutOfRange { index: 0, len: 0 });
        }
        if let WeightKind::Explicit(v) = &self.kind {
            if j > v.len() {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    len: v.len(),
                });
            }
        }
        Ok(self.omega_unchecked(j))
    }

    /// `omega_j` treating explicit lists as zero past their end.
    pub fn omega_unchecked(&self, j: usize) -> f64 {
        match &self.kind {
            WeightKind::Zero => 0.0,
            WeightKind::Power { alpha } => (j as f64).powf(-alpha),
            WeightKind::SqrtLogLogLog { a } => {
                let x = j.max(3) as f64;
                x.ln().powf(-0.5) * x.ln().ln().powf(-a)
            }
            WeightKind::LogPower { a } => (j.max(2) as f64).ln().powf(-a),
            WeightKind::GapSupported(g) => g.preimage(j).map_or(0.0, |m| g.t(m).sqrt()),
            WeightKind::Counterexample => (counter_t(j) / 2.0).sqrt(),
            WeightKind::Explicit(v) => v.get(j - 1).copied().unwrap_or(0.0),
            WeightKind::Scaled { factor, inner } => factor * inner.omega_unchecked(j),
            WeightKind::Sum(a, b) => a.omega_unchecked(j) + b.omega_unchecked(j),
        }
    }

    /// `omega_j^2`, computed without a square root where the family allows.
    pub fn omega_sq(&self, j: usize) -> f64 {
        match &self.kind {
            WeightKind::Zero => 0.0,
            WeightKind::Power { alpha } => (j as f64).powf(-2.0 * alpha),
            WeightKind::GapSupported(g) => g.preimage(j).map_or(0.0, |m| g.t(m)),
            WeightKind::Counterexample => counter_t(j) / 2.0,
            _ => {
                let w = self.omega_unchecked(j);
                w * w
            }
        }
    }

    /// `[omega_1^2, ..., omega_len^2]`.
    pub fn omega_sq_vec(&self, len: usize) -> Vec<f64> {
        match &self.kind {
            WeightKind::GapSupported(g) => {
                let mut out = vec![0.0; len];
                let mut m = 1;
                loop {
                    let b = g.b(m);
                    if b > len || g.m_end().is_some_and(|e| m > e) {
                        break;
                    }
                    out[b - 1] = g.t(m);
                    m += 1;
                }
                out
            }
            _ => (1..=len).map(|j| self.omega_sq(j)).collect(),
        }
    }

    /// Last index that can carry a non-zero weight.
    pub fn support_end(&self) -> Option<usize> {
        match &self.kind {
            WeightKind::Zero => Some(0),
            WeightKind::Explicit(v) => Some(v.iter().rposition(|w| *w != 0.0).map_or(0, |p| p + 1)),
            WeightKind::GapSupported(g) => match &g.profile {
                GapProfile::Constant { level } | GapProfile::InvLog { level } if *level == 0.0 => {
                    Some(0)
                }
                _ => g.m_end().map(|e| if e == 0 { 0 } else { g.b(e) }),
            },
            WeightKind::Scaled { inner, .. } => inner.support_end(),
            WeightKind::Sum(a, b) => Some(a.support_end()?.max(b.support_end()?)),
            _ => None,
        }
    }

    /// Upper bound on `sup_{j > d} omega_j^2`.
    pub fn sup_sq_after(&self, d: usize) -> f64 {
        match &self.kind {
            WeightKind::Zero => 0.0,
            WeightKind::Power { .. }
            | WeightKind::SqrtLogLogLog { .. }
            | WeightKind::LogPower { .. } => self.omega_sq(d + 1),
            WeightKind::GapSupported(g) => g.sup_t_from(g.first_m_after(d)),
            WeightKind::Counterexample => 0.5,
            WeightKind::Explicit(v) => v.iter().skip(d).map(|w| w * w).fold(0.0, f64::max),
            WeightKind::Scaled { factor, inner } => factor * factor * inner.sup_sq_after(d),
            WeightKind::Sum(a, b) => 2.0 * (a.sup_sq_after(d) + b.sup_sq_after(d)),
        }
    }

    /// Whether `omega_j` is non-increasing in `j` for every `j`.
    pub fn is_monotone_decreasing(&self) -> bool {
        match &self.kind {
            WeightKind::Zero
            | WeightKind::Power { .. }
            | WeightKind::SqrtLogLogLog { .. }
            | WeightKind::LogPower { .. } => true,
            WeightKind::Explicit(v) => v.windows(2).all(|w| w[1] <= w[0]),
            WeightKind::Scaled { inner, .. } => inner.is_monotone_decreasing(),
            WeightKind::Sum(a, b) => a.is_monotone_decreasing() && b.is_monotone_decreasing(),
            WeightKind::GapSupported(_) | WeightKind::Counterexample => {
                self.support_end() == Some(0)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.support_end() == Some(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_forms() {
        assert_eq!(WeightSequence::power(1.0).unwrap().omega(4).unwrap(), 0.25);
        assert_eq!(WeightSequence::zero().omega(100).unwrap(), 0.0);
        let lp = WeightSequence::log_power(2.0).unwrap();
        assert_eq!(lp.omega(1).unwrap(), lp.omega(2).unwrap());
        let ll = WeightSequence::sqrtlog_loglog(1.0).unwrap();
        assert_eq!(ll.omega(1).unwrap(), ll.omega(3).unwrap());
    }

    #[test]
    fn lnln_at_log_log_one() {
        // log log j = 1 means log j = e, so omega = e^(-1/2) there.
        let x = std::f64::consts::E.powf(std::f64::consts::E);
        let w = x.ln().powf(-0.5) * x.ln().ln().powf(-1.0);
        assert_abs_diff_eq!(w, (-0.5f64).exp(), epsilon = 1e-12);
        let ll = WeightSequence::sqrtlog_loglog(1.0).unwrap();
        let (w15, w16) = (ll.omega(15).unwrap(), ll.omega(16).unwrap());
        assert!(w15 > w && w > w16);
    }

    #[test]
    fn counterexample_values() {
        let w = WeightSequence::counterexample();
        let expected = ((8.0f64 / 9.0).sqrt() / 2.0).sqrt();
        assert_abs_diff_eq!(w.omega(17).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(w.omega(17).unwrap(), 0.68661, epsilon = 1e-4);
        assert_eq!(w.omega(1).unwrap(), 0.0);
        assert_eq!(w.omega(3).unwrap(), 0.0);
        assert_abs_diff_eq!(w.omega_sq(8), 3f64.sqrt() / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn explicit_range() {
        let w = WeightSequence::explicit(vec![1.0, 0.5]).unwrap();
        assert!(w.omega(3).is_err());
        assert_eq!(w.omega_unchecked(3), 0.0);
        assert_eq!(w.support_end(), Some(2));
        assert!(WeightSequence::explicit(vec![-1.0]).is_err());
    }

    #[test]
    fn floor_pow_prefix() {
        let b: Vec<usize> = (1..=7).map(|m| floor_pow(m, 1.5)).collect();
        assert_eq!(b, vec![1, 2, 5, 8, 11, 14, 18]);
        assert_eq!(floor_pow(4, 1.5), 8);
        assert_eq!(floor_pow(9, 1.5), 27);
        assert_eq!(floor_pow(1000, 2.0), 1_000_000);
    }

    #[test]
    fn gap_support_layout() {
        let g = GapSupported::new(2.0, GapProfile::Constant { level: 0.25 }, None).unwrap();
        let w = WeightSequence::gap_supported(g.clone());
        assert_eq!(w.omega_sq(9), 0.25);
        assert_eq!(w.omega_sq(10), 0.0);
        assert_eq!(g.first_m_after(9), 4);
        assert_eq!(g.first_m_after(8), 3);
        let v = w.omega_sq_vec(20);
        let support: Vec<usize> = (1..=20).filter(|&j| v[j - 1] > 0.0).collect();
        assert_eq!(support, vec![1, 4, 9, 16]);
        assert!(!g.tends_to_zero());
        assert!(GapSupported::new(1.0, GapProfile::InvLog { level: 1.0 }, None).is_err());
    }

    #[test]
    fn sums_and_scaling() {
        let w = WeightSequence::sum(
            WeightSequence::power(1.0).unwrap(),
            WeightSequence::explicit(vec![1.0]).unwrap(),
        )
        .scaled(2.0)
        .unwrap();
        assert_eq!(w.omega(1).unwrap(), 4.0);
        assert_eq!(w.omega(2).unwrap(), 1.0);
        assert_eq!(w.support_end(), None);
    }
}
