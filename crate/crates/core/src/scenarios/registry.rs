use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::builders::{
    make_counterexample, make_finite_band, make_gap_supported, make_lnln, make_log_power,
    make_power_alpha, random_dense,
};
use crate::error::{invalid, Error, Result};
use crate::operator_lab::PerturbationMatrix;
use crate::sequence_models::{GapProfile, GapSupported, Spectrum, WeightSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioKind {
    LnlnDecay,
    GapSupported,
    FiniteBand,
    LogPowerFast,
    Counterexample,
    PowerAlpha,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::LnlnDecay,
        ScenarioKind::GapSupported,
        ScenarioKind::FiniteBand,
        ScenarioKind::LogPowerFast,
        ScenarioKind::Counterexample,
        ScenarioKind::PowerAlpha,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::LnlnDecay => "lnln-decay",
            ScenarioKind::GapSupported => "gap-supported",
            ScenarioKind::FiniteBand => "finite-band",
            ScenarioKind::LogPowerFast => "log-power-fast",
            ScenarioKind::Counterexample => "counterexample",
            ScenarioKind::PowerAlpha => "power-alpha",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::LnlnDecay => "omega_j = (log j)^-1/2 (log log j)^-a, slow decay",
            ScenarioKind::GapSupported => "omega supported on b_m = floor(m^a) with values t_{b_m}",
            ScenarioKind::FiniteBand => "tridiagonal V with b^(+-1) = omega^2 / 2 on lnln weights, optional gap-supported part",
            ScenarioKind::LogPowerFast => "omega_j = (log j)^-a, fast-route test (a = 1 negative case)",
            ScenarioKind::Counterexample => "2x2 blocks with growing projection norms, no Riesz basis",
            ScenarioKind::PowerAlpha => "omega_j = j^-alpha with a seeded dense V",
        }
    }

    /// Accepted parameters with defaults.
    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            ScenarioKind::LnlnDecay => &[("a", "1"), ("seed", "0")],
            ScenarioKind::GapSupported => &[
                ("a", "2"),
                ("profile", "invlog"),
                ("level", "1"),
                ("m_max", "none"),
                ("seed", "0"),
            ],
            ScenarioKind::FiniteBand => &[("a", "1"), ("gap_a", "2"), ("gap_level", "0")],
            ScenarioKind::LogPowerFast => &[("a", "2"), ("seed", "0")],
            ScenarioKind::Counterexample => &[("m_max", "10")],
            ScenarioKind::PowerAlpha => &[("alpha", "1"), ("seed", "0")],
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown scenario {s:?}")))
    }
}

/// Truncation sizes; `None` picks the per-scenario default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Truncation {
    pub size: Option<usize>,
    pub depth: Option<usize>,
    pub horizon: Option<usize>,
    pub buffer: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub params: BTreeMap<String, String>,
    pub truncation: Truncation,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            kind,
            params: BTreeMap::new(),
            truncation: Truncation::default(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Parameters with defaults filled in; unknown keys are rejected.
    pub fn resolved(&self) -> Result<BTreeMap<String, String>> {
        let defaults = self.kind.defaults();
        for k in self.params.keys() {
            if !defaults.iter().any(|(d, _)| d == k) {
                let known: Vec<&str> = defaults.iter().map(|d| d.0).collect();
                return Err(invalid(format!(
                    "scenario {} has no parameter {k:?} (known: {})",
                    self.kind,
                    known.join(", ")
                )));
            }
        }
        Ok(defaults
            .iter()
            .map(|(k, v)| {
                (
                    k.to_string(),
                    self.params
                        .get(*k)
                        .cloned()
                        .unwrap_or_else(|| v.to_string()),
                )
            })
            .collect())
    }
}

/// A fully wired scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub params: BTreeMap<String, String>,
    pub spectrum: Spectrum,
    pub weights: WeightSequence,
    pub perturbation: PerturbationMatrix,
    pub size: usize,
    pub horizon: usize,
    pub depth: Option<usize>,
    pub buffer: usize,
    /// Finite-band certificate constant.
    pub band_constant: Option<f64>,
    /// `false` when the gap values do not vanish on the tested window.
    pub tends_to_zero: Option<bool>,
    pub notes: Vec<String>,
}

fn get<T: FromStr>(p: &BTreeMap<String, String>, key: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    let raw = &p[key];
    raw.parse::<T>()
        .map_err(|e| invalid(format!("parameter {key} = {raw:?}: {e}")))
}

fn opt_usize(p: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>> {
    match p[key].as_str() {
        "none" | "" => Ok(None),
        _ => get::<usize>(p, key).map(Some),
    }
}

fn profile(p: &BTreeMap<String, String>) -> Result<GapProfile> {
    let level: f64 = get(p, "level")?;
    match p["profile"].as_str() {
        "invlog" => Ok(GapProfile::InvLog { level }),
        "constant" => Ok(GapProfile::Constant { level }),
        other => {
            // comma separated explicit values
            let vals: std::result::Result<Vec<f64>, _> =
                other.split(',').map(|s| s.trim().parse::<f64>()).collect();
            vals.map(GapProfile::List).map_err(|_| {
                invalid(format!(
                    "profile must be invlog, constant or a value list, got {other:?}"
                ))
            })
        }
    }
}

/// Default dense truncation for decaying-weight scenarios.
pub const DEFAULT_SIZE: usize = 400;
/// Default criteria horizon.
pub const DEFAULT_HORIZON: usize = 1_000_000;

/// Builds the scenario named in `spec`.
pub fn build(spec: &ScenarioSpec) -> Result<Scenario> {
    let p = spec.resolved()?;
    let tr = &spec.truncation;
    let mut notes = Vec::new();
    let mut band_constant = None;
    let mut tends_to_zero = None;
    let default_size = match spec.kind {
        ScenarioKind::Counterexample => {
            let m: usize = get(&p, "m_max")?;
            2 * m * m + 2
        }
        _ => DEFAULT_SIZE,
    };
    let size = tr.size.unwrap_or(default_size);
    if size < 4 {
        return Err(invalid(format!("truncation size {size} below 4")));
    }
    let (spectrum, weights, perturbation) = match spec.kind {
        ScenarioKind::LnlnDecay => {
            let (s, w) = make_lnln(get(&p, "a")?)?;
            let v = random_dense(&w, size, get(&p, "seed")?);
            (s, w, v)
        }
        ScenarioKind::GapSupported => {
            let (s, w, flag) =
                make_gap_supported(get(&p, "a")?, profile(&p)?, opt_usize(&p, "m_max")?)?;
            if !flag {
                notes.push("gap values do not tend to zero on the tested window".into());
            }
            tends_to_zero = Some(flag);
            let v = random_dense(&w, size, get(&p, "seed")?);
            (s, w, v)
        }
        ScenarioKind::FiniteBand => {
            let a: f64 = get(&p, "a")?;
            let gap_level: f64 = get(&p, "gap_level")?;
            let (s, w1) = make_lnln(a)?;
            let w = if gap_level > 0.0 {
                let g = GapSupported::new(
                    get(&p, "gap_a")?,
                    GapProfile::InvLog { level: gap_level },
                    None,
                )?;
                // omega^(2) = sqrt(t)
                WeightSequence::sum(w1, WeightSequence::gap_supported(g))
            } else {
                w1
            };
            let half: Vec<f64> = (1..size).map(|k| w.omega_sq(k) / 2.0).collect();
            let fb = make_finite_band(&half, &vec![0.0; size], &half, &w)?;
            notes.push(format!(
                "band certificate constant C = {:.6e}; weights scaled by sqrt(C)",
                fb.c
            ));
            band_constant = Some(fb.c);
            (s, fb.weights, fb.perturbation)
        }
        ScenarioKind::LogPowerFast => {
            let a: f64 = get(&p, "a")?;
            let (s, w) = make_log_power(a)?;
            if a == 1.0 {
                notes.push("a = 1: G~ is expected to diverge".into());
            }
            let v = random_dense(&w, size, get(&p, "seed")?);
            (s, w, v)
        }
        ScenarioKind::Counterexample => make_counterexample(get(&p, "m_max")?, size)?,
        ScenarioKind::PowerAlpha => make_power_alpha(get(&p, "alpha")?, size, get(&p, "seed")?)?,
    };
    perturbation.verify()?;
    Ok(Scenario {
        kind: spec.kind,
        params: p,
        spectrum,
        weights,
        perturbation,
        size,
        horizon: tr.horizon.unwrap_or(DEFAULT_HORIZON),
        depth: tr.depth,
        buffer: tr.buffer.unwrap_or(match spec.kind {
            // the blocks decouple exactly, so only the unperturbed pad is edge
            ScenarioKind::Counterexample => 2,
            _ => size / 8,
        }),
        band_constant,
        tends_to_zero,
        notes,
    })
}

/// Spectrum and weights of a scenario without its perturbation matrix.
/// Finite-band weights depend on the band certificate, so that kind still
/// builds the (sparse) band.
pub fn build_models(spec: &ScenarioSpec) -> Result<(Spectrum, WeightSequence)> {
    let p = spec.resolved()?;
    match spec.kind {
        ScenarioKind::LnlnDecay => make_lnln(get(&p, "a")?),
        ScenarioKind::GapSupported => {
            make_gap_supported(get(&p, "a")?, profile(&p)?, opt_usize(&p, "m_max")?)
                .map(|(s, w, _)| (s, w))
        }
        ScenarioKind::LogPowerFast => make_log_power(get(&p, "a")?),
        ScenarioKind::Counterexample => {
            let m: usize = get(&p, "m_max")?;
            if m == 0 {
                return Err(invalid("m_max must be at least 1"));
            }
            Ok((Spectrum::linear(), WeightSequence::counterexample()))
        }
        ScenarioKind::PowerAlpha => {
            let alpha: f64 = get(&p, "alpha")?;
            let _: u64 = get(&p, "seed")?;
            Ok((Spectrum::linear(), WeightSequence::power(alpha)?))
        }
        ScenarioKind::FiniteBand => build(spec).map(|sc| (sc.spectrum, sc.weights)),
    }
}
