//! Run configuration: a flat TOML document with dotted keys, merged with
//! command-line overrides and echoed back fully resolved.
//!
//! Keys (defaults in brackets):
//!
//! ```text
//! seed                     base seed [0]
//! scenario.name            registered scenario; excludes spectrum/weights/perturbation
//! scenario.params.<key>    scenario parameter
//! spectrum.kind            linear | affine | power | geometric | explicit [linear]
//! spectrum.params.c/d/gamma/q/values
//! weights.kind             zero | power | sqrtlog-loglog | log-power | gap-supported
//!                          | counterexample | explicit (required without a scenario)
//! weights.params.alpha/a/profile/level/m_max/values/scale
//! perturbation.source      zero | random | file [zero]
//! perturbation.file        path of a perturbation text file
//! perturbation.seed        [seed]
//! criteria.epsilon [0.1], criteria.horizon [1000000], criteria.depth,
//! criteria.schatten_ps [[1, 2, 4]], criteria.fast_route [false],
//! criteria.gtilde_depth [65536], criteria.gtilde_n1 [2], criteria.box_search [true]
//! spectral.size [400 or the scenario size], spectral.buffer [size / 8],
//! spectral.quad_nodes [64], spectral.draws [20], spectral.seed [seed],
//! spectral.n_start, spectral.contour_samples [3], spectral.tolerance [1e-8],
//! spectral.n0 + spectral.h1 + spectral.h2 (skip the criteria run)
//! sweep.grid.<param>       list of values, at most two grid parameters
//! sweep.table              g | g0 | g_tilde [g]
//! sweep.lo [6], sweep.hi [20]   dyadic exponents of the sample points
//! sweep.model              power | power-log | log-power [power-log]
//! sweep.sample             point | window-max [point]; window-max takes the sup over (2^(k-1), 2^k]
//! output.dir
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;

use rieszlab_core::criteria::{CriteriaParams, RateModel};
use rieszlab_core::scenarios::{ScenarioKind, ScenarioSpec, Truncation};
use rieszlab_core::sequence_models::{GapProfile, GapSupported, Spectrum, WeightSequence};
use toml::Value;

/// Malformed configuration (exit 64).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type CResult<T> = Result<T, ConfigError>;

fn cerr(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Numbers are written with 17 significant digits.
pub fn num(x: f64) -> String {
    // no "-0e0"
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn render(v: &Value) -> String {
    match v {
        Value::Float(x) => num(*x),
        Value::Array(a) => format!("[{}]", a.iter().map(render).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

/// Scenario parameters are strings in the core; numbers are canonicalised
/// so `0.30` and `0.3` give the same run.
fn param_string(v: &Value) -> CResult<String> {
    match v {
        Value::Integer(i) => Ok(i.to_string()),
        Value::Float(x) => Ok(x.to_string()),
        Value::Boolean(b) => Ok(b.to_string()),
        Value::String(s) => Ok(canonical(s)),
        Value::Array(a) => Ok(a
            .iter()
            .map(param_string)
            .collect::<CResult<Vec<_>>>()?
            .join(",")),
        other => Err(cerr(format!("unsupported parameter value {other}"))),
    }
}

fn canonical(s: &str) -> String {
    let t = s.trim();
    if t.parse::<i64>().is_ok() {
        return t.to_string();
    }
    match t.parse::<f64>() {
        Ok(x) if x.is_finite() => x.to_string(),
        _ => t.to_string(),
    }
}

fn param_value(s: &str) -> Value {
    if let Ok(i) = s.parse::<i64>() {
        return Value::Integer(i);
    }
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Value::Float(x),
        _ => Value::String(s.to_string()),
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Flat key-value view with use tracking and an echo of every value read.
#[derive(Debug, Default)]
pub struct Flat {
    map: BTreeMap<String, Value>,
    used: BTreeSet<String>,
    echo: BTreeMap<String, Value>,
}

impl Flat {
    pub fn parse(text: &str) -> CResult<Self> {
        let table: toml::Table = text.parse().map_err(|e| cerr(format!("config: {e}")))?;
        let mut map = BTreeMap::new();
        flatten("", &table, &mut map);
        Ok(Self {
            map,
            ..Default::default()
        })
    }

    pub fn set(&mut self, key: &str, v: Value) {
        self.map.insert(key.to_string(), v);
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.map.keys().any(|k| k.starts_with(prefix))
    }

    fn raw(&mut self, key: &str) -> Option<Value> {
        self.used.insert(key.to_string());
        self.map.get(key).cloned()
    }

    fn note(&mut self, key: &str, v: Value) {
        self.echo.insert(key.to_string(), v);
    }

    fn float_opt(&mut self, key: &str) -> CResult<Option<f64>> {
        let x = match self.raw(key) {
            None => return Ok(None),
            Some(Value::Float(x)) => x,
            Some(Value::Integer(i)) => i as f64,
            Some(v) => return Err(cerr(format!("{key}: expected a number, got {v}"))),
        };
        self.note(key, Value::Float(x));
        Ok(Some(x))
    }

    fn float(&mut self, key: &str, default: f64) -> CResult<f64> {
        let x = self.float_opt(key)?.unwrap_or(default);
        self.note(key, Value::Float(x));
        Ok(x)
    }

    fn uint_opt(&mut self, key: &str) -> CResult<Option<u64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if i >= 0 => {
                self.note(key, Value::Integer(i));
                Ok(Some(i as u64))
            }
            Some(v) => Err(cerr(format!(
                "{key}: expected a non-negative integer, got {v}"
            ))),
        }
    }

    fn uint(&mut self, key: &str, default: u64) -> CResult<u64> {
        let x = self.uint_opt(key)?.unwrap_or(default);
        self.note(key, Value::Integer(x as i64));
        Ok(x)
    }

    fn usize_opt(&mut self, key: &str) -> CResult<Option<usize>> {
        Ok(self.uint_opt(key)?.map(|x| x as usize))
    }

    fn usize(&mut self, key: &str, default: usize) -> CResult<usize> {
        Ok(self.uint(key, default as u64)? as usize)
    }

    fn string_opt(&mut self, key: &str) -> CResult<Option<String>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => {
                self.note(key, Value::String(s.clone()));
                Ok(Some(s))
            }
            Some(v) => Err(cerr(format!("{key}: expected a string, got {v}"))),
        }
    }

    fn string(&mut self, key: &str, default: &str) -> CResult<String> {
        let s = self.string_opt(key)?.unwrap_or_else(|| default.to_string());
        self.note(key, Value::String(s.clone()));
        Ok(s)
    }

    fn boolean(&mut self, key: &str, default: bool) -> CResult<bool> {
        let b = match self.raw(key) {
            None => default,
            Some(Value::Boolean(b)) => b,
            Some(v) => return Err(cerr(format!("{key}: expected true or false, got {v}"))),
        };
        self.note(key, Value::Boolean(b));
        Ok(b)
    }

    fn floats(&mut self, key: &str, default: &[f64]) -> CResult<Vec<f64>> {
        let xs = match self.raw(key) {
            None => default.to_vec(),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(cerr(format!("{key}: expected numbers, got {v}"))),
                })
                .collect::<CResult<Vec<f64>>>()?,
            Some(v) => Err(cerr(format!("{key}: expected a list of numbers, got {v}")))?,
        };
        self.note(
            key,
            Value::Array(xs.iter().map(|&x| Value::Float(x)).collect()),
        );
        Ok(xs)
    }

    /// Every key below `prefix`, marked as used, with the prefix stripped.
    fn under(&mut self, prefix: &str) -> Vec<(String, Value)> {
        let found: Vec<(String, Value)> = self
            .map
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix(prefix)
                    .map(|rest| (rest.to_string(), v.clone()))
            })
            .collect();
        for (k, _) in &found {
            self.used.insert(format!("{prefix}{k}"));
        }
        found
    }

    fn finish(&self) -> CResult<()> {
        let unknown: Vec<&str> = self
            .map
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(|k| k.as_str())
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(cerr(format!("unknown config keys: {}", unknown.join(", "))))
        }
    }

    /// Sorted `key = value` lines, itself a valid config.
    pub fn echo(&self) -> String {
        self.echo
            .iter()
            .map(|(k, v)| format!("{k} = {}\n", render(v)))
            .collect()
    }
}

/// Command-line overrides; each one replaces the matching config key.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<String>,
    pub params: Vec<(String, String)>,
    pub grid: Vec<(String, Vec<String>)>,
    pub seed: Option<u64>,
    pub size: Option<usize>,
    pub quad_nodes: Option<usize>,
    pub epsilon: Option<f64>,
    pub fast_route: bool,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, flat: &mut Flat) -> CResult<()> {
        let int = |x: u64, what: &str| {
            i64::try_from(x)
                .map(Value::Integer)
                .map_err(|_| cerr(format!("{what} must be below 2^63")))
        };
        if let Some(s) = &self.scenario {
            flat.set("scenario.name", Value::String(s.clone()));
        }
        for (k, v) in &self.params {
            flat.set(&format!("scenario.params.{k}"), Value::String(v.clone()));
        }
        for (k, vs) in &self.grid {
            flat.set(
                &format!("sweep.grid.{k}"),
                Value::Array(vs.iter().map(|v| Value::String(v.clone())).collect()),
            );
        }
        if let Some(s) = self.seed {
            flat.set("seed", int(s, "seed")?);
        }
        if let Some(n) = self.size {
            flat.set("spectral.size", int(n as u64, "size")?);
        }
        if let Some(n) = self.quad_nodes {
            flat.set("spectral.quad_nodes", int(n as u64, "quad nodes")?);
        }
        if let Some(e) = self.epsilon {
            flat.set("criteria.epsilon", Value::Float(e));
        }
        if self.fast_route {
            flat.set("criteria.fast_route", Value::Boolean(true));
        }
        if let Some(p) = &self.out {
            flat.set("output.dir", Value::String(p.display().to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PerturbationSource {
    Zero,
    Random { seed: u64 },
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub enum Source {
    Scenario(ScenarioSpec),
    Explicit {
        label: String,
        spectrum: Spectrum,
        weights: WeightSequence,
        perturbation: PerturbationSource,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCfg {
    pub size: Option<usize>,
    pub buffer: Option<usize>,
    pub quad_nodes: usize,
    pub draws: usize,
    pub seed: u64,
    pub n_start: Option<usize>,
    pub contour_samples: usize,
    pub tolerance: f64,
    /// Manual `(N0, h1, h2)`; skips the criteria run.
    pub manual: Option<(usize, f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepTable {
    G,
    G0,
    GTilde,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCfg {
    pub axes: Vec<(String, Vec<String>)>,
    pub table: SweepTable,
    pub lo: u32,
    pub hi: u32,
    pub model: RateModel,
    /// Sup over each dyadic window instead of the value at 2^k.
    pub window_max: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: Source,
    pub criteria: CriteriaParams,
    pub spectral: SpectralCfg,
    pub sweep: SweepCfg,
    pub out: Option<PathBuf>,
    /// Fully resolved config, one `key = value` per line.
    pub echo: String,
}

fn core(e: rieszlab_core::Error) -> ConfigError {
    cerr(e.to_string())
}

fn spectrum_from(flat: &mut Flat) -> CResult<Spectrum> {
    let kind = flat.string("spectrum.kind", "linear")?;
    let s = match kind.as_str() {
        "linear" => Ok(Spectrum::linear()),
        "affine" => Spectrum::affine(
            flat.float("spectrum.params.c", 1.0)?,
            flat.float("spectrum.params.d", 0.0)?,
        ),
        "power" => Spectrum::power(
            flat.float("spectrum.params.c", 1.0)?,
            flat.float("spectrum.params.gamma", 1.0)?,
        ),
        "geometric" => Spectrum::geometric(
            flat.float("spectrum.params.c", 1.0)?,
            flat.float("spectrum.params.q", 2.0)?,
        ),
        "explicit" => Spectrum::explicit(flat.floats("spectrum.params.values", &[])?),
        other => return Err(cerr(format!("unknown spectrum.kind {other:?}"))),
    }
    .map_err(core)?;
    Ok(s)
}

fn profile_from(flat: &mut Flat) -> CResult<GapProfile> {
    let key = "weights.params.profile";
    match flat.raw(key) {
        Some(Value::Array(_)) => Ok(GapProfile::List(flat.floats(key, &[])?)),
        Some(Value::String(_)) | None => {
            let level = flat.float("weights.params.level", 1.0)?;
            match flat.string(key, "invlog")?.as_str() {
                "invlog" => Ok(GapProfile::InvLog { level }),
                "constant" => Ok(GapProfile::Constant { level }),
                other => Err(cerr(format!(
                    "{key}: expected invlog, constant or a list, got {other:?}"
                ))),
            }
        }
        Some(v) => Err(cerr(format!("{key}: expected a string or a list, got {v}"))),
    }
}

fn weights_from(flat: &mut Flat) -> CResult<WeightSequence> {
    let kind = flat
        .string_opt("weights.kind")?
        .ok_or_else(|| cerr("weights.kind is required when no scenario is named"))?;
    let w = match kind.as_str() {
        "zero" => Ok(WeightSequence::zero()),
        "power" => WeightSequence::power(flat.float("weights.params.alpha", 1.0)?),
        "sqrtlog-loglog" => WeightSequence::sqrtlog_loglog(flat.float("weights.params.a", 1.0)?),
        "log-power" => WeightSequence::log_power(flat.float("weights.params.a", 2.0)?),
        "gap-supported" => {
            let a = flat.float("weights.params.a", 2.0)?;
            let profile = profile_from(flat)?;
            let m_max = flat.usize_opt("weights.params.m_max")?;
            GapSupported::new(a, profile, m_max).map(WeightSequence::gap_supported)
        }
        "counterexample" => Ok(WeightSequence::counterexample()),
        "explicit" => WeightSequence::explicit(flat.floats("weights.params.values", &[])?),
        other => return Err(cerr(format!("unknown weights.kind {other:?}"))),
    }
    .map_err(core)?;
    match flat.float_opt("weights.params.scale")? {
        Some(f) => w.scaled(f).map_err(core),
        None => Ok(w),
    }
}

fn perturbation_from(flat: &mut Flat, seed: u64) -> CResult<PerturbationSource> {
    match flat.string("perturbation.source", "zero")?.as_str() {
        "zero" => Ok(PerturbationSource::Zero),
        "random" => Ok(PerturbationSource::Random {
            seed: flat.uint("perturbation.seed", seed)?,
        }),
        "file" => flat
            .string_opt("perturbation.file")?
            .map(|p| PerturbationSource::File(PathBuf::from(p)))
            .ok_or_else(|| cerr("perturbation.source = \"file\" needs perturbation.file")),
        other => Err(cerr(format!("unknown perturbation.source {other:?}"))),
    }
}

fn scenario_from(flat: &mut Flat, name: &str, seed: u64) -> CResult<ScenarioSpec> {
    for section in ["spectrum.", "weights.", "perturbation."] {
        if flat.has_prefix(section) {
            return Err(cerr(format!(
                "scenario.name is set, so {}* keys are not allowed (the scenario defines them)",
                section
            )));
        }
    }
    let kind: ScenarioKind = name.parse().map_err(core)?;
    let mut spec = ScenarioSpec::new(kind);
    for (k, v) in flat.under("scenario.params.") {
        spec.params.insert(
            k.clone(),
            param_string(&v).map_err(|e| cerr(format!("scenario.params.{k}: {e}")))?,
        );
    }
    if kind.defaults().iter().any(|d| d.0 == "seed") && !spec.params.contains_key("seed") {
        spec.params.insert("seed".into(), seed.to_string());
    }
    for (k, v) in spec.resolved().map_err(core)? {
        flat.note(&format!("scenario.params.{k}"), param_value(&v));
    }
    Ok(spec)
}

fn sweep_from(flat: &mut Flat) -> CResult<SweepCfg> {
    let mut axes = Vec::new();
    for (k, v) in flat.under("sweep.grid.") {
        let values = match &v {
            Value::Array(a) => a.iter().map(param_string).collect::<CResult<Vec<_>>>()?,
            other => {
                return Err(cerr(format!(
                    "sweep.grid.{k}: expected a list, got {other}"
                )))
            }
        };
        flat.note(
            &format!("sweep.grid.{k}"),
            Value::Array(values.iter().map(|s| param_value(s)).collect()),
        );
        axes.push((k, values));
    }
    let table = match flat.string("sweep.table", "g")?.as_str() {
        "g" => SweepTable::G,
        "g0" => SweepTable::G0,
        "g_tilde" => SweepTable::GTilde,
        other => {
            return Err(cerr(format!(
                "sweep.table: expected g, g0 or g_tilde, got {other:?}"
            )))
        }
    };
    let lo = flat.uint("sweep.lo", 6)?;
    let hi = flat.uint("sweep.hi", 20)?;
    if lo > hi || hi > 26 {
        return Err(cerr(format!(
            "sweep.lo = {lo}, sweep.hi = {hi}: need lo <= hi <= 26"
        )));
    }
    let model = match flat.string("sweep.model", "power-log")?.as_str() {
        "power" => RateModel::Power,
        "power-log" => RateModel::PowerLog,
        "log-power" => RateModel::LogPower,
        other => {
            return Err(cerr(format!(
                "sweep.model: expected power, power-log or log-power, got {other:?}"
            )))
        }
    };
    let window_max = match flat.string("sweep.sample", "point")?.as_str() {
        "point" => false,
        "window-max" => true,
        other => {
            return Err(cerr(format!(
                "sweep.sample: expected point or window-max, got {other:?}"
            )))
        }
    };
    Ok(SweepCfg {
        axes,
        table,
        lo: lo as u32,
        hi: hi as u32,
        model,
        window_max,
    })
}

fn criteria_from(flat: &mut Flat) -> CResult<CriteriaParams> {
    let d = CriteriaParams::default();
    let p = CriteriaParams {
        epsilon: flat.float("criteria.epsilon", d.epsilon)?,
        horizon: flat.usize("criteria.horizon", d.horizon)?,
        depth: flat.usize_opt("criteria.depth")?,
        schatten_ps: flat.floats("criteria.schatten_ps", &d.schatten_ps)?,
        fast_route: flat.boolean("criteria.fast_route", d.fast_route)?,
        gtilde_depth: flat.usize("criteria.gtilde_depth", d.gtilde_depth)?,
        gtilde_n1: flat.usize("criteria.gtilde_n1", d.gtilde_n1)?,
        box_search: flat.boolean("criteria.box_search", d.box_search)?,
    };
    p.validate().map_err(core)?;
    Ok(p)
}

fn spectral_from(flat: &mut Flat, seed: u64) -> CResult<SpectralCfg> {
    let manual = match (
        flat.usize_opt("spectral.n0")?,
        flat.float_opt("spectral.h1")?,
        flat.float_opt("spectral.h2")?,
    ) {
        (Some(n0), Some(h1), Some(h2)) => Some((n0, h1, h2)),
        (None, None, None) => None,
        _ => return Err(cerr("spectral.n0, spectral.h1 and spectral.h2 go together")),
    };
    let cfg = SpectralCfg {
        size: flat.usize_opt("spectral.size")?,
        buffer: flat.usize_opt("spectral.buffer")?,
        quad_nodes: flat.usize("spectral.quad_nodes", 64)?,
        draws: flat.usize("spectral.draws", 20)?,
        seed: flat.uint("spectral.seed", seed)?,
        n_start: flat.usize_opt("spectral.n_start")?,
        contour_samples: flat.usize("spectral.contour_samples", 3)?,
        tolerance: flat.float("spectral.tolerance", 1e-8)?,
        manual,
    };
    if cfg.quad_nodes < 4 {
        return Err(cerr("spectral.quad_nodes must be at least 4"));
    }
    if !(cfg.tolerance > 0.0) {
        return Err(cerr("spectral.tolerance must be positive"));
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn resolve(mut flat: Flat) -> CResult<Self> {
        let seed = flat.uint("seed", 0)?;
        let source = match flat.string_opt("scenario.name")? {
            Some(name) => Source::Scenario(scenario_from(&mut flat, &name, seed)?),
            None => {
                if flat.has_prefix("scenario.") {
                    return Err(cerr("scenario.params.* given without scenario.name"));
                }
                let spectrum = spectrum_from(&mut flat)?;
                let weights = weights_from(&mut flat)?;
                let perturbation = perturbation_from(&mut flat, seed)?;
                let label = format!(
                    "spectrum {}, weights {}",
                    flat.string("spectrum.kind", "linear")?,
                    flat.string("weights.kind", "")?
                );
                Source::Explicit {
                    label,
                    spectrum,
                    weights,
                    perturbation,
                }
            }
        };
        let criteria = criteria_from(&mut flat)?;
        let mut spectral = spectral_from(&mut flat, seed)?;
        if let Source::Scenario(spec) = &source {
            spectral.size = spectral.size.or(spec.truncation.size);
        }
        let sweep = sweep_from(&mut flat)?;
        // the run directory is where the echo goes, not part of the run
        let out = match flat.raw("output.dir") {
            None => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(v) => return Err(cerr(format!("output.dir: expected a string, got {v}"))),
        };
        flat.finish()?;
        let source = match source {
            Source::Scenario(mut spec) => {
                spec.truncation = Truncation {
                    size: spectral.size,
                    buffer: spectral.buffer,
                    ..Truncation::default()
                };
                Source::Scenario(spec)
            }
            s => s,
        };
        Ok(Self {
            source,
            criteria,
            spectral,
            sweep,
            out,
            echo: flat.echo(),
        })
    }

    pub fn load(text: &str, overrides: &Overrides) -> CResult<Self> {
        let mut flat = Flat::parse(text)?;
        overrides.apply(&mut flat)?;
        Self::resolve(flat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_is_a_fixpoint() {
        let text = "scenario.name = \"power-alpha\"\nscenario.params.alpha = 0.30\ncriteria.epsilon = 0.2\n";
        let a = RunConfig::load(text, &Overrides::default()).unwrap();
        let b = RunConfig::load(&a.echo, &Overrides::default()).unwrap();
        assert_eq!(a.echo, b.echo);
        assert!(a
            .echo
            .contains("scenario.params.alpha = 2.9999999999999999e-1"));
        assert!(a.echo.contains("criteria.epsilon = 2.0000000000000001e-1"));
    }

    #[test]
    fn nested_tables_flatten_to_dotted_keys() {
        let text = "[weights]\nkind = \"power\"\nparams = { alpha = 0.5 }\n";
        let a = RunConfig::load(text, &Overrides::default()).unwrap();
        assert!(a
            .echo
            .contains("weights.params.alpha = 5.0000000000000000e-1"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::load(
            "weights.kind = \"zero\"\ncriteria.epsilom = 0.1\n",
            &Overrides::default(),
        )
        .unwrap_err();
        assert!(e.0.contains("criteria.epsilom"), "{e}");
    }

    #[test]
    fn scenario_excludes_explicit_sections() {
        let e = RunConfig::load(
            "scenario.name = \"counterexample\"\nweights.kind = \"zero\"\n",
            &Overrides::default(),
        )
        .unwrap_err();
        assert!(e.0.contains("weights."), "{e}");
    }

    #[test]
    fn overrides_win_and_seed_reaches_the_scenario() {
        let o = Overrides {
            scenario: Some("lnln-decay".into()),
            params: vec![("a".into(), "0.60".into())],
            seed: Some(7),
            epsilon: Some(0.05),
            ..Default::default()
        };
        let c = RunConfig::load("criteria.epsilon = 0.2\n", &o).unwrap();
        assert_eq!(c.criteria.epsilon, 0.05);
        match &c.source {
            Source::Scenario(s) => {
                assert_eq!(s.params["a"], "0.6");
                assert_eq!(s.params["seed"], "7");
            }
            _ => panic!("expected a scenario"),
        }
        assert_eq!(c.spectral.seed, 7);
    }

    #[test]
    fn partial_manual_box_is_rejected() {
        assert!(RunConfig::load(
            "weights.kind = \"zero\"\nspectral.n0 = 3\n",
            &Overrides::default()
        )
        .is_err());
    }
}
