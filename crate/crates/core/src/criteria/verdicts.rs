use std::fmt;

use super::gtilde::GTilde;
use super::schur::{
    certified_n0, certified_n_star, schur_from_table, search_box, BoxParams, SchurBounds,
};
use super::tables::{GTable, SigmaValue};
use crate::error::{invalid, Result};
use crate::sequence_models::{schatten_sum, Spectrum, TailBound, TailMethod, WeightSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Holds,
    Inconclusive,
    Fails,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one criterion plus a human readable witness.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn holds(detail: impl Into<String>) -> Self {
        Self {
            status: Status::Holds,
            detail: detail.into(),
        }
    }

    pub fn fails(detail: impl Into<String>) -> Self {
        Self {
            status: Status::Fails,
            detail: detail.into(),
        }
    }

    pub fn inconclusive(detail: impl Into<String>) -> Self {
        Self {
            status: Status::Inconclusive,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaParams {
    pub epsilon: f64,
    /// Largest `n` at which `G(n)` is tabulated.
    pub horizon: usize,
    /// Inner summation depth; `None` means `4 * horizon`.
    pub depth: Option<usize>,
    pub schatten_ps: Vec<f64>,
    /// Whether the fast route verdicts count towards the exit status.
    pub fast_route: bool,
    /// Outer depth of the `G~` sums (inner depth is four times this).
    pub gtilde_depth: usize,
    pub gtilde_n1: usize,
    /// Skip the `h1`, `h2` box search.
    pub box_search: bool,
}

impl Default for CriteriaParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            horizon: 1_000_000,
            depth: None,
            schatten_ps: vec![1.0, 2.0, 4.0],
            fast_route: false,
            gtilde_depth: 1 << 16,
            gtilde_n1: 2,
            box_search: true,
        }
    }
}

impl CriteriaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.horizon < 2 {
            return Err(invalid("horizon must be at least 2"));
        }
        if self.depth.is_some_and(|d| d < self.horizon) {
            return Err(invalid("depth must be at least the horizon"));
        }
        if self.schatten_ps.iter().any(|p| !(*p > 0.0)) {
            return Err(invalid("Schatten exponents must be positive"));
        }
        if self.gtilde_n1 < 2 {
            return Err(invalid("N1 must be at least 2"));
        }
        Ok(())
    }
}

/// Per-criterion verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdicts {
    pub summable: Verdict,
    pub schatten_ok: Verdict,
    pub g_decays: Verdict,
    pub g_tilde_bounded: Verdict,
    pub fast_route_available: Verdict,
}

impl Verdicts {
    pub fn entries(&self) -> [(&'static str, &Verdict); 5] {
        [
            ("summable", &self.summable),
            ("schatten_ok", &self.schatten_ok),
            ("g_decays", &self.g_decays),
            ("g_tilde_bounded", &self.g_tilde_bounded),
            ("fast_route_available", &self.fast_route_available),
        ]
    }

    /// Worst status among the verdicts that count: `fails` beats
    /// `inconclusive` beats `holds`.
    pub fn overall(&self, fast_route: bool) -> Status {
        let mut req = vec![&self.summable, &self.schatten_ok, &self.g_decays];
        if fast_route {
            req.push(&self.g_tilde_bounded);
            req.push(&self.fast_route_available);
        }
        req.iter().map(|v| v.status).max().unwrap_or(Status::Holds)
    }
}

#[derive(Debug, Clone)]
pub struct CriteriaReport {
    pub params: CriteriaParams,
    /// Horizon actually used (capped for finite spectra).
    pub horizon: usize,
    pub depth: usize,
    pub rho_1: TailBound,
    pub schatten: Vec<(f64, TailBound)>,
    pub g_values: Vec<(usize, TailBound)>,
    pub sigma: Vec<SigmaValue>,
    pub g_tilde: Vec<(usize, TailBound)>,
    pub schur: Vec<SchurBounds>,
    pub n0: Option<usize>,
    pub n_star: Option<usize>,
    pub box_params: Option<BoxParams>,
    /// Smallest `N` with certified `sigma_N < epsilon`.
    pub n_epsilon: Option<usize>,
    pub verdicts: Verdicts,
}

impl CriteriaReport {
    pub fn overall(&self) -> Status {
        self.verdicts.overall(self.params.fast_route)
    }
}

/// Rows reported: every `n <= 128`, then ratio `2^(1/16)` up to the horizon.
pub fn sample_rows(horizon: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = (1..=horizon.min(128)).collect();
    let mut x = 128.0f64;
    let r = 2f64.powf(1.0 / 16.0);
    loop {
        x *= r;
        let n = x.round() as usize;
        if n >= horizon {
            break;
        }
        if n > *rows.last().unwrap() {
            rows.push(n);
        }
    }
    if *rows.last().unwrap() != horizon {
        rows.push(horizon);
    }
    rows
}

/// Largest direct-summation workload (`horizon * depth`) allowed for
/// spectra without an FFT path.
pub const DIRECT_WORK_LIMIT: f64 = 4e9;

fn summable_verdict(rho: &TailBound) -> Verdict {
    match rho.method {
        TailMethod::Divergent => Verdict::fails(format!(
            "sum omega_j^2 / mu_j diverges (partial sum {:.6e})",
            rho.value
        )),
        TailMethod::Unbounded => Verdict::inconclusive(format!(
            "partial sum {:.6e}, no closed-form tail",
            rho.value
        )),
        m => Verdict::holds(format!(
            "sum omega_j^2 / mu_j in [{:.6e}, {:.6e}] ({})",
            rho.value,
            rho.upper(),
            m.name()
        )),
    }
}

fn schatten_verdict(rows: &[(f64, TailBound)]) -> Verdict {
    match rows.iter().find(|(_, b)| b.is_finite()) {
        Some((p, b)) => Verdict::holds(format!("sum mu_n^-{p} <= {:.6e}", b.upper())),
        None => Verdict::inconclusive(format!(
            "no finite Schatten sum for p in {:?}",
            rows.iter().map(|r| r.0).collect::<Vec<_>>()
        )),
    }
}

/// `holds` on a certified `N_eps <= horizon / 2` (so a full dyadic window
/// is covered). `fails` when, over the last four complete dyadic windows,
/// every window maximum of the lower `G` is `>= epsilon` and either those
/// maxima or the maxima of the exact diagonal part `omega_n^2 / r_n` (itself
/// `>= epsilon`) are non-decreasing.
fn decay_verdict(table: &GTable, eps: f64) -> (Verdict, Option<usize>) {
    let h = table.horizon();
    if let Some(n) = (2..=h / 2).find(|&n| table.sigma(n).bound.upper() < eps) {
        let s = table.sigma(n);
        return (
            Verdict::holds(format!(
                "G(n) < {eps} for {n} <= n <= {h} (sigma_{n} <= {:.6e})",
                s.bound.upper()
            )),
            Some(n),
        );
    }
    // windows (lo, 2 lo]: a block {2m^2 - 1, 2m^2} with 2m^2 a power of two
    // stays inside one window
    let argmax = |lo: usize, f: &dyn Fn(usize) -> f64| {
        (lo + 1..=2 * lo)
            .map(|n| (n, f(n)))
            .fold(
                (lo, f64::NEG_INFINITY),
                |a, b| if b.1 >= a.1 { b } else { a },
            )
    };
    let mut g_max = Vec::new();
    let mut d_max = Vec::new();
    let mut lo = 2usize;
    while 2 * lo <= h {
        g_max.push(argmax(lo, &|n| table.g(n).value));
        d_max.push(argmax(lo, &|n| table.diag(n)));
        lo *= 2;
    }
    let k = g_max.len().saturating_sub(4);
    let (g_last, d_last) = (&g_max[k..], &d_max[k..]);
    let non_decreasing = |w: &[(usize, f64)]| w.windows(2).all(|p| p[1].1 >= p[0].1);
    if g_last.len() == 4 && g_last.iter().all(|w| w.1 >= eps) {
        let wit = if non_decreasing(g_last) {
            Some(("G", g_last))
        } else if d_last.iter().all(|w| w.1 >= eps) && non_decreasing(d_last) {
            Some(("omega^2/r", d_last))
        } else {
            None
        };
        if let Some((name, w)) = wit {
            let wit: Vec<String> = w
                .iter()
                .map(|(n, v)| format!("{name}({n}) >= {v:.6e}"))
                .collect();
            return (
                Verdict::fails(format!(
                    "fails at n = {}: no decay below {eps} ({})",
                    w[3].0,
                    wit.join(", ")
                )),
                None,
            );
        }
    }
    let s = table.sigma(2);
    let tail = table.sigma(h);
    (
        Verdict::inconclusive(format!(
            "no certified N_eps <= {} (G({h}) <= {:.6e}, sup attained at {}) and no non-decay witness",
            h / 2,
            tail.bound.upper(),
            s.argmax
        )),
        None,
    )
}

/// Evaluates every criterion for the pair `(spec, w)`.
pub fn evaluate(
    spec: &Spectrum,
    w: &WeightSequence,
    params: &CriteriaParams,
) -> Result<CriteriaReport> {
    params.validate()?;
    let horizon = params.horizon.min(spec.max_index().saturating_sub(1));
    if horizon < 2 {
        return Err(invalid("spectrum too short for a horizon of 2"));
    }
    let depth = params.depth.unwrap_or(4 * horizon).max(horizon);
    let affine = spec.affine_coefficients().is_some();
    let effective_depth = depth
        .min(spec.max_index())
        .min(w.support_end().map_or(usize::MAX, |e| e.max(horizon)));
    if !affine && (horizon as f64) * (effective_depth as f64) > DIRECT_WORK_LIMIT {
        return Err(invalid(format!(
            "direct summation of {horizon} x {effective_depth} terms is too large; lower the horizon or depth"
        )));
    }
    let table = GTable::build(spec, w, horizon, depth)?;

    let rho_1 = table.rho(1);
    let schatten: Vec<(f64, TailBound)> = params
        .schatten_ps
        .iter()
        .map(|&p| (p, schatten_sum(spec, p, table.depth())))
        .collect();

    let rows = sample_rows(horizon);
    let g_values = rows.iter().map(|&n| (n, table.g(n))).collect();
    let sigma = rows
        .iter()
        .filter(|&&n| n >= 2)
        .map(|&n| table.sigma(n))
        .collect();
    let schur = rows
        .iter()
        .filter(|&&n| n >= 2)
        .filter_map(|&n| schur_from_table(spec, &table, n).ok())
        .collect();

    let n0 = certified_n0(&table);
    let n_star = certified_n_star(spec, &table, horizon);
    let box_params = match (params.box_search, n0) {
        (true, Some(n0)) => search_box(spec, w, n0, table.depth()).ok(),
        _ => None,
    };

    let (g_decays, n_epsilon) = decay_verdict(&table, params.epsilon);

    let (gt_outer, gt_inner) = if affine {
        (params.gtilde_depth, 4 * params.gtilde_depth)
    } else {
        let o = params.gtilde_depth.min(4096);
        (o, 4 * o)
    };
    let gt = GTilde::build(spec, w, gt_outer.max(params.gtilde_n1 + 1), gt_inner)?;
    let mut g_tilde = Vec::new();
    let mut k = 1usize;
    while k <= (gt.outer() / 16).max(1) {
        g_tilde.push((k, gt.value(k, params.gtilde_n1)));
        k *= 2;
    }
    let g_tilde_bounded = gt.verdict(params.gtilde_n1);

    let summable = summable_verdict(&rho_1);
    let schatten_ok = schatten_verdict(&schatten);
    let fast_route_available = {
        let parts = [
            ("summable", &summable),
            ("g_decays", &g_decays),
            ("g_tilde_bounded", &g_tilde_bounded),
        ];
        let worst = parts.iter().map(|p| p.1.status).max().unwrap();
        let which: Vec<&str> = parts
            .iter()
            .filter(|p| p.1.status == worst)
            .map(|p| p.0)
            .collect();
        let detail = match worst {
            Status::Holds => "summable, G -> 0 and G~ bounded".to_string(),
            s => format!("{} {s}", which.join(", ")),
        };
        Verdict {
            status: worst,
            detail,
        }
    };

    Ok(CriteriaReport {
        params: params.clone(),
        horizon,
        depth: table.depth(),
        rho_1,
        schatten,
        g_values,
        sigma,
        g_tilde,
        schur,
        n0,
        n_star,
        box_params,
        n_epsilon,
        verdicts: Verdicts {
            summable,
            schatten_ok,
            g_decays,
            g_tilde_bounded,
            fast_route_available,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CriteriaParams {
        CriteriaParams {
            horizon: 1 << 14,
            gtilde_depth: 1 << 12,
            ..Default::default()
        }
    }

    #[test]
    fn status_order() {
        assert!(Status::Fails > Status::Inconclusive && Status::Inconclusive > Status::Holds);
    }

    #[test]
    fn rows_cover_range() {
        let r = sample_rows(10_000);
        assert_eq!(&r[..3], &[1, 2, 3]);
        assert_eq!(*r.last().unwrap(), 10_000);
        assert!(r.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn zero_weights_all_hold() {
        let r = evaluate(&Spectrum::linear(), &WeightSequence::zero(), &small()).unwrap();
        for (name, v) in r.verdicts.entries() {
            assert_eq!(v.status, Status::Holds, "{name}: {}", v.detail);
        }
        assert_eq!(r.n_epsilon, Some(2));
        assert_eq!(r.n0, Some(2));
    }

    #[test]
    fn counterexample_fails_decay() {
        let r = evaluate(
            &Spectrum::linear(),
            &WeightSequence::counterexample(),
            &small(),
        )
        .unwrap();
        assert_eq!(r.verdicts.summable.status, Status::Holds);
        assert_eq!(
            r.verdicts.g_decays.status,
            Status::Fails,
            "{}",
            r.verdicts.g_decays.detail
        );
        assert_eq!(r.overall(), Status::Fails);
    }

    #[test]
    fn power_weights_decay() {
        let w = WeightSequence::power(1.0).unwrap();
        let r = evaluate(&Spectrum::linear(), &w, &small()).unwrap();
        assert_eq!(
            r.verdicts.g_decays.status,
            Status::Holds,
            "{}",
            r.verdicts.g_decays.detail
        );
        assert!(r.n_epsilon.is_some());
    }
}
