use std::fmt::Write as _;
use std::fs;

use rieszlab_core::criteria::{
    dyadic_points, evaluate, rate_fit, CriteriaReport, GTable, GTilde, RateModel, Status,
    DIRECT_WORK_LIMIT,
};
use rieszlab_core::operator_lab::PerturbationMatrix;
use rieszlab_core::scenarios::{
    build, build_models, random_dense, setup_for, ScenarioKind, SpectralSetup, DEFAULT_SIZE,
};
use rieszlab_core::sequence_models::{Spectrum, TailBound, WeightSequence};
use rieszlab_core::spectral_analysis::{spectral_report, SpectralReport};

use crate::config::{num, PerturbationSource, RunConfig, Source, SweepCfg, SweepTable};
use crate::output::{CliError, CliResult, Output};

/// Grids above this many cells are rejected.
pub const MAX_GRID_CELLS: usize = 10_000;

struct Problem {
    label: String,
    spectrum: Spectrum,
    weights: WeightSequence,
    perturbation: Option<PerturbationMatrix>,
    size: usize,
    buffer: usize,
    notes: Vec<String>,
}

fn problem(cfg: &RunConfig, with_v: bool) -> CliResult<Problem> {
    match &cfg.source {
        Source::Scenario(spec) => {
            let sc = build(spec)?;
            let params: Vec<String> = sc.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            Ok(Problem {
                label: format!("scenario {} ({})", sc.kind, params.join(", ")),
                spectrum: sc.spectrum,
                weights: sc.weights,
                perturbation: Some(sc.perturbation),
                size: sc.size,
                buffer: sc.buffer,
                notes: sc.notes,
            })
        }
        Source::Explicit {
            label,
            spectrum,
            weights,
            perturbation,
        } => {
            let v = match (with_v, perturbation) {
                (false, _) => None,
                (true, PerturbationSource::Zero) => Some(PerturbationMatrix::zero(
                    cfg.spectral.size.unwrap_or(DEFAULT_SIZE),
                    weights.clone(),
                )),
                (true, PerturbationSource::Random { seed }) => Some(random_dense(
                    weights,
                    cfg.spectral.size.unwrap_or(DEFAULT_SIZE),
                    *seed,
                )),
                (true, PerturbationSource::File(path)) => {
                    let text = fs::read_to_string(path).map_err(|e| {
                        CliError::Config(format!("perturbation.file {}: {e}", path.display()))
                    })?;
                    let v = PerturbationMatrix::from_text(&text, weights.clone())?;
                    if let Some(n) = cfg.spectral.size.filter(|&n| n != v.size()) {
                        return Err(CliError::Config(format!(
                            "spectral.size = {n} but {} has size {}",
                            path.display(),
                            v.size()
                        )));
                    }
                    Some(v)
                }
            };
            let size = v
                .as_ref()
                .map_or(cfg.spectral.size.unwrap_or(DEFAULT_SIZE), |v| v.size());
            Ok(Problem {
                label: label.clone(),
                spectrum: spectrum.clone(),
                weights: weights.clone(),
                perturbation: v,
                size,
                buffer: cfg.spectral.buffer.unwrap_or(size / 8),
                notes: Vec::new(),
            })
        }
    }
}

fn tail_cells(b: &TailBound) -> [String; 2] {
    [num(b.value), num(b.tail_upper)]
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn check_summary(label: &str, notes: &[String], r: &CriteriaReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "command = check");
    let _ = writeln!(s, "source = {label}");
    for n in notes {
        let _ = writeln!(s, "note = {n}");
    }
    let _ = writeln!(s, "horizon = {}", r.horizon);
    let _ = writeln!(s, "depth = {}", r.depth);
    let _ = writeln!(s, "epsilon = {}", num(r.params.epsilon));
    let _ = writeln!(s, "fast_route = {}", r.params.fast_route);
    let _ = writeln!(
        s,
        "rho_1 = {} (+ tail <= {}, {})",
        num(r.rho_1.value),
        num(r.rho_1.tail_upper),
        r.rho_1.method.name()
    );
    let _ = writeln!(s, "n0 = {}", opt(r.n0));
    let _ = writeln!(s, "n_star = {}", opt(r.n_star));
    let _ = writeln!(s, "n_epsilon = {}", opt(r.n_epsilon));
    match r.box_params {
        Some(b) => {
            let _ = writeln!(s, "box = h1 {} h2 {}", num(b.h1), num(b.h2));
        }
        None => {
            let _ = writeln!(s, "box = none");
        }
    }
    for (name, v) in r.verdicts.entries() {
        let _ = writeln!(s, "{name} = {}: {}", v.status, v.detail);
    }
    let _ = writeln!(s, "overall = {}", r.overall());
    s
}

fn exit_for(status: Status) -> u8 {
    match status {
        Status::Holds => 0,
        Status::Fails => 1,
        Status::Inconclusive => 2,
    }
}

fn write_criteria(out: &Output, r: &CriteriaReport) -> CliResult<()> {
    out.csv(
        "g_values.csv",
        &["n", "value", "tail_upper"],
        r.g_values.iter().map(|(n, b)| {
            let [v, t] = tail_cells(b);
            vec![n.to_string(), v, t]
        }),
    )?;
    out.csv(
        "sigma.csv",
        &["n", "value", "tail_upper", "argmax", "at_boundary"],
        r.sigma.iter().map(|s| {
            let [v, t] = tail_cells(&s.bound);
            vec![
                s.n.to_string(),
                v,
                t,
                s.argmax.to_string(),
                s.at_boundary.to_string(),
            ]
        }),
    )?;
    out.csv(
        "g_tilde.csv",
        &["k", "value", "tail_upper"],
        r.g_tilde.iter().map(|(k, b)| {
            let [v, t] = tail_cells(b);
            vec![k.to_string(), v, t]
        }),
    )?;
    out.csv(
        "schur.csv",
        &[
            "n",
            "k_n",
            "bound_m",
            "bound_m_prime",
            "rho_upper",
            "sigma_n_upper",
            "sigma_kn_upper",
            "tau_n",
        ],
        r.schur.iter().map(|b| {
            vec![
                b.n.to_string(),
                b.k_n.to_string(),
                num(b.bound_m),
                num(b.bound_m_prime),
                num(b.rho_n.upper()),
                num(b.sigma_n.bound.upper()),
                num(b.sigma_kn.bound.upper()),
                num(b.tau_n),
            ]
        }),
    )?;
    out.csv(
        "schatten.csv",
        &["p", "value", "tail_upper"],
        r.schatten.iter().map(|(p, b)| {
            let [v, t] = tail_cells(b);
            vec![num(*p), v, t]
        }),
    )
}

/// Runs the criteria pipeline; the exit code is the overall status.
pub fn cmd_check(cfg: &RunConfig) -> CliResult<u8> {
    let p = problem(cfg, false)?;
    let out = Output::open(cfg.out.as_deref(), &cfg.echo)?;
    let r = evaluate(&p.spectrum, &p.weights, &cfg.criteria)?;
    write_criteria(&out, &r)?;
    let summary = check_summary(&p.label, &p.notes, &r);
    out.text("summary.txt", &summary)?;
    print!("{summary}");
    Ok(exit_for(r.overall()))
}

struct Invariant {
    name: &'static str,
    value: f64,
    limit: f64,
}

impl Invariant {
    fn ok(&self) -> bool {
        self.value <= self.limit
    }
}

fn invariants(r: &SpectralReport, tol: f64, certified: bool) -> Vec<Invariant> {
    let idem = r
        .projections
        .iter()
        .map(|p| p.idem_residual / (1.0 + p.norm * p.norm))
        .fold(0.0, f64::max);
    let agree = r
        .agreement
        .iter()
        .map(|a| a.eig_vs_contour)
        .fold(0.0, f64::max);
    let mut v = vec![
        Invariant {
            name: "eigen_residual",
            value: r.max_relative_residual,
            limit: tol,
        },
        Invariant {
            name: "idempotency",
            value: idem,
            limit: tol,
        },
        Invariant {
            name: "disjointness",
            value: r.disjointness,
            limit: tol,
        },
        Invariant {
            name: "eig_vs_contour",
            value: agree,
            limit: tol,
        },
        Invariant {
            name: "rank_deficit",
            value: r.rank_sum.abs_diff(r.rank_expected) as f64,
            limit: 0.0,
        },
    ];
    // the disc count is a theorem only when the box is certified
    if certified {
        v.push(Invariant {
            name: "irregular_discs",
            value: (r.localization.irregular_discs().len() + r.localization.outside.len()) as f64,
            limit: 0.0,
        });
    }
    v
}

fn spectral_summary(
    label: &str,
    notes: &[String],
    setup: &SpectralSetup,
    origin: &str,
    r: &SpectralReport,
    inv: &[Invariant],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "command = spectral");
    let _ = writeln!(s, "source = {label}");
    for n in notes {
        let _ = writeln!(s, "note = {n}");
    }
    let _ = writeln!(s, "size = {}", r.params.size);
    let _ = writeln!(s, "buffer = {}", r.params.buffer());
    let _ = writeln!(s, "setup = {origin}");
    let _ = writeln!(s, "n0 = {}", setup.n0);
    let _ = writeln!(s, "h1 = {}", num(setup.h1));
    let _ = writeln!(s, "h2 = {}", num(setup.h2));
    let _ = writeln!(s, "box_count = {}", r.localization.box_count);
    let _ = writeln!(s, "outside = {}", r.localization.outside.len());
    let irr = r.localization.irregular_discs();
    let head: Vec<String> = irr
        .iter()
        .take(8)
        .map(|(k, c)| format!("{k}:{c}"))
        .collect();
    let _ = writeln!(s, "irregular_discs = {} [{}]", irr.len(), head.join(" "));
    let _ = writeln!(s, "max_projection_norm = {}", num(r.max_projection_norm()));
    let riesz_max = r.riesz_sums.iter().map(|x| x.1).fold(0.0, f64::max);
    let _ = writeln!(
        s,
        "riesz_sum_max = {} (bound {})",
        num(riesz_max),
        num(r.riesz_bound)
    );
    match r.condition_number {
        Some((c, skipped)) => {
            let _ = writeln!(
                s,
                "condition_number = {} (clustered skipped {skipped})",
                num(c)
            );
        }
        None => {
            let _ = writeln!(s, "condition_number = none");
        }
    }
    for i in inv {
        let _ = writeln!(
            s,
            "check.{} = {} {} (limit {})",
            i.name,
            if i.ok() { "ok" } else { "FAILED" },
            num(i.value),
            num(i.limit)
        );
    }
    let _ = writeln!(
        s,
        "overall = {}",
        if inv.iter().all(Invariant::ok) {
            "ok"
        } else {
            "failed"
        }
    );
    s
}

/// Eigensystem, localization, projections, Riesz sums and condition numbers.
/// Exit 0 when every numerical invariant holds, 1 otherwise.
pub fn cmd_spectral(cfg: &RunConfig) -> CliResult<u8> {
    let p = problem(cfg, true)?;
    let v = p.perturbation.as_ref().expect("perturbation requested");
    let out = Output::open(cfg.out.as_deref(), &cfg.echo)?;
    let (setup, origin) = match cfg.spectral.manual {
        Some((n0, h1, h2)) => (
            SpectralSetup {
                n0,
                h1,
                h2,
                certified: false,
            },
            "manual",
        ),
        None => {
            let r = evaluate(&p.spectrum, &p.weights, &cfg.criteria)?;
            let s = setup_for(&p.spectrum, p.size, p.buffer, &r);
            let origin = if s.certified {
                "certified"
            } else {
                "fallback (no certified N0 below the buffer)"
            };
            (s, origin)
        }
    };
    let mut sp = setup.params_for(p.size, p.buffer);
    sp.quad_nodes = cfg.spectral.quad_nodes;
    sp.draws = cfg.spectral.draws;
    sp.seed = cfg.spectral.seed;
    sp.n_start = cfg.spectral.n_start;
    sp.contour_samples = cfg.spectral.contour_samples;
    let r = spectral_report(&p.spectrum, v, &sp)?;

    out.csv(
        "eigenvalues.csv",
        &["index", "re", "im", "region"],
        r.eigenvalues.iter().map(|e| {
            vec![
                e.index.to_string(),
                num(e.lambda.re),
                num(e.lambda.im),
                e.region.clone(),
            ]
        }),
    )?;
    out.csv(
        "projections.csv",
        &["n", "norm", "rank", "idem_residual", "method"],
        r.projections.iter().map(|q| {
            vec![
                q.n.to_string(),
                num(q.norm),
                q.rank.to_string(),
                num(q.idem_residual),
                q.method.to_string(),
            ]
        }),
    )?;
    out.csv(
        "riesz_sums.csv",
        &["draw", "partial_sum"],
        r.riesz_sums
            .iter()
            .map(|(d, s)| vec![d.to_string(), num(*s)]),
    )?;
    out.csv(
        "localization.csv",
        &["region", "count"],
        std::iter::once(vec![
            "box".to_string(),
            r.localization.box_count.to_string(),
        ])
        .chain(
            r.localization
                .disc_counts
                .iter()
                .map(|(k, c)| vec![format!("disc:{k}"), c.to_string()]),
        ),
    )?;
    out.csv(
        "agreement.csv",
        &["n", "eig_vs_contour", "half_vs_full"],
        r.agreement
            .iter()
            .map(|a| vec![a.n.to_string(), num(a.eig_vs_contour), num(a.half_vs_full)]),
    )?;
    let inv = invariants(&r, cfg.spectral.tolerance, setup.certified);
    let summary = spectral_summary(&p.label, &p.notes, &setup, origin, &r, &inv);
    out.text("summary.txt", &summary)?;
    print!("{summary}");
    Ok(if inv.iter().all(Invariant::ok) { 0 } else { 1 })
}

fn model_name(m: RateModel) -> &'static str {
    match m {
        RateModel::Power => "power",
        RateModel::PowerLog => "power-log",
        RateModel::LogPower => "log-power",
    }
}

fn cells(axes: &[(String, Vec<String>)]) -> Vec<Vec<(String, String)>> {
    let mut out: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (k, vals) in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                vals.iter().map(move |v| {
                    let mut c = prefix.clone();
                    c.push((k.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    out
}

fn sweep_samples(
    spec: &Spectrum,
    w: &WeightSequence,
    sw: &SweepCfg,
) -> CliResult<Vec<(usize, TailBound)>> {
    let top = (1usize << sw.hi).min(spec.max_index().saturating_sub(1));
    if top < 2 {
        return Err(CliError::Config(
            "spectrum too short for the sweep window".into(),
        ));
    }
    let depth = 4 * top;
    if spec.affine_coefficients().is_none() && (top as f64) * (depth as f64) > DIRECT_WORK_LIMIT {
        return Err(CliError::Config(format!(
            "direct summation of {top} x {depth} terms is too large; lower sweep.hi"
        )));
    }
    let last = match sw.table {
        SweepTable::GTilde => (top / 16).max(1),
        _ => top,
    };
    let value: Box<dyn Fn(usize) -> TailBound> = match sw.table {
        SweepTable::G | SweepTable::G0 => {
            let t = GTable::build(spec, w, top, depth)?;
            let g0 = sw.table == SweepTable::G0;
            Box::new(move |n| if g0 { t.g0(n) } else { t.g(n) })
        }
        SweepTable::GTilde => {
            let gt = GTilde::build(spec, w, top, depth)?;
            Box::new(move |k| gt.value(k, 2))
        }
    };
    Ok(dyadic_points(sw.lo, sw.hi)
        .into_iter()
        .filter(|&n| n <= last)
        .map(|n| {
            if !sw.window_max {
                return (n, value(n));
            }
            // sup over (n/2, n]
            let best = (n / 2 + 1..=n)
                .map(&value)
                .fold(None::<TailBound>, |acc, b| match acc {
                    Some(a) if a.value >= b.value => Some(a),
                    _ => Some(b),
                })
                .expect("non-empty window");
            (n, best)
        })
        .collect())
}

/// Long-format decay curves over a grid of one or two scenario parameters,
/// plus one rate fit per cell. No verdicts.
pub fn cmd_sweep(cfg: &RunConfig) -> CliResult<u8> {
    let sw = &cfg.sweep;
    let Source::Scenario(base) = &cfg.source else {
        return Err(CliError::Config("sweep needs scenario.name".into()));
    };
    if sw.axes.is_empty() || sw.axes.iter().any(|a| a.1.is_empty()) {
        return Err(CliError::Config(
            "empty grid: give sweep.grid.<param> = [values] or --grid K=V1,V2".into(),
        ));
    }
    if sw.axes.len() > 2 {
        return Err(CliError::Config(format!(
            "grid over {} parameters; at most two",
            sw.axes.len()
        )));
    }
    let n_cells = sw.axes.iter().map(|a| a.1.len()).product::<usize>();
    if n_cells > MAX_GRID_CELLS {
        return Err(CliError::Config(format!(
            "grid of {n_cells} cells exceeds {MAX_GRID_CELLS}"
        )));
    }
    let out = Output::open(cfg.out.as_deref(), &cfg.echo)?;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let mut summary = String::new();
    let _ = writeln!(summary, "command = sweep");
    let _ = writeln!(summary, "scenario = {}", base.kind);
    let _ = writeln!(summary, "model = {}", model_name(sw.model));
    let _ = writeln!(
        summary,
        "sample = {}",
        if sw.window_max { "window-max" } else { "point" }
    );
    for cell in cells(&sw.axes) {
        let mut spec = base.clone();
        for (k, v) in &cell {
            spec.params.insert(k.clone(), v.clone());
        }
        let label = cell
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        let (s, w) = build_models(&spec)?;
        let samples = sweep_samples(&s, &w, sw)?;
        for (n, b) in &samples {
            let [v, t] = tail_cells(b);
            rows.push(vec![label.clone(), n.to_string(), v, t]);
        }
        let pts: Vec<(f64, f64)> = samples.iter().map(|(n, b)| (*n as f64, b.value)).collect();
        match rate_fit(&pts, sw.model) {
            Ok(f) => {
                let _ = writeln!(
                    summary,
                    "fit {label}: beta {} residual {} points {}",
                    num(f.beta),
                    num(f.residual),
                    f.points
                );
                fits.push(vec![
                    label.clone(),
                    model_name(sw.model).to_string(),
                    num(f.beta),
                    num(f.intercept),
                    num(f.residual),
                    f.points.to_string(),
                ]);
            }
            Err(e) => {
                let _ = writeln!(summary, "fit {label}: {e}");
            }
        }
    }
    if out.is_dir() {
        out.csv("sweep.csv", &["param", "n_or_k", "value", "tail"], rows)?;
        out.csv(
            "fits.csv",
            &["param", "model", "beta", "intercept", "residual", "points"],
            fits,
        )?;
        out.text("summary.txt", &summary)?;
        print!("{summary}");
    } else {
        let mut w = csv::Writer::from_writer(std::io::stdout());
        w.write_record(["param", "n_or_k", "value", "tail"])?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        eprint!("{summary}");
    }
    Ok(0)
}

pub fn cmd_scenario_list() -> u8 {
    for kind in ScenarioKind::ALL {
        let params: Vec<String> = kind
            .defaults()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        println!("{:<16} {}", kind.name(), kind.description());
        println!("{:<16} params: {}", "", params.join(" "));
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_are_the_cartesian_product_in_order() {
        let axes = vec![
            ("a".to_string(), vec!["1".to_string(), "2".to_string()]),
            (
                "b".to_string(),
                vec!["x".to_string(), "y".to_string(), "z".to_string()],
            ),
        ];
        let c = cells(&axes);
        assert_eq!(c.len(), 6);
        assert_eq!(
            c[0],
            vec![("a".into(), "1".into()), ("b".into(), "x".into())]
        );
        assert_eq!(
            c[5],
            vec![("a".into(), "2".into()), ("b".into(), "z".into())]
        );
    }
}
