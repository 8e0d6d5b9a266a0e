use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::contour::{contour_projection, Contour};
use super::eigen::Eigensystem;
use super::localization::{
    basis_condition_number, localization_report, pairs_in_disc, Localization,
};
use super::projection::{
    disjointness_residual, riesz_projection_eig, riesz_quadratic_sum, sum_of_eig_projections,
    Projection,
};
use crate::error::{invalid, Result};
use crate::linalg::op_norm;
use crate::operator_lab::{build_truncated_t, PerturbationMatrix};
use crate::sequence_models::{regions, Region, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralParams {
    pub size: usize,
    /// Box index `N0`; discs start at `N0 + 1`.
    pub n0: usize,
    pub h1: f64,
    pub h2: f64,
    /// Top indices left out of verdicts; `None` means `size / 8`.
    pub buffer: Option<usize>,
    pub quad_nodes: usize,
    pub draws: usize,
    pub seed: u64,
    /// First index of the Riesz sums; `None` means `N0 + 1`.
    pub n_start: Option<usize>,
    /// Discs on which eigenvector and contour projections are compared.
    pub contour_samples: usize,
}

impl SpectralParams {
    pub fn new(size: usize, n0: usize, h1: f64, h2: f64) -> Self {
        Self {
            size,
            n0,
            h1,
            h2,
            buffer: None,
            quad_nodes: 64,
            draws: 20,
            seed: 0,
            n_start: None,
            contour_samples: 3,
        }
    }

    pub fn buffer(&self) -> usize {
        self.buffer.unwrap_or(self.size / 8)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenRow {
    pub index: usize,
    pub lambda: Complex64,
    pub region: String,
}

/// One spectral projection; `n = 0` is the box.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRow {
    pub n: usize,
    pub norm: f64,
    pub rank: usize,
    pub idem_residual: f64,
    pub method: &'static str,
}

/// Eigenvector formula vs quadrature on one disc.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementRow {
    pub n: usize,
    /// `||P_eig - P_contour||` at the full node count.
    pub eig_vs_contour: f64,
    /// `||P_contour(nodes) - P_contour(nodes / 2)||`.
    pub half_vs_full: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub params: SpectralParams,
    pub max_relative_residual: f64,
    pub eigenvalues: Vec<EigenRow>,
    pub localization: Localization,
    pub projections: Vec<ProjectionRow>,
    pub disjointness: f64,
    pub rank_sum: usize,
    pub rank_expected: usize,
    pub riesz_sums: Vec<(usize, f64)>,
    /// `2 ||f||^2` with unit `f`.
    pub riesz_bound: f64,
    /// Condition number of the disc eigenvectors and the number of
    /// clustered pairs skipped.
    pub condition_number: Option<(f64, usize)>,
    pub agreement: Vec<AgreementRow>,
}

impl SpectralReport {
    pub fn max_projection_norm(&self) -> f64 {
        self.projections
            .iter()
            .filter(|p| p.n > 0)
            .map(|p| p.norm)
            .fold(0.0, f64::max)
    }
}

fn projection_row(n: usize, p: &Projection, method: &'static str) -> ProjectionRow {
    ProjectionRow {
        n,
        norm: p.norm(),
        rank: p.rank(),
        idem_residual: p.idempotency_residual(),
        method,
    }
}

/// Unit vector with independent complex Gaussian entries.
pub fn random_unit_vector(size: usize, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
    let mut f = DVector::from_fn(size, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let n = f.norm();
    f /= Complex64::new(n, 0.0);
    f
}

/// Full diagnostic pass over the truncation `T_size`.
pub fn spectral_report(
    spec: &Spectrum,
    v: &PerturbationMatrix,
    params: &SpectralParams,
) -> Result<SpectralReport> {
    let size = params.size;
    let buffer = params.buffer();
    let last = size
        .checked_sub(buffer)
        .filter(|&l| l > params.n0)
        .ok_or_else(|| {
            invalid(format!(
                "no discs between N0 = {} and the edge buffer (size {size}, buffer {buffer})",
                params.n0
            ))
        })?;
    let t = build_truncated_t(spec, v, size)?;
    let eigs = Eigensystem::new(t.matrix())?;
    let regs = regions(spec, params.n0, params.h1, params.h2, last)?;
    // the edge sits at the right end of the last disc so that every kept
    // eigenvalue can be assigned
    let edge_buffer = size - last;
    let mut loc = localization_report(&eigs, &regs, spec, edge_buffer)?;
    let edge = spec.mu(last)? + spec.half_gap(last)?;
    loc.edge = edge;
    let mut excluded = Vec::new();
    for (i, p) in eigs.pairs().iter().enumerate() {
        if p.lambda.re > edge {
            excluded.push(i);
            loc.labels[i] = "excluded".to_string();
        } else if loc.labels[i] == "excluded" {
            loc.labels[i] = match regs.iter().find(|r| r.contains(p.lambda)) {
                Some(r @ Region::Disc { index, .. }) => {
                    *loc.disc_counts.entry(*index).or_insert(0) += 1;
                    r.label()
                }
                Some(Region::Box { .. }) => {
                    loc.box_count += 1;
                    "box".into()
                }
                None => {
                    loc.outside.push(i);
                    "outside".into()
                }
            };
        }
    }
    loc.outside.sort_unstable();
    loc.excluded = excluded;

    let eigenvalues = eigs
        .pairs()
        .iter()
        .enumerate()
        .map(|(i, p)| EigenRow {
            index: i + 1,
            lambda: p.lambda,
            region: loc.labels[i].clone(),
        })
        .collect();

    let mut projections = Vec::new();
    let mut all = Vec::new();
    let mut disc_projs = Vec::new();
    let box_contour = match regs[0] {
        Region::Box { h1, h2, right, .. } => Contour::Rect {
            re_lo: -h1,
            re_hi: right,
            im_lo: -h2,
            im_hi: h2,
        },
        _ => unreachable!("regions start with the box"),
    };
    let pbox = contour_projection(&eigs, &box_contour, params.quad_nodes)?;
    projections.push(projection_row(0, &pbox, "contour"));
    all.push(pbox);

    for k in (params.n0 + 1)..=last {
        let inside = pairs_in_disc(&eigs, &loc, k);
        let (p, method) = match inside.as_slice() {
            [] => (Projection::zero(), "empty"),
            [i] if !eigs.pairs()[*i].clustered => (riesz_projection_eig(&eigs, *i)?, "eig"),
            // several separated eigenvalues: the rank-one sum is exact
            many if many.iter().all(|&i| !eigs.pairs()[i].clustered) => {
                (sum_of_eig_projections(&eigs, many)?, "eig-sum")
            }
            _ => {
                let c = Contour::Circle {
                    center: Complex64::new(spec.mu(k)?, 0.0),
                    radius: spec.half_gap(k)?,
                };
                (contour_projection(&eigs, &c, params.quad_nodes)?, "contour")
            }
        };
        projections.push(projection_row(k, &p, method));
        disc_projs.push((k, p.clone()));
        all.push(p);
    }
    let disjointness = disjointness_residual(&all);
    let rank_sum = projections.iter().map(|p| p.rank).sum();
    // eigenvalues outside every region carry no projection
    let rank_expected = size - loc.excluded.len() - loc.outside.len();

    let n_start = params.n_start.unwrap_or(params.n0 + 1);
    let coords: Vec<(usize, Projection)> = ((params.n0 + 1)..=last)
        .map(|n| (n, Projection::coordinate(n)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let riesz_sums = (0..params.draws)
        .map(|d| {
            let f = random_unit_vector(size, &mut rng);
            (
                d,
                riesz_quadratic_sum(&disc_projs, &coords, &f, n_start).total,
            )
        })
        .collect();

    let disc_pairs: Vec<usize> = (0..eigs.pairs().len())
        .filter(|&i| loc.labels[i].starts_with("disc:"))
        .collect();
    let condition_number = match (disc_pairs.first(), disc_pairs.last()) {
        (Some(&a), Some(&b)) => basis_condition_number(&eigs, a..=b).ok(),
        _ => None,
    };

    let eig_discs: Vec<usize> = projections
        .iter()
        .filter(|p| p.method == "eig")
        .map(|p| p.n)
        .collect();
    let mut agreement = Vec::new();
    if params.contour_samples > 0 && !eig_discs.is_empty() {
        let step = (eig_discs.len() / params.contour_samples).max(1);
        for &k in eig_discs.iter().step_by(step).take(params.contour_samples) {
            let i = pairs_in_disc(&eigs, &loc, k)[0];
            let pe = riesz_projection_eig(&eigs, i)?.to_dense(size);
            let c = Contour::Circle {
                center: Complex64::new(spec.mu(k)?, 0.0),
                radius: spec.half_gap(k)?,
            };
            let full = contour_projection(&eigs, &c, params.quad_nodes)?.to_dense(size);
            let half = contour_projection(&eigs, &c, params.quad_nodes / 2)?.to_dense(size);
            agreement.push(AgreementRow {
                n: k,
                eig_vs_contour: op_norm(&(&pe - &full)),
                half_vs_full: op_norm(&(&full - &half)),
            });
        }
    }

    Ok(SpectralReport {
        params: params.clone(),
        max_relative_residual: eigs.max_relative_residual(),
        eigenvalues,
        localization: loc,
        projections,
        disjointness,
        rank_sum,
        rank_expected,
        riesz_sums,
        riesz_bound: 2.0,
        condition_number,
        agreement,
    })
}
