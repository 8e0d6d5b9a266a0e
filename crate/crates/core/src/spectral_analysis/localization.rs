use std::collections::BTreeMap;

use super::eigen::Eigensystem;
use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::sequence_models::{Region, Spectrum};

/// Where each eigenvalue landed.
#[derive(Debug, Clone, PartialEq)]
pub struct Localization {
    /// One label per eigenpair (same order as the eigensystem):
    /// `box`, `disc:k`, `outside` or `excluded`.
    pub labels: Vec<String>,
    pub disc_counts: BTreeMap<usize, usize>,
    pub box_count: usize,
    pub outside: Vec<usize>,
    /// Eigenpairs with `Re lambda > mu_{size - buffer}`; left out of verdicts.
    pub excluded: Vec<usize>,
    pub edge: f64,
}

impl Localization {
    /// Disc indices holding other than exactly one eigenvalue.
    pub fn irregular_discs(&self) -> Vec<(usize, usize)> {
        self.disc_counts
            .iter()
            .filter(|(_, c)| **c != 1)
            .map(|(k, c)| (*k, *c))
            .collect()
    }
}

/// Classifies eigenvalues against the box and the discs; the first region
/// in `regions` that contains an eigenvalue wins.
pub fn localization_report(
    eigs: &Eigensystem,
    regions: &[Region],
    spec: &Spectrum,
    buffer: usize,
) -> Result<Localization> {
    let size = eigs.size();
    if buffer >= size {
        return Err(invalid(format!(
            "edge buffer {buffer} leaves nothing of size {size}"
        )));
    }
    let edge = spec.mu(size - buffer)?;
    let mut labels = Vec::with_capacity(size);
    let mut disc_counts: BTreeMap<usize, usize> = regions
        .iter()
        .filter_map(|r| match r {
            Region::Disc { index, center, .. } if *center <= edge => Some((*index, 0)),
            _ => None,
        })
        .collect();
    let (mut box_count, mut outside, mut excluded) = (0, Vec::new(), Vec::new());
    for (i, p) in eigs.pairs().iter().enumerate() {
        if p.lambda.re > edge {
            excluded.push(i);
            labels.push("excluded".to_string());
            continue;
        }
        match regions.iter().find(|r| r.contains(p.lambda)) {
            Some(Region::Box { .. }) => {
                box_count += 1;
                labels.push("box".to_string());
            }
            Some(r @ Region::Disc { index, .. }) => {
                *disc_counts.entry(*index).or_insert(0) += 1;
                labels.push(r.label());
            }
            None => {
                outside.push(i);
                labels.push("outside".to_string());
            }
        }
    }
    Ok(Localization {
        labels,
        disc_counts,
        box_count,
        outside,
        excluded,
        edge,
    })
}

/// 2-norm condition number of the unit right eigenvectors with sorted
/// indices in `window` (0-based, inclusive); clustered pairs are skipped.
/// Returns the condition number and the number of skipped pairs.
pub fn basis_condition_number(
    eigs: &Eigensystem,
    window: std::ops::RangeInclusive<usize>,
) -> Result<(f64, usize)> {
    let (lo, hi) = (*window.start(), *window.end());
    if hi >= eigs.pairs().len() || lo > hi {
        return Err(invalid(format!(
            "window {lo}..={hi} outside 0..{}",
            eigs.pairs().len()
        )));
    }
    let keep: Vec<usize> = (lo..=hi).filter(|&i| !eigs.pairs()[i].clustered).collect();
    let skipped = hi - lo + 1 - keep.len();
    if keep.is_empty() {
        return Err(invalid("every pair in the window is clustered"));
    }
    // columns of different components have disjoint supports, so the
    // singular values are those of the per-component pieces together
    let mut by_comp: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in &keep {
        by_comp
            .entry(eigs.pairs()[i].component)
            .or_default()
            .push(i);
    }
    let (mut hi_s, mut lo_s) = (0.0f64, f64::INFINITY);
    for (c, cols) in by_comp {
        let rows = eigs.components()[c].len();
        if cols.len() > rows {
            return Ok((f64::INFINITY, skipped));
        }
        let m = CMatrix::from_fn(rows, cols.len(), |r, k| eigs.pairs()[cols[k]].right[r]);
        let s = m.singular_values();
        hi_s = hi_s.max(s.max());
        lo_s = lo_s.min(s.min());
    }
    Ok((
        if lo_s == 0.0 {
            f64::INFINITY
        } else {
            hi_s / lo_s
        },
        skipped,
    ))
}

/// Sorted eigen-indices whose eigenvalue lies in the disc `Pi_k`.
pub fn pairs_in_disc(eigs: &Eigensystem, loc: &Localization, k: usize) -> Vec<usize> {
    let want = format!("disc:{k}");
    (0..eigs.pairs().len())
        .filter(|&i| loc.labels[i] == want)
        .collect()
}
