use nalgebra::DVector;
use num_complex::Complex64;

use super::eigen::Eigensystem;
use crate::error::{Error, Result};
use crate::linalg::{op_norm, CMatrix};

/// Spectral projection stored on a subset of basis indices.
#[derive(Debug, Clone)]
pub enum Projection {
    /// `(<., left> / pairing) right`.
    RankOne {
        support: Vec<usize>,
        right: DVector<Complex64>,
        left: DVector<Complex64>,
        pairing: Complex64,
    },
    /// Dense block on `support x support`, zero elsewhere.
    Block {
        support: Vec<usize>,
        matrix: CMatrix,
    },
}

/// Rank-one projection built from eigenpair `i`; fails for vanishing
/// pairing or a clustered eigenvalue.
pub fn riesz_projection_eig(eigs: &Eigensystem, i: usize) -> Result<Projection> {
    let p = &eigs.pairs()[i];
    if p.clustered {
        return Err(Error::Eigensolver(format!(
            "eigenvalue {} lies in a cluster; no rank-one projection",
            p.lambda
        )));
    }
    if p.pairing.norm() <= 1e3 * f64::EPSILON {
        return Err(Error::Eigensolver(format!(
            "eigenvalue {} has vanishing pairing {:e}; not diagonalizable",
            p.lambda,
            p.pairing.norm()
        )));
    }
    Ok(Projection::RankOne {
        support: eigs.components()[p.component].clone(),
        right: p.right.clone(),
        left: p.left.clone(),
        pairing: p.pairing,
    })
}

/// Sum of the rank-one projections of several unclustered eigenpairs, as a
/// block on the union of their supports.
pub fn sum_of_eig_projections(eigs: &Eigensystem, idx: &[usize]) -> Result<Projection> {
    let mut support: Vec<usize> = Vec::new();
    let mut parts = Vec::with_capacity(idx.len());
    for &i in idx {
        let p = riesz_projection_eig(eigs, i)?;
        support.extend_from_slice(p.support());
        parts.push(p);
    }
    support.sort_unstable();
    support.dedup();
    let mut matrix = CMatrix::zeros(support.len(), support.len());
    for p in &parts {
        let local = p.local_matrix();
        let pos: Vec<usize> = p
            .support()
            .iter()
            .map(|j| support.binary_search(j).expect("in union"))
            .collect();
        for (a, &ia) in pos.iter().enumerate() {
            for (b, &ib) in pos.iter().enumerate() {
                matrix[(ia, ib)] += local[(a, b)];
            }
        }
    }
    Ok(Projection::Block { support, matrix })
}

fn restrict(f: &DVector<Complex64>, support: &[usize]) -> DVector<Complex64> {
    DVector::from_iterator(support.len(), support.iter().map(|&i| f[i]))
}

impl Projection {
    /// Orthogonal projection onto `e_n` (1-based).
    pub fn coordinate(n: usize) -> Self {
        let one = DVector::from_element(1, Complex64::new(1.0, 0.0));
        Projection::RankOne {
            support: vec![n - 1],
            right: one.clone(),
            left: one,
            pairing: Complex64::new(1.0, 0.0),
        }
    }

    pub fn zero() -> Self {
        Projection::Block {
            support: Vec::new(),
            matrix: CMatrix::zeros(0, 0),
        }
    }

    pub fn support(&self) -> &[usize] {
        match self {
            Projection::RankOne { support, .. } | Projection::Block { support, .. } => support,
        }
    }

    /// Matrix on the support.
    pub fn local_matrix(&self) -> CMatrix {
        match self {
            Projection::RankOne {
                right,
                left,
                pairing,
                ..
            } => right * left.adjoint() / *pairing,
            Projection::Block { matrix, .. } => matrix.clone(),
        }
    }

    pub fn to_dense(&self, size: usize) -> CMatrix {
        let mut out = CMatrix::zeros(size, size);
        let local = self.local_matrix();
        let s = self.support();
        for (a, &i) in s.iter().enumerate() {
            for (b, &j) in s.iter().enumerate() {
                out[(i, j)] = local[(a, b)];
            }
        }
        out
    }

    pub fn norm(&self) -> f64 {
        match self {
            Projection::RankOne {
                right,
                left,
                pairing,
                ..
            } => right.norm() * left.norm() / pairing.norm(),
            Projection::Block { matrix, .. } => op_norm(matrix),
        }
    }

    /// Trace rounded to the nearest integer.
    pub fn rank(&self) -> usize {
        let tr = match self {
            Projection::RankOne {
                right,
                left,
                pairing,
                ..
            } => left.dotc(right) / *pairing,
            Projection::Block { matrix, .. } => matrix.trace(),
        };
        tr.re.round().max(0.0) as usize
    }

    /// `||P^2 - P||`.
    pub fn idempotency_residual(&self) -> f64 {
        match self {
            Projection::RankOne {
                left,
                right,
                pairing,
                ..
            } => self.norm() * (left.dotc(right) / *pairing - 1.0).norm(),
            Projection::Block { matrix, .. } => op_norm(&(matrix * matrix - matrix)),
        }
    }

    /// `<P f, f>` for a full-length `f`.
    pub fn quad_form(&self, f: &DVector<Complex64>) -> Complex64 {
        let fs = restrict(f, self.support());
        match self {
            Projection::RankOne {
                right,
                left,
                pairing,
                ..
            } => left.dotc(&fs) * fs.dotc(right) / *pairing,
            Projection::Block { matrix, .. } => fs.dotc(&(matrix * &fs)),
        }
    }

    /// `||P Q||` where both act on the full space.
    pub fn product_norm(&self, other: &Projection) -> f64 {
        let (s1, s2) = (self.support(), other.support());
        if s1.is_empty() || s2.is_empty() {
            return 0.0;
        }
        let mut union: Vec<usize> = s1.iter().chain(s2).copied().collect();
        union.sort_unstable();
        union.dedup();
        if union.len() == s1.len() + s2.len() {
            return 0.0;
        }
        match (self.embedded(&union), other.embedded(&union)) {
            (Embedded::RankOne(r1, l1, p1), Embedded::RankOne(r2, l2, p2)) => {
                l1.dotc(&r2).norm() * r1.norm() * l2.norm() / (p1 * p2).norm()
            }
            // B r l^H / p
            (Embedded::Dense(m), Embedded::RankOne(r, l, p)) => {
                (m * r).norm() * l.norm() / p.norm()
            }
            // r l^H B / p = r (B^H l)^H / p
            (Embedded::RankOne(r, l, p), Embedded::Dense(m)) => {
                r.norm() * (m.adjoint() * l).norm() / p.norm()
            }
            (Embedded::Dense(m1), Embedded::Dense(m2)) => op_norm(&(m1 * m2)),
        }
    }

    fn embedded(&self, union: &[usize]) -> Embedded {
        let pos: Vec<usize> = self
            .support()
            .iter()
            .map(|i| union.binary_search(i).unwrap())
            .collect();
        let n = union.len();
        let vec = |v: &DVector<Complex64>| {
            let mut out = DVector::zeros(n);
            for (&i, x) in pos.iter().zip(v.iter()) {
                out[i] = *x;
            }
            out
        };
        match self {
            Projection::RankOne {
                right,
                left,
                pairing,
                ..
            } => Embedded::RankOne(vec(right), vec(left), *pairing),
            Projection::Block { matrix, .. } => {
                let mut m = CMatrix::zeros(n, n);
                for (a, &i) in pos.iter().enumerate() {
                    for (b, &j) in pos.iter().enumerate() {
                        m[(i, j)] = matrix[(a, b)];
                    }
                }
                Embedded::Dense(m)
            }
        }
    }
}

enum Embedded {
    RankOne(DVector<Complex64>, DVector<Complex64>, Complex64),
    Dense(CMatrix),
}

/// `max_{j,k} ||P_j P_k - delta_jk P_j||`.
pub fn disjointness_residual(projs: &[Projection]) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, p) in projs.iter().enumerate() {
        worst = worst.max(p.idempotency_residual());
        for (k, q) in projs.iter().enumerate() {
            if j != k {
                worst = worst.max(p.product_norm(q));
            }
        }
    }
    worst
}

/// `sum_{n >= n_start} |<(P_n - P_n^0) f, f>|` with the per-`n` summands.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszSum {
    pub total: f64,
    pub summands: Vec<(usize, f64)>,
}

/// Pairs `projs_t[i]` with the `projs_a` entry of the same index `n`;
/// indices present in only one list use a zero projection for the other.
pub fn riesz_quadratic_sum(
    projs_t: &[(usize, Projection)],
    projs_a: &[(usize, Projection)],
    f: &DVector<Complex64>,
    n_start: usize,
) -> RieszSum {
    let mut idx: Vec<usize> = projs_t
        .iter()
        .chain(projs_a)
        .map(|p| p.0)
        .filter(|&n| n >= n_start)
        .collect();
    idx.sort_unstable();
    idx.dedup();
    let q = |list: &[(usize, Projection)], n: usize| {
        list.iter()
            .find(|p| p.0 == n)
            .map_or(Complex64::new(0.0, 0.0), |p| p.1.quad_form(f))
    };
    let summands: Vec<(usize, f64)> = idx
        .iter()
        .map(|&n| (n, (q(projs_t, n) - q(projs_a, n)).norm()))
        .collect();
    RieszSum {
        total: summands.iter().map(|s| s.1).sum(),
        summands,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_projections() {
        let p = Projection::coordinate(3);
        assert_eq!(p.rank(), 1);
        assert_eq!(p.norm(), 1.0);
        let d = p.to_dense(4);
        assert_eq!(d[(2, 2)], Complex64::new(1.0, 0.0));
        assert_eq!(d.iter().filter(|x| x.norm() != 0.0).count(), 1);
        let q = Projection::coordinate(2);
        assert_eq!(disjointness_residual(&[p.clone(), q]), 0.0);
        // duplicate detection
        assert!((disjointness_residual(&[p.clone(), p]) - 1.0).abs() < 1e-15);
    }
}
