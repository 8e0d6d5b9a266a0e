use nalgebra::{DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{op_norm, CMatrix};
use crate::operator_lab::TruncatedOperator;

/// Eigenvalues closer than this within one component are treated as a
/// possibly defective cluster.
pub const CLUSTER_TOL: f64 = 1e-6;

/// One eigenvalue with unit right and left eigenvectors, stored on the
/// support of its connected component.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: Complex64,
    pub component: usize,
    pub right: DVector<Complex64>,
    pub left: DVector<Complex64>,
    /// `<right, left> = left^H right`.
    pub pairing: Complex64,
    pub residual_right: f64,
    pub residual_left: f64,
    pub clustered: bool,
}

/// Eigensystem of a truncated operator, split along the connected
/// components of its sparsity graph.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    size: usize,
    norm: f64,
    components: Vec<Vec<usize>>,
    /// Per component: the block and its Schur factors `(Q, U)`, block = Q U Q^H.
    blocks: Vec<CMatrix>,
    schur: Vec<(CMatrix, CMatrix)>,
    pairs: Vec<EigenPair>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Index sets of the connected components of the graph with an edge
/// `i ~ j` whenever `m[(i, j)] != 0`.
pub fn components(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != Complex64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups.into_iter().filter(|g| !g.is_empty()).collect()
}

/// Right and left eigenvectors of an upper triangular `t` by
/// back- and forward-substitution; tiny pivots are replaced by `small`.
fn triangular_vectors(
    t: &CMatrix,
    i: usize,
    small: f64,
) -> (DVector<Complex64>, DVector<Complex64>) {
    let n = t.nrows();
    let lam = t[(i, i)];
    let pivot = |d: Complex64| {
        if d.norm() < small {
            Complex64::new(small, 0.0)
        } else {
            d
        }
    };

    let mut x = DVector::zeros(n);
    x[i] = Complex64::new(1.0, 0.0);
    for j in (0..i).rev() {
        let s: Complex64 = ((j + 1)..=i).map(|l| t[(j, l)] * x[l]).sum();
        x[j] = -s / pivot(t[(j, j)] - lam);
        let big = x[j].norm();
        if big > 1e100 {
            x /= Complex64::new(big, 0.0);
        }
    }

    // row vector y with y t = lam y
    let mut y = DVector::zeros(n);
    y[i] = Complex64::new(1.0, 0.0);
    for j in (i + 1)..n {
        let s: Complex64 = (i..j).map(|l| y[l] * t[(l, j)]).sum();
        y[j] = -s / pivot(t[(j, j)] - lam);
        let big = y[j].norm();
        if big > 1e100 {
            y /= Complex64::new(big, 0.0);
        }
    }
    (x, y)
}

type BlockResult = (Vec<EigenPair>, (CMatrix, CMatrix));

fn block_pairs(block: &CMatrix, comp: usize, norm: f64) -> Result<BlockResult> {
    let n = block.nrows();
    if n == 1 {
        let one = DVector::from_element(1, Complex64::new(1.0, 0.0));
        let factors = (CMatrix::identity(1, 1), block.clone());
        return Ok((
            vec![EigenPair {
                lambda: block[(0, 0)],
                component: comp,
                right: one.clone(),
                left: one,
                pairing: Complex64::new(1.0, 0.0),
                residual_right: 0.0,
                residual_left: 0.0,
                clustered: false,
            }],
            factors,
        ));
    }
    let schur = Schur::try_new(block.clone(), f64::EPSILON, 1000 * n).ok_or_else(|| {
        Error::Eigensolver(format!(
            "Schur iteration did not converge on a block of size {n}"
        ))
    })?;
    let (q, t) = schur.unpack();
    let small = (f64::EPSILON * norm).max(f64::MIN_POSITIVE);
    let adj = block.adjoint();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lam = t[(i, i)];
        let (x, y) = triangular_vectors(&t, i, small);
        let mut right = &q * x;
        // left satisfies block^H left = conj(lam) left
        let mut left = &q * y.conjugate();
        right /= Complex64::new(right.norm(), 0.0);
        left /= Complex64::new(left.norm(), 0.0);
        let residual_right = (block * &right - &right * lam).norm();
        let residual_left = (&adj * &left - &left * lam.conj()).norm();
        let clustered = (0..n).any(|k| k != i && (t[(k, k)] - lam).norm() < CLUSTER_TOL);
        out.push(EigenPair {
            lambda: lam,
            component: comp,
            pairing: left.dotc(&right),
            right,
            left,
            residual_right,
            residual_left,
            clustered,
        });
    }
    Ok((out, (q, t)))
}

impl Eigensystem {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidParameter(
                "eigensystem needs a nonempty square matrix".into(),
            ));
        }
        let components = components(m);
        let blocks: Vec<CMatrix> = components
            .iter()
            .map(|idx| m.select_rows(idx).select_columns(idx))
            .collect();
        // m is block diagonal up to a permutation
        let norm = blocks.iter().map(op_norm).fold(0.0, f64::max);
        let mut schur = Vec::with_capacity(components.len());
        let mut pairs = Vec::with_capacity(m.nrows());
        for (c, block) in blocks.iter().enumerate() {
            let (p, f) = block_pairs(block, c, norm)?;
            pairs.extend(p);
            schur.push(f);
        }
        pairs.sort_by(|a, b| {
            a.lambda
                .re
                .total_cmp(&b.lambda.re)
                .then(a.lambda.im.total_cmp(&b.lambda.im))
        });
        Ok(Self {
            size: m.nrows(),
            norm,
            components,
            blocks,
            schur,
            pairs,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `||T||`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Sorted by real part, then imaginary part.
    pub fn pairs(&self) -> &[EigenPair] {
        &self.pairs
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn block(&self, c: usize) -> &CMatrix {
        &self.blocks[c]
    }

    /// Schur factors `(Q, U)` of component `c`.
    pub fn schur(&self, c: usize) -> &(CMatrix, CMatrix) {
        &self.schur[c]
    }

    fn embed(&self, comp: usize, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.size);
        for (&i, x) in self.components[comp].iter().zip(v.iter()) {
            out[i] = *x;
        }
        out
    }

    pub fn right_full(&self, i: usize) -> DVector<Complex64> {
        let p = &self.pairs[i];
        self.embed(p.component, &p.right)
    }

    pub fn left_full(&self, i: usize) -> DVector<Complex64> {
        let p = &self.pairs[i];
        self.embed(p.component, &p.left)
    }

    /// Largest residual relative to `||T||` over all pairs.
    pub fn max_relative_residual(&self) -> f64 {
        let scale = self.norm.max(f64::MIN_POSITIVE);
        self.pairs
            .iter()
            .map(|p| p.residual_right.max(p.residual_left) / scale)
            .fold(0.0, f64::max)
    }
}

/// Eigenpairs of `T`, sorted by real part.
pub fn eigensystem(t: &TruncatedOperator) -> Result<Eigensystem> {
    Eigensystem::new(t.matrix())
}
