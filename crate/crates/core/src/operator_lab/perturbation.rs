use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::CMatrix;
use crate::sequence_models::WeightSequence;

/// Absolute slack in `|v_jk| <= omega_j omega_k`.
pub const CERTIFICATE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    Dense,
    /// `v_jk = 0` whenever `|j - k| > bandwidth`.
    Banded {
        bandwidth: usize,
    },
}

/// Entries `v_jk = v(e_j, e_k)` of the perturbation form, certified
/// against `|v_jk| <= omega_j omega_k`.
#[derive(Debug, Clone)]
pub struct PerturbationMatrix {
    storage: Storage,
    /// `v[(j - 1, k - 1)] = v_jk`.
    v: CMatrix,
    weights: WeightSequence,
}

fn certify(v: &CMatrix, storage: Storage, w: &WeightSequence) -> Result<()> {
    let n = v.nrows();
    let om: Vec<f64> = (1..=n).map(|j| w.omega_unchecked(j)).collect();
    for j in 0..n {
        for k in 0..n {
            let x = v[(j, k)];
            if x.re.is_nan() || x.im.is_nan() {
                return Err(invalid(format!("entry ({}, {}) is NaN", j + 1, k + 1)));
            }
            let a = x.norm();
            if a == 0.0 {
                continue;
            }
            if let Storage::Banded { bandwidth } = storage {
                if j.abs_diff(k) > bandwidth {
                    return Err(invalid(format!(
                        "entry ({}, {}) lies outside bandwidth {bandwidth}",
                        j + 1,
                        k + 1
                    )));
                }
            }
            let bound = om[j] * om[k];
            if a > bound + CERTIFICATE_SLACK {
                return Err(Error::Certificate {
                    row: j + 1,
                    col: k + 1,
                    value: a,
                    bound,
                });
            }
        }
    }
    Ok(())
}

impl PerturbationMatrix {
    /// `v[(j - 1, k - 1)] = v_jk`; fails on the first certificate or band
    /// violation.
    pub fn from_dense(v: CMatrix, storage: Storage, weights: WeightSequence) -> Result<Self> {
        if v.nrows() != v.ncols() {
            return Err(invalid("perturbation matrix must be square"));
        }
        certify(&v, storage, &weights)?;
        Ok(Self {
            storage,
            v,
            weights,
        })
    }

    /// From 1-based `(j, k, v_jk)` triples; repeated positions overwrite.
    pub fn from_entries(
        size: usize,
        storage: Storage,
        entries: impl IntoIterator<Item = (usize, usize, Complex64)>,
        weights: WeightSequence,
    ) -> Result<Self> {
        let mut v = CMatrix::zeros(size, size);
        for (j, k, x) in entries {
            if j == 0 || k == 0 || j > size || k > size {
                return Err(Error::IndexOutOfRange {
                    index: j.max(k),
                    len: size,
                });
            }
            v[(j - 1, k - 1)] = x;
        }
        Self::from_dense(v, storage, weights)
    }

    /// From the operator matrix (column `l` is `V e_l`), i.e. the transpose
    /// of the `v_jk` array.
    pub fn from_operator_matrix(
        m: &CMatrix,
        storage: Storage,
        weights: WeightSequence,
    ) -> Result<Self> {
        Self::from_dense(m.transpose(), storage, weights)
    }

    pub fn zero(size: usize, weights: WeightSequence) -> Self {
        Self {
            storage: Storage::Banded { bandwidth: 0 },
            v: CMatrix::zeros(size, size),
            weights,
        }
    }

    /// Rank-one saturation `v_jk = omega_j omega_k`.
    pub fn saturated(size: usize, weights: WeightSequence) -> Self {
        let om: Vec<f64> = (1..=size).map(|j| weights.omega_unchecked(j)).collect();
        Self {
            storage: Storage::Dense,
            v: CMatrix::from_fn(size, size, |j, k| Complex64::new(om[j] * om[k], 0.0)),
            weights,
        }
    }

    /// Real entries `omega_j omega_k U[-1, 1]`, optionally banded.
    pub fn random<R: Rng + ?Sized>(
        size: usize,
        storage: Storage,
        weights: WeightSequence,
        rng: &mut R,
    ) -> Self {
        Self::random_with(size, storage, weights, rng, false)
    }

    /// Complex entries `omega_j omega_k u` with `u` uniform in the unit disc.
    pub fn random_complex<R: Rng + ?Sized>(
        size: usize,
        storage: Storage,
        weights: WeightSequence,
        rng: &mut R,
    ) -> Self {
        Self::random_with(size, storage, weights, rng, true)
    }

    fn random_with<R: Rng + ?Sized>(
        size: usize,
        storage: Storage,
        weights: WeightSequence,
        rng: &mut R,
        complex: bool,
    ) -> Self {
        let om: Vec<f64> = (1..=size).map(|j| weights.omega_unchecked(j)).collect();
        let mut v = CMatrix::zeros(size, size);
        for j in 0..size {
            for k in 0..size {
                if let Storage::Banded { bandwidth } = storage {
                    if j.abs_diff(k) > bandwidth {
                        continue;
                    }
                }
                let u = if complex {
                    let r = rng.random::<f64>().sqrt();
                    Complex64::from_polar(
                        r,
                        rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
                    )
                } else {
                    Complex64::new(rng.random_range(-1.0..=1.0), 0.0)
                };
                v[(j, k)] = u * om[j] * om[k];
            }
        }
        Self {
            storage,
            v,
            weights,
        }
    }

    pub fn size(&self) -> usize {
        self.v.nrows()
    }

    pub fn storage(&self) -> Storage {
        self.storage
    }

    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }

    /// `v_jk`, 1-based.
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.v[(j - 1, k - 1)]
    }

    /// Raw `v_jk` array (`(j - 1, k - 1)`).
    pub fn entries(&self) -> &CMatrix {
        &self.v
    }

    /// Matrix of the operator `V` in the basis: column `l` is `V e_l`, so
    /// entry `(m, l)` is `v_lm`.
    pub fn operator_matrix(&self, size: usize) -> CMatrix {
        CMatrix::from_fn(size, size, |m, l| self.v[(l, m)])
    }

    /// Leading `size x size` block.
    pub fn truncate(&self, size: usize) -> Result<Self> {
        if size > self.size() {
            return Err(Error::IndexOutOfRange {
                index: size,
                len: self.size(),
            });
        }
        Ok(Self {
            storage: self.storage,
            v: self.v.view((0, 0), (size, size)).into_owned(),
            weights: self.weights.clone(),
        })
    }

    /// Re-checks the certificate (used after deserialization or truncation).
    pub fn verify(&self) -> Result<()> {
        certify(&self.v, self.storage, &self.weights)
    }

    /// Text form: `size = N`, `storage = dense|banded`, optional
    /// `bandwidth = b`, then one `j k re im` row per nonzero entry.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "size = {}", self.size());
        match self.storage {
            Storage::Dense => {
                let _ = writeln!(s, "storage = dense");
            }
            Storage::Banded { bandwidth } => {
                let _ = writeln!(s, "storage = banded");
                let _ = writeln!(s, "bandwidth = {bandwidth}");
            }
        }
        for j in 0..self.size() {
            for k in 0..self.size() {
                let x = self.v[(j, k)];
                if x.re != 0.0 || x.im != 0.0 {
                    let _ = writeln!(s, "{} {} {:e} {:e}", j + 1, k + 1, x.re, x.im);
                }
            }
        }
        s
    }

    /// Parses [`to_text`](Self::to_text) output and certifies it against
    /// `weights`. Blank lines and `#` comments are ignored.
    pub fn from_text(text: &str, weights: WeightSequence) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let mut size = None;
        let mut storage = None;
        let mut bandwidth = None;
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((key, val)) = line.split_once('=') {
                if !entries.is_empty() {
                    return Err(perr(ln, "header after entries".into()));
                }
                let (key, val) = (key.trim(), val.trim());
                match key {
                    "size" => {
                        size = Some(
                            val.parse::<usize>()
                                .map_err(|e| perr(ln, format!("size: {e}")))?,
                        )
                    }
                    "storage" => {
                        storage = Some(match val {
                            "dense" => false,
                            "banded" => true,
                            _ => return Err(perr(ln, format!("unknown storage {val:?}"))),
                        })
                    }
                    "bandwidth" => {
                        bandwidth = Some(
                            val.parse::<usize>()
                                .map_err(|e| perr(ln, format!("bandwidth: {e}")))?,
                        )
                    }
                    _ => return Err(perr(ln, format!("unknown header key {key:?}"))),
                }
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 4 {
                return Err(perr(
                    ln,
                    format!("expected `j k re im`, got {} fields", tok.len()),
                ));
            }
            let j = tok[0]
                .parse::<usize>()
                .map_err(|e| perr(ln, format!("row index: {e}")))?;
            let k = tok[1]
                .parse::<usize>()
                .map_err(|e| perr(ln, format!("column index: {e}")))?;
            let re = tok[2]
                .parse::<f64>()
                .map_err(|e| perr(ln, format!("real part: {e}")))?;
            let im = tok[3]
                .parse::<f64>()
                .map_err(|e| perr(ln, format!("imaginary part: {e}")))?;
            entries.push((ln, j, k, Complex64::new(re, im)));
        }
        let size = size.ok_or_else(|| perr(0, "missing `size` header".into()))?;
        let storage = match (storage, bandwidth) {
            (Some(false), None) => Storage::Dense,
            (Some(false), Some(_)) => {
                return Err(perr(0, "bandwidth given for dense storage".into()))
            }
            (Some(true), Some(b)) => Storage::Banded { bandwidth: b },
            (Some(true), None) => return Err(perr(0, "banded storage needs `bandwidth`".into())),
            (None, _) => return Err(perr(0, "missing `storage` header".into())),
        };
        let mut v = CMatrix::zeros(size, size);
        for (ln, j, k, x) in entries {
            if j == 0 || k == 0 || j > size || k > size {
                return Err(perr(ln, format!("index ({j}, {k}) outside 1..={size}")));
            }
            v[(j - 1, k - 1)] = x;
        }
        Self::from_dense(v, storage, weights)
    }
}
