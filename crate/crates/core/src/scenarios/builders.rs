use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::operator_lab::{PerturbationMatrix, Storage};
use crate::sequence_models::{counter_t, GapProfile, GapSupported, Spectrum, WeightSequence};

/// `mu_n = n`, `omega_j = (log j)^{-1/2} (log log j)^{-a}`.
pub fn make_lnln(a: f64) -> Result<(Spectrum, WeightSequence)> {
    if !(a > 0.5) {
        return Err(invalid(format!("lnln-decay needs a > 1/2, got {a}")));
    }
    Ok((Spectrum::linear(), WeightSequence::sqrtlog_loglog(a)?))
}

/// Gap-supported weights on `b_m = floor(m^a)` plus the vanishing flag for
/// the profile (only checkable on the tested window).
pub fn make_gap_supported(
    a: f64,
    profile: GapProfile,
    m_max: Option<usize>,
) -> Result<(Spectrum, WeightSequence, bool)> {
    if !(a > 1.0) {
        return Err(invalid(format!(
            "gap-supported weights need a > 1, got {a}"
        )));
    }
    let g = GapSupported::new(a, profile, m_max)?;
    let flag = g.tends_to_zero();
    Ok((Spectrum::linear(), WeightSequence::gap_supported(g), flag))
}

/// `mu_n = n`, `omega_j = (log j)^{-a}`.
pub fn make_log_power(a: f64) -> Result<(Spectrum, WeightSequence)> {
    if !(a >= 1.0) {
        return Err(invalid(format!("log-power-fast needs a >= 1, got {a}")));
    }
    Ok((Spectrum::linear(), WeightSequence::log_power(a)?))
}

/// Tridiagonal perturbation with the certificate constant folded into the
/// weights.
#[derive(Debug, Clone)]
pub struct FiniteBand {
    pub perturbation: PerturbationMatrix,
    /// `omega * sqrt(C)`.
    pub weights: WeightSequence,
    /// Smallest `C` with `|<V e_m, e_n>| <= C min(omega_m^2, omega_n^2)`.
    pub c: f64,
}

/// `<V e_k, e_k> = b0[k]`, `<V e_{k+1}, e_k> = b_plus[k]`,
/// `<V e_k, e_{k+1}> = b_minus[k]` (slices 0-based, length `size` for `b0`
/// and `size - 1` for the off-diagonals).
pub fn make_finite_band(
    b_minus: &[f64],
    b0: &[f64],
    b_plus: &[f64],
    w: &WeightSequence,
) -> Result<FiniteBand> {
    let size = b0.len();
    if b_minus.len() + 1 != size.max(1) || b_plus.len() + 1 != size.max(1) {
        return Err(invalid(format!(
            "band lengths {}, {}, {} do not fit size {size}",
            b_minus.len(),
            b0.len(),
            b_plus.len()
        )));
    }
    let om2: Vec<f64> = (1..=size).map(|j| w.omega_sq(j)).collect();
    let mut op = CMatrix::zeros(size, size);
    let mut entries: Vec<(usize, usize, f64, i32)> = Vec::new();
    for k in 0..size {
        entries.push((k, k, b0[k], 0));
        if k + 1 < size {
            entries.push((k, k + 1, b_plus[k], 1));
            entries.push((k + 1, k, b_minus[k], -1));
        }
    }
    let mut c: f64 = 0.0;
    for &(row, col, b, j) in &entries {
        if b == 0.0 {
            continue;
        }
        let floor = om2[row].min(om2[col]);
        if floor == 0.0 {
            return Err(invalid(format!(
                "band entry b^({j})_{} = {b:e} sits where min(omega^2) = 0",
                row.min(col) + 1
            )));
        }
        c = c.max(b.abs() / floor);
        op[(row, col)] = Complex64::new(b, 0.0);
    }
    let weights = if c > 0.0 {
        w.clone().scaled(c.sqrt())?
    } else {
        w.clone()
    };
    let perturbation = PerturbationMatrix::from_operator_matrix(
        &op,
        Storage::Banded { bandwidth: 1 },
        weights.clone(),
    )?;
    Ok(FiniteBand {
        perturbation,
        weights,
        c,
    })
}

/// Block model: `V e_{2k-1} = -(t/2) e_{2k}`, `V e_{2k} = (t/2) e_{2k-1}`
/// with `t = s_k`, certified by `omega_k^2 = t_k / 2`.
pub fn make_counterexample(
    m_max: usize,
    size: usize,
) -> Result<(Spectrum, WeightSequence, PerturbationMatrix)> {
    if m_max == 0 {
        return Err(invalid("m_max must be at least 1"));
    }
    if size < 2 * m_max * m_max {
        return Err(invalid(format!(
            "size {size} below 2 m_max^2 = {} needed for block k = {}",
            2 * m_max * m_max,
            m_max * m_max
        )));
    }
    let w = WeightSequence::counterexample();
    let mut op = CMatrix::zeros(size, size);
    for k in 1..=size / 2 {
        let t = counter_t(2 * k);
        if t != 0.0 {
            let (a, b) = (2 * k - 2, 2 * k - 1);
            op[(b, a)] = Complex64::new(-t / 2.0, 0.0);
            op[(a, b)] = Complex64::new(t / 2.0, 0.0);
        }
    }
    let v =
        PerturbationMatrix::from_operator_matrix(&op, Storage::Banded { bandwidth: 1 }, w.clone())?;
    Ok((Spectrum::linear(), w, v))
}

/// `omega_j = j^{-alpha}` with a seeded dense real perturbation.
pub fn make_power_alpha(
    alpha: f64,
    size: usize,
    seed: u64,
) -> Result<(Spectrum, WeightSequence, PerturbationMatrix)> {
    let w = WeightSequence::power(alpha)?;
    let v = random_dense(&w, size, seed);
    Ok((Spectrum::linear(), w, v))
}

/// Dense real perturbation `omega_j omega_k U[-1, 1]` from a seeded ChaCha8.
pub fn random_dense(w: &WeightSequence, size: usize, seed: u64) -> PerturbationMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PerturbationMatrix::random(size, Storage::Dense, w.clone(), &mut rng)
}
