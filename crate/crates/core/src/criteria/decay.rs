use super::verdicts::Verdict;
use crate::error::{invalid, Result};
use crate::sequence_models::WeightSequence;

/// Samples of `t_n log n` (`t_n = omega_n^2`) along dyadic `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayCheck {
    pub samples: Vec<(usize, f64)>,
    /// Maximum over the upper half of the samples.
    pub tail_max: f64,
    pub decreasing: bool,
    pub verdict: Verdict,
}

/// For monotone weights, summability of `omega_j^2 / j` forces
/// `t_n log n -> 0`; this checks that witness numerically.
pub fn monotone_l1_implies_decay_check(w: &WeightSequence, depth: usize) -> Result<DecayCheck> {
    if !w.is_monotone_decreasing() {
        return Err(invalid("weights are not monotone decreasing"));
    }
    let top = depth;
    let mut samples = Vec::new();
    let mut n = 2usize;
    while n <= top {
        samples.push((n, w.omega_sq(n) * (n as f64).ln()));
        n *= 2;
    }
    if samples.len() < 2 {
        return Err(invalid(format!(
            "depth {depth} leaves fewer than two dyadic samples"
        )));
    }
    let tail = &samples[samples.len() / 2..];
    let tail_max = tail.iter().map(|s| s.1).fold(0.0, f64::max);
    let decreasing = tail.windows(2).all(|p| p[1].1 <= p[0].1);
    let increasing = tail.windows(2).all(|p| p[1].1 > p[0].1);
    let verdict = if tail_max == 0.0 {
        Verdict::holds("t_n log n vanishes on the tested range")
    } else if tail.windows(2).all(|p| p[1].1 < p[0].1) {
        Verdict::holds(format!(
            "t_n log n strictly decreasing on the tail, max {tail_max:.6e}"
        ))
    } else if increasing {
        let (n, v) = *tail.last().unwrap();
        Verdict::fails(format!(
            "t_n log n increasing on the tail, reaches {v:.6e} at n = {n}"
        ))
    } else {
        Verdict::inconclusive("t_n log n neither monotone decreasing nor increasing on the tail")
    };
    Ok(DecayCheck {
        samples,
        tail_max,
        decreasing,
        verdict,
    })
}
