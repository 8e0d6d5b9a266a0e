use crate::error::{invalid, Result};

/// Decay model for `rate_fit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// `n^-beta`.
    Power,
    /// `n^-beta log n`.
    PowerLog,
    /// `(log n)^-beta`.
    LogPower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub beta: f64,
    pub intercept: f64,
    /// Root-mean-square residual in the transformed coordinates.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares decay exponent for samples `(n, value)`.
pub fn rate_fit(samples: &[(f64, f64)], model: RateModel) -> Result<RateFit> {
    if samples.len() < 8 {
        return Err(invalid(format!(
            "rate fit needs at least 8 samples, got {}",
            samples.len()
        )));
    }
    let min_n = match model {
        RateModel::Power => 0.0,
        RateModel::PowerLog => 1.0,
        RateModel::LogPower => std::f64::consts::E,
    };
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for &(n, v) in samples {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!(
                "sample at n = {n} has non-positive value {v}"
            )));
        }
        if !(n > min_n) {
            return Err(invalid(format!(
                "sample index n = {n} too small for the model"
            )));
        }
        let (x, y) = match model {
            RateModel::Power => (n.ln(), v.ln()),
            RateModel::PowerLog => (n.ln(), (v / n.ln()).ln()),
            RateModel::LogPower => (n.ln().ln(), v.ln()),
        };
        xs.push(x);
        ys.push(y);
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("rate fit samples share one abscissa"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(RateFit {
        beta: -slope,
        intercept,
        residual: (ss / k).sqrt(),
        points: xs.len(),
    })
}

/// Geometrically spaced sample points `2^lo, ..., 2^hi`.
pub fn dyadic_points(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|i| 1usize << i).collect()
}
