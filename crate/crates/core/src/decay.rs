//! Power-law fits and weighted-supremum checks on norm series.

use crate::error::{Result, SqgError};
use crate::norms::{NormColumn, NormSeries};

/// Least-squares fit `value ≈ A t^α` on a log-log scale.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub t_a: f64,
    pub t_b: f64,
    pub alpha: f64,
    pub amplitude: f64,
    pub residual_rms: f64,
    pub samples: usize,
}

/// Minimum number of samples a fit window must contain.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Fits the column of `series` over samples with `t ∈ [t_a, t_b]`.
pub fn fit_decay_exponent(series: &NormSeries, column: NormColumn, window: (f64, f64)) -> Result<DecayFit> {
    fit_power_law(&series.times(), &series.column(column)?, window)
}

/// [`fit_decay_exponent`] on raw samples.
pub fn fit_power_law(times: &[f64], values: &[f64], (t_a, t_b): (f64, f64)) -> Result<DecayFit> {
    if !(t_a < t_b) {
        return Err(SqgError::Parameter(format!("empty window [{t_a}, {t_b}]")));
    }
    let picked: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t_a && **t <= t_b)
        .map(|(t, v)| (*t, *v))
        .collect();
    if picked.len() < MIN_FIT_SAMPLES {
        return Err(SqgError::Domain(format!(
            "window [{t_a}, {t_b}] holds {} samples, need {MIN_FIT_SAMPLES}",
            picked.len()
        )));
    }
    if let Some((t, v)) = picked.iter().find(|(t, v)| !(*t > 0.0 && *v > 0.0)) {
        return Err(SqgError::Domain(format!(
            "non-positive sample ({t}, {v}) in window; shrink the window"
        )));
    }
    let xs: Vec<f64> = picked.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = picked.iter().map(|(_, v)| v.ln()).collect();
    let count = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / count;
    let my = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(SqgError::Domain("all samples share one time".into()));
    }
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - alpha * x).powi(2))
        .sum();
    Ok(DecayFit {
        t_a,
        t_b,
        alpha,
        amplitude: intercept.exp(),
        residual_rms: (ss / count).sqrt(),
        samples: picked.len(),
    })
}

/// Which end of the time axis the bound is probed toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SingularEnd {
    /// Long-time bounds `sup_{t ≥ 1}`: the last decade is `[t_last/10, t_last]`.
    #[default]
    Late,
    /// Short-time smoothing bounds `sup_{0<t<T}`: the last decade is
    /// `[t_first, 10 t_first]`, the samples closest to `t → 0⁺`.
    Early,
}

/// Result of a weighted-supremum check.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundedness {
    pub sup: f64,
    pub t_at_sup: f64,
    /// The last time-decade toward the singular end raised the sup by < 1%.
    pub stabilized: bool,
}

/// Relative growth the last decade may add to the sup and still count as stable.
pub const STABILIZATION_TOLERANCE: f64 = 0.01;

/// `sup t^w · value` over all samples of `column`, and whether it stabilized.
pub fn check_boundedness(
    series: &NormSeries,
    weight_exponent: f64,
    column: NormColumn,
    end: SingularEnd,
) -> Result<Boundedness> {
    let times = series.times();
    let values = series.column(column)?;
    weighted_sup(&times, &values, |t| t.powf(weight_exponent), end)
}

/// Weighted supremum for an arbitrary weight function of time.
pub fn weighted_sup(
    times: &[f64],
    values: &[f64],
    weight: impl Fn(f64) -> f64,
    end: SingularEnd,
) -> Result<Boundedness> {
    if times.is_empty() || times.len() != values.len() {
        return Err(SqgError::Parameter("need matching, non-empty samples".into()));
    }
    let weighted: Vec<(f64, f64)> = times.iter().zip(values).map(|(t, v)| (*t, weight(*t) * v)).collect();
    let (t_at_sup, sup) = weighted
        .iter()
        .copied()
        .fold((times[0], f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let in_last_decade = |t: f64| match end {
        SingularEnd::Late => t >= times[times.len() - 1] / 10.0,
        SingularEnd::Early => t <= times[0] * 10.0,
    };
    let before = weighted
        .iter()
        .filter(|(t, _)| !in_last_decade(*t))
        .map(|(_, w)| *w)
        .fold(f64::NEG_INFINITY, f64::max);
    let stabilized =
        before.is_finite() && sup.is_finite() && sup <= before * (1.0 + STABILIZATION_TOLERANCE);
    Ok(Boundedness {
        sup,
        t_at_sup,
        stabilized,
    })
}

/// Cumulative trapezoid integral of `values` over `times`.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        if i > 0 {
            acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
        }
        out.push(acc);
    }
    out
}
