//! Reference patterns derived from a prognosis ensemble: the mean
//! trajectory, a fan of cross-sectional quantile lines, and a quantile line
//! of the trajectories' increments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::PrognosisEnsemble;

/// Quantile levels (percent) of the default fan: `0, 5, ..., 100`.
pub fn default_fan_levels() -> Vec<f64> {
    (0..=20).map(|k| 5.0 * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pattern {
    Mean {
        series: Vec<f64>,
    },
    /// `lines[k]` is the quantile line at `levels[k]` percent.
    QuantileFan {
        levels: Vec<f64>,
        lines: Vec<Vec<f64>>,
    },
    /// Quantile line of order `order` percent over the increments; one
    /// shorter than the trajectories.
    IncrementQuantileLine {
        order: f64,
        line: Vec<f64>,
    },
}

impl Pattern {
    /// Line of a fan at `level` percent, matched to within `1e-9`.
    pub fn fan_line(&self, level: f64) -> Option<&[f64]> {
        match self {
            Pattern::QuantileFan { levels, lines } => levels
                .iter()
                .position(|l| (l - level).abs() < 1e-9)
                .map(|k| lines[k].as_slice()),
            _ => None,
        }
    }
}

/// Quantile of order `q` percent of already sorted `sorted` values.
///
/// Plotting positions `(k - 0.5) / n` with linear interpolation between the
/// two order statistics that bracket `q / 100`. Orders below the first
/// position clamp to the minimum and above the last to the maximum.
pub fn quantile_of_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    let n = sorted.len();
    if n == 0 {
        return Err(Error::invalid_arg("quantile of an empty set"));
    }
    if !(0.0..=100.0).contains(&q) {
        return Err(Error::invalid_arg(format!(
            "quantile order {q} outside [0, 100]"
        )));
    }
    if q == 0.0 {
        return Ok(sorted[0]);
    }
    if q == 100.0 {
        return Ok(sorted[n - 1]);
    }
    let nf = n as f64;
    let p = q / 100.0;
    let position = |k: usize| (k as f64 - 0.5) / nf;

    // Largest k in 1..=n with position(k) < p.
    let mut k = ((nf * p + 0.5).ceil() as usize).min(n + 1);
    while k > 0 && position(k) >= p {
        k -= 1;
    }
    while k < n && position(k + 1) < p {
        k += 1;
    }
    if k == 0 {
        return Ok(sorted[0]);
    }
    if k == n {
        return Ok(sorted[n - 1]);
    }
    let lo = sorted[k - 1];
    let hi = sorted[k];
    let weight = (p - position(k)) / (position(k + 1) - position(k));
    Ok(lo + weight * (hi - lo))
}

pub fn sort_values(values: &mut [f64]) {
    values.sort_unstable_by(f64::total_cmp);
}

/// Empirical quantile of order `q` percent.
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    let mut sorted = values.to_vec();
    sort_values(&mut sorted);
    quantile_of_sorted(&sorted, q)
}

pub fn mean_pattern(ensemble: &PrognosisEnsemble) -> Pattern {
    let n = ensemble.n() as f64;
    let mut series = vec![0.0; ensemble.len()];
    for traj in ensemble.trajectories() {
        for (acc, v) in series.iter_mut().zip(traj) {
            *acc += v;
        }
    }
    for v in &mut series {
        *v /= n;
    }
    Pattern::Mean { series }
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::invalid_arg("no quantile levels given"));
    }
    if let Some(l) = levels.iter().find(|l| !(0.0..=100.0).contains(*l)) {
        return Err(Error::invalid_arg(format!(
            "quantile level {l} outside [0, 100]"
        )));
    }
    Ok(())
}

/// Quantile lines of the ensemble at each of `levels` (percent). Levels are
/// stored in ascending order.
pub fn quantile_fan(ensemble: &PrognosisEnsemble, levels: &[f64]) -> Result<Pattern> {
    check_levels(levels)?;
    let mut levels = levels.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let per_time: Vec<Vec<f64>> = (0..ensemble.len())
        .into_par_iter()
        .map(|j| {
            let mut col = ensemble.column(j);
            sort_values(&mut col);
            levels
                .iter()
                .map(|&q| quantile_of_sorted(&col, q))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let lines = (0..levels.len())
        .map(|k| per_time.iter().map(|row| row[k]).collect())
        .collect();
    Ok(Pattern::QuantileFan { levels, lines })
}

/// Forward differences `x[t+1] - x[t]`.
pub fn increments(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::invalid_arg(format!(
            "increments need at least 2 values, got {}",
            values.len()
        )));
    }
    Ok(values.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Quantile line of order `order` percent over the ensemble's increments.
pub fn increment_quantile_line(ensemble: &PrognosisEnsemble, order: f64) -> Result<Pattern> {
    check_levels(&[order])?;
    let incs = ensemble
        .trajectories()
        .iter()
        .map(|t| increments(t))
        .collect::<Result<Vec<_>>>()?;
    let len = ensemble.len() - 1;
    let line = (0..len)
        .into_par_iter()
        .map(|j| {
            let mut col: Vec<f64> = incs.iter().map(|s| s[j]).collect();
            sort_values(&mut col);
            quantile_of_sorted(&col, order)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Pattern::IncrementQuantileLine { order, line })
}
