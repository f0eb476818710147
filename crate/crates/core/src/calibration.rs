//! Null calibration: prognoses and "actual" series are drawn from the same
//! degradation model, so the share of good verdicts at threshold `theta`
//! should come out near `100 - theta`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assessment::{validate_theta_grid, Reference};
use crate::degradation::{DegradationModel, DegradationParams};
use crate::error::{Error, Result};
use crate::metrics::{MetricConfig, MetricKind};
use crate::rng::child_seed;
use crate::series::Window;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Second,
    Third,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "second" | "2" => Ok(Regime::Second),
            "third" | "3" => Ok(Regime::Third),
            other => Err(Error::invalid_arg(format!("unknown regime '{other}'"))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Second => "second",
            Regime::Third => "third",
        })
    }
}

/// Splits `regime` into a leading training part holding `split` of its
/// samples (rounded to the nearest sample) and the trailing test part.
pub fn split_window(regime: Window, split: f64) -> Result<(Window, Window)> {
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::invalid_arg(format!("split {split} outside (0, 1)")));
    }
    let train_len = (split * regime.len() as f64).round() as usize;
    if train_len == 0 || train_len >= regime.len() {
        return Err(Error::invalid_arg(format!(
            "split {split} of {regime} leaves an empty training or test window"
        )));
    }
    let cut = regime.start + train_len;
    Ok((
        Window {
            start: regime.start,
            end: cut - 1,
        },
        Window {
            start: cut,
            end: regime.end,
        },
    ))
}

/// Training and test windows of one regime of the degradation model.
pub fn regime_window(
    params: &DegradationParams,
    regime: Regime,
    split: f64,
) -> Result<(Window, Window)> {
    params.validate()?;
    let span = match regime {
        Regime::Second => params.second_regime(),
        Regime::Third => params.third_regime(),
    };
    split_window(span, split)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSpec {
    pub params: DegradationParams,
    pub regime: Regime,
    pub split: f64,
    pub n_prognoses: usize,
    pub n_tests: usize,
    pub metrics: Vec<MetricKind>,
    pub theta_grid: Vec<f64>,
    pub master_seed: u64,
    /// Multiplies the model's noise scale; `0.0` makes every series the trend.
    pub noise_multiplier: f64,
    pub metric_config: MetricConfig,
}

impl CalibrationSpec {
    pub fn new(params: DegradationParams, regime: Regime, master_seed: u64) -> Self {
        Self {
            params,
            regime,
            split: 0.8,
            n_prognoses: 1000,
            n_tests: 1000,
            metrics: MetricKind::ALL.to_vec(),
            theta_grid: calibration_theta_grid(),
            master_seed,
            noise_multiplier: 1.0,
            metric_config: MetricConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::invalid_arg(format!(
                "split {} outside (0, 1)",
                self.split
            )));
        }
        if self.n_prognoses < 2 || self.n_tests < 2 {
            return Err(Error::invalid_arg(
                "n_prognoses and n_tests must both be at least 2",
            ));
        }
        if self.metrics.is_empty() {
            return Err(Error::invalid_arg("no metrics selected"));
        }
        validate_theta_grid(&self.theta_grid)
    }

    pub fn test_window(&self) -> Result<Window> {
        Ok(regime_window(&self.params, self.regime, self.split)?.1)
    }
}

/// Assessment scores of every null test series, per metric, in test order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullScores {
    pub window: Window,
    pub scores: BTreeMap<MetricKind, Vec<f64>>,
}

/// Percentage of good predictions per threshold (rows) and metric (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub theta_grid: Vec<f64>,
    pub metrics: Vec<MetricKind>,
    /// `percent[row][col]` for `theta_grid[row]` and `metrics[col]`.
    pub percent: Vec<Vec<f64>>,
}

impl CalibrationTable {
    pub fn get(&self, metric: MetricKind, theta: f64) -> Option<f64> {
        let col = self.metrics.iter().position(|&m| m == metric)?;
        let row = self
            .theta_grid
            .iter()
            .position(|t| (t - theta).abs() < 1e-9)?;
        Some(self.percent[row][col])
    }
}

/// Simulates one prognosis ensemble and `n_tests` independent actual series
/// on the test window and scores each actual series under each metric.
pub fn null_scores(spec: &CalibrationSpec) -> Result<NullScores> {
    spec.validate()?;
    let window = spec.test_window()?;
    let model = DegradationModel::new(spec.params)?.with_noise_multiplier(spec.noise_multiplier)?;

    let ensemble = model.simulate_ensemble(window, spec.n_prognoses, child_seed(spec.master_seed, 0))?;
    let references = spec
        .metrics
        .iter()
        .map(|&m| Reference::new(&ensemble, m, &spec.metric_config))
        .collect::<Result<Vec<_>>>()?;

    let test_master = child_seed(spec.master_seed, 1);
    let per_test: Vec<Vec<f64>> = (0..spec.n_tests)
        .into_par_iter()
        .map(|i| {
            let actual = model.simulate_trajectory(window, child_seed(test_master, i as u64))?;
            references
                .iter()
                .map(|r| r.score(&actual).map(|(_, s)| s.score))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let scores = spec
        .metrics
        .iter()
        .enumerate()
        .map(|(k, &m)| (m, per_test.iter().map(|row| row[k]).collect()))
        .collect();
    Ok(NullScores { window, scores })
}

/// Tabulates the share of null test series judged good at each threshold.
pub fn tabulate(scores: &NullScores, metrics: &[MetricKind], theta_grid: &[f64]) -> Result<CalibrationTable> {
    validate_theta_grid(theta_grid)?;
    let percent = theta_grid
        .iter()
        .map(|&theta| {
            metrics
                .iter()
                .map(|m| {
                    let s = scores
                        .scores
                        .get(m)
                        .ok_or_else(|| Error::invalid_arg(format!("no scores for {m}")))?;
                    let good = s.iter().filter(|&&v| v > theta).count();
                    Ok(100.0 * good as f64 / s.len() as f64)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CalibrationTable {
        theta_grid: theta_grid.to_vec(),
        metrics: metrics.to_vec(),
        percent,
    })
}

pub fn run_calibration(spec: &CalibrationSpec) -> Result<CalibrationTable> {
    let scores = null_scores(spec)?;
    tabulate(&scores, &spec.metrics, &spec.theta_grid)
}

/// Thresholds of the calibration tables, `10, 20, ..., 90`.
pub fn calibration_theta_grid() -> Vec<f64> {
    (1..=9).map(|k| 10.0 * k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_regime_windows() {
        let p = DegradationParams::reference();
        let (train, test) = regime_window(&p, Regime::Second, 0.8).unwrap();
        assert_eq!(train, Window::new(6001, 8400).unwrap());
        assert_eq!(test, Window::new(8401, 9000).unwrap());
        let (train, test) = regime_window(&p, Regime::Third, 0.8).unwrap();
        assert_eq!(train, Window::new(9001, 9800).unwrap());
        assert_eq!(test, Window::new(9801, 10000).unwrap());
    }

    #[test]
    fn half_split_of_ten_points() {
        let (train, test) = split_window(Window::new(11, 20).unwrap(), 0.5).unwrap();
        assert_eq!(train.len(), 5);
        assert_eq!(test.len(), 5);
        assert!(split_window(Window::new(1, 2).unwrap(), 0.9).is_err());
        assert!(split_window(Window::new(1, 10).unwrap(), 1.0).is_err());
    }

    #[test]
    fn zero_noise_ties_give_step_table() {
        let mut spec = CalibrationSpec::new(DegradationParams::reference(), Regime::Third, 3);
        spec.noise_multiplier = 0.0;
        spec.n_prognoses = 20;
        spec.n_tests = 10;
        spec.theta_grid = vec![10.0, 49.0, 50.0, 51.0, 90.0];
        let table = run_calibration(&spec).unwrap();
        for (row, theta) in table.theta_grid.iter().enumerate() {
            for v in &table.percent[row] {
                assert_eq!(*v, if *theta < 50.0 { 100.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn calibration_is_deterministic() {
        let mut spec = CalibrationSpec::new(DegradationParams::reference(), Regime::Third, 11);
        spec.n_prognoses = 50;
        spec.n_tests = 40;
        let a = run_calibration(&spec).unwrap();
        let b = run_calibration(&spec).unwrap();
        assert_eq!(a, b);
        for row in &a.percent {
            for v in row {
                assert!((0.0..=100.0).contains(v));
            }
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = CalibrationSpec::new(DegradationParams::reference(), Regime::Second, 1);
        for spec in [
            CalibrationSpec { split: 0.0, ..base.clone() },
            CalibrationSpec { n_tests: 1, ..base.clone() },
            CalibrationSpec { metrics: vec![], ..base.clone() },
            CalibrationSpec { theta_grid: vec![], ..base.clone() },
        ] {
            assert!(run_calibration(&spec).is_err());
        }
    }
}
