//! The assessment procedure: score the actual series against the spread of
//! metric values that the prognoses themselves achieve against the pattern,
//! then turn the score into good/bad verdicts over a grid of thresholds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, MetricConfig, MetricKind};
use crate::patterns::{
    empirical_quantile, increment_quantile_line, increments, mean_pattern, quantile_fan,
    quantile_of_sorted, sort_values, Pattern,
};
use crate::series::{PrognosisEnsemble, Trajectory, Window};

/// Thresholds (percent) of the standard decision table:
/// `1, 2, 3, 4, 5, 10, 20, ..., 90`.
pub fn default_theta_grid() -> Vec<f64> {
    [1, 2, 3, 4, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90]
        .into_iter()
        .map(f64::from)
        .collect()
}

pub fn validate_theta_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid_arg("threshold grid is empty"));
    }
    if let Some(t) = grid.iter().find(|t| !(**t > 0.0 && **t < 100.0)) {
        return Err(Error::invalid_arg(format!("threshold {t} outside (0, 100)")));
    }
    Ok(())
}

/// Builds the pattern `metric` compares against.
pub fn build_pattern(
    ensemble: &PrognosisEnsemble,
    metric: MetricKind,
    cfg: &MetricConfig,
) -> Result<Pattern> {
    match metric {
        MetricKind::Mse | MetricKind::Mape => Ok(mean_pattern(ensemble)),
        MetricKind::Sqif => {
            cfg.sqif.validate()?;
            quantile_fan(ensemble, &cfg.sqif.fan_levels)
        }
        MetricKind::KupiecPof => increment_quantile_line(ensemble, cfg.pof_order),
        MetricKind::KupiecTuff => {
            if ensemble.len() < 2 {
                return Err(Error::invalid_arg("TUFF needs at least 2 samples"));
            }
            let order = metrics::solve_tuff_order(ensemble.len() - 1)?;
            increment_quantile_line(ensemble, order.order)
        }
    }
}

/// Evaluates `metric` between `pattern` and one series of values.
pub fn evaluate_metric(
    metric: MetricKind,
    pattern: &Pattern,
    values: &[f64],
    cfg: &MetricConfig,
) -> Result<f64> {
    match (metric, pattern) {
        (MetricKind::Mse, Pattern::Mean { series }) => metrics::mse(series, values),
        (MetricKind::Mape, Pattern::Mean { series }) => {
            metrics::mape(series, values, cfg.mape_epsilon)
        }
        (MetricKind::Sqif, fan @ Pattern::QuantileFan { .. }) => {
            metrics::sqif(fan, values, &cfg.sqif)
        }
        (MetricKind::KupiecPof, line @ Pattern::IncrementQuantileLine { .. }) => {
            metrics::kupiec_pof(line, &increments(values)?)
        }
        (MetricKind::KupiecTuff, line @ Pattern::IncrementQuantileLine { .. }) => {
            metrics::kupiec_tuff(line, &increments(values)?)
        }
        _ => Err(Error::Config(format!(
            "{metric} cannot be evaluated against this pattern variant"
        ))),
    }
}

/// Metric value of every prognosis against the pattern built from the same
/// ensemble (each trajectory is part of its own reference).
pub fn metric_set(
    ensemble: &PrognosisEnsemble,
    metric: MetricKind,
    cfg: &MetricConfig,
) -> Result<Vec<f64>> {
    let pattern = build_pattern(ensemble, metric, cfg)?;
    metric_set_against(ensemble, metric, &pattern, cfg)
}

fn metric_set_against(
    ensemble: &PrognosisEnsemble,
    metric: MetricKind,
    pattern: &Pattern,
    cfg: &MetricConfig,
) -> Result<Vec<f64>> {
    ensemble
        .trajectories()
        .par_iter()
        .map(|t| evaluate_metric(metric, pattern, t, cfg))
        .collect()
}

/// Percentages of prognoses whose metric value is strictly worse (`gamma1`)
/// and worse or tied (`gamma2`) than the actual series, and their midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub gamma1: f64,
    pub gamma2: f64,
    pub score: f64,
}

impl Score {
    pub fn is_good(&self, theta: f64) -> bool {
        self.score > theta
    }
}

fn score_from_sorted(sorted: &[f64], m_w: f64) -> Score {
    let n = sorted.len();
    let below = sorted.partition_point(|&v| v < m_w);
    let at_or_below = sorted.partition_point(|&v| v <= m_w);
    let gamma1 = 100.0 * (n - at_or_below) as f64 / n as f64;
    let gamma2 = 100.0 * (n - below) as f64 / n as f64;
    Score {
        gamma1,
        gamma2,
        score: 0.5 * (gamma1 + gamma2),
    }
}

pub fn assessment_score(m_p: &[f64], m_w: f64) -> Result<Score> {
    if m_p.is_empty() {
        return Err(Error::invalid_arg("empty metric set"));
    }
    if m_w.is_nan() || m_p.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid_arg("metric values must not be NaN"));
    }
    let mut sorted = m_p.to_vec();
    sort_values(&mut sorted);
    Ok(score_from_sorted(&sorted, m_w))
}

/// Metric-set quantile at order `100 - theta`: the value the actual series
/// has to stay below to be accepted at threshold `theta`.
pub fn threshold_quantile(m_p: &[f64], theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 100.0) {
        return Err(Error::invalid_arg(format!(
            "threshold {theta} outside (0, 100)"
        )));
    }
    empirical_quantile(m_p, 100.0 - theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDecision {
    pub theta: f64,
    /// Metric-set quantile of order `100 - theta`.
    pub quantile: f64,
    pub good: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub n: usize,
    pub seed: Option<u64>,
    pub window: Window,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub metric: MetricKind,
    pub m_w: f64,
    pub m_p: Vec<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    pub score: f64,
    pub decisions: Vec<ThresholdDecision>,
    pub meta: ReportMeta,
}

impl AssessmentReport {
    pub fn theta_grid(&self) -> Vec<f64> {
        self.decisions.iter().map(|d| d.theta).collect()
    }

    pub fn decision_at(&self, theta: f64) -> Option<bool> {
        self.decisions
            .iter()
            .find(|d| (d.theta - theta).abs() < 1e-9)
            .map(|d| d.good)
    }
}

/// Pattern and metric set of one ensemble under one metric, ready to score
/// any number of actual series.
#[derive(Debug, Clone)]
pub struct Reference {
    metric: MetricKind,
    window: Window,
    pattern: Pattern,
    m_p: Vec<f64>,
    sorted: Vec<f64>,
    cfg: MetricConfig,
}

impl Reference {
    pub fn new(ensemble: &PrognosisEnsemble, metric: MetricKind, cfg: &MetricConfig) -> Result<Self> {
        let pattern = build_pattern(ensemble, metric, cfg)?;
        let m_p = metric_set_against(ensemble, metric, &pattern, cfg)?;
        let mut sorted = m_p.clone();
        sort_values(&mut sorted);
        Ok(Self {
            metric,
            window: ensemble.window(),
            pattern,
            m_p,
            sorted,
            cfg: cfg.clone(),
        })
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn metric_set(&self) -> &[f64] {
        &self.m_p
    }

    pub fn window(&self) -> Window {
        self.window
    }

    fn check_actual(&self, actual: &Trajectory) -> Result<()> {
        if actual.window() != self.window {
            return Err(Error::invalid_arg(format!(
                "actual series covers {}, ensemble window is {}",
                actual.window(),
                self.window
            )));
        }
        Ok(())
    }

    /// Metric value of the actual series against the pattern.
    pub fn actual_metric(&self, actual: &Trajectory) -> Result<f64> {
        self.check_actual(actual)?;
        evaluate_metric(self.metric, &self.pattern, &actual.values, &self.cfg)
    }

    pub fn score(&self, actual: &Trajectory) -> Result<(f64, Score)> {
        let m_w = self.actual_metric(actual)?;
        Ok((m_w, score_from_sorted(&self.sorted, m_w)))
    }

    pub fn report(
        &self,
        actual: &Trajectory,
        theta_grid: &[f64],
        seed: Option<u64>,
    ) -> Result<AssessmentReport> {
        validate_theta_grid(theta_grid)?;
        let (m_w, score) = self.score(actual)?;
        let decisions = theta_grid
            .iter()
            .map(|&theta| {
                Ok(ThresholdDecision {
                    theta,
                    quantile: quantile_of_sorted(&self.sorted, 100.0 - theta)?,
                    good: score.is_good(theta),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AssessmentReport {
            metric: self.metric,
            m_w,
            m_p: self.m_p.clone(),
            gamma1: score.gamma1,
            gamma2: score.gamma2,
            score: score.score,
            decisions,
            meta: ReportMeta {
                n: self.m_p.len(),
                seed,
                window: self.window,
            },
        })
    }
}

/// Runs the full procedure for one metric.
pub fn assess(
    ensemble: &PrognosisEnsemble,
    actual: &Trajectory,
    metric: MetricKind,
    theta_grid: &[f64],
    cfg: &MetricConfig,
) -> Result<AssessmentReport> {
    validate_theta_grid(theta_grid)?;
    if actual.window() != ensemble.window() {
        return Err(Error::invalid_arg(format!(
            "actual series covers {}, ensemble window is {}",
            actual.window(),
            ensemble.window()
        )));
    }
    Reference::new(ensemble, metric, cfg)?.report(actual, theta_grid, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ensemble(trajs: Vec<Vec<f64>>) -> PrognosisEnsemble {
        let len = trajs[0].len();
        PrognosisEnsemble::new(Window::new(1, len).unwrap(), trajs).unwrap()
    }

    #[test]
    fn metric_set_examples() {
        let same = ensemble(vec![vec![1.0, 2.0, 3.0]; 4]);
        assert_eq!(
            metric_set(&same, MetricKind::Mse, &MetricConfig::default()).unwrap(),
            vec![0.0; 4]
        );
        let two = ensemble(vec![vec![0.0, 0.0], vec![2.0, 2.0]]);
        assert_eq!(
            metric_set(&two, MetricKind::Mse, &MetricConfig::default()).unwrap(),
            vec![1.0, 1.0]
        );
        let wide = ensemble((0..7).map(|i| vec![i as f64 + 1.0, 2.0 * i as f64 + 1.0, 5.0]).collect());
        for m in MetricKind::ALL {
            assert_eq!(
                metric_set(&wide, m, &MetricConfig::default()).unwrap().len(),
                7
            );
        }
    }

    #[test]
    fn score_examples() {
        let s = assessment_score(&[1.0, 2.0, 3.0, 4.0], 2.5).unwrap();
        assert_eq!((s.gamma1, s.gamma2, s.score), (50.0, 50.0, 50.0));
        let s = assessment_score(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap();
        assert_eq!(s.score, 100.0);
        let s = assessment_score(&[5.0; 4], 5.0).unwrap();
        assert_eq!((s.gamma1, s.gamma2, s.score), (0.0, 100.0, 50.0));
        let s = assessment_score(&[1.0, 2.0, 3.0, 4.0], 10.0).unwrap();
        assert_eq!(s.score, 0.0);
        assert!(assessment_score(&[], 1.0).is_err());
    }

    #[test]
    fn threshold_quantile_examples() {
        let m_p: Vec<f64> = (1..=1000).map(f64::from).collect();
        // Order 10 on 1..=1000: k* = 100, weight 0.5.
        assert!((threshold_quantile(&m_p, 90.0).unwrap() - 100.5).abs() < 1e-9);
        assert!((threshold_quantile(&m_p, 50.0).unwrap() - 500.5).abs() < 1e-9);
        assert_eq!(threshold_quantile(&m_p, 1e-9).unwrap(), 1000.0);
        assert!(threshold_quantile(&m_p, 0.0).is_err());
        assert!(threshold_quantile(&m_p, 100.0).is_err());
    }

    #[test]
    fn perfect_prediction_is_good_below_its_score() {
        let trajs = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![2.0, 3.0]];
        let e = ensemble(trajs);
        let actual = Trajectory::new(1, vec![2.0, 3.0]).unwrap();
        let r = assess(&e, &actual, MetricKind::Mse, &default_theta_grid(), &MetricConfig::default())
            .unwrap();
        assert_eq!(r.m_w, 0.0);
        assert!(r.score >= 50.0);
        for d in &r.decisions {
            assert_eq!(d.good, d.theta < r.score);
        }
    }

    #[test]
    fn window_mismatch_is_rejected() {
        let e = ensemble(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let actual = Trajectory::new(2, vec![2.0, 3.0]).unwrap();
        assert!(assess(&e, &actual, MetricKind::Mse, &[50.0], &MetricConfig::default()).is_err());
        let actual = Trajectory::new(1, vec![2.0, 3.0]).unwrap();
        assert!(assess(&e, &actual, MetricKind::Mse, &[], &MetricConfig::default()).is_err());
        assert!(assess(&e, &actual, MetricKind::Mse, &[100.0], &MetricConfig::default()).is_err());
    }

    #[test]
    fn bad_everywhere_when_worse_than_all() {
        let s = assessment_score(&[1.0, 2.0, 3.0, 4.0], 10.0).unwrap();
        for theta in 1..=90 {
            assert!(!s.is_good(theta as f64));
        }
    }

    proptest! {
        #[test]
        fn decisions_monotone_and_shift_invariant(
            m_p in prop::collection::vec(-100.0f64..100.0, 1..60),
            m_w in -100.0f64..100.0,
            shift in -50.0f64..50.0,
        ) {
            let s = assessment_score(&m_p, m_w).unwrap();
            prop_assert!(s.gamma1 <= s.gamma2);
            prop_assert!((s.score - 0.5 * (s.gamma1 + s.gamma2)).abs() < 1e-12);
            let grid = default_theta_grid();
            let decisions: Vec<bool> = grid.iter().map(|&t| s.is_good(t)).collect();
            for pair in decisions.windows(2) {
                prop_assert!(pair[0] || !pair[1]);
            }
            // Integer-valued data keeps shifted comparisons exact.
            let m_p_int: Vec<f64> = m_p.iter().map(|v| v.round()).collect();
            let m_w_int = m_w.round();
            let shift = shift.round();
            let a = assessment_score(&m_p_int, m_w_int).unwrap();
            let shifted: Vec<f64> = m_p_int.iter().map(|v| v + shift).collect();
            let b = assessment_score(&shifted, m_w_int + shift).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn tie_free_decision_matches_quantile_rule(
            raw in prop::collection::btree_set(-10_000i32..10_000, 2..80),
            m_w_raw in -10_000i32..10_000,
            theta_idx in 0usize..14,
        ) {
            let m_p: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
            let m_w = m_w_raw as f64 + 0.5;
            let theta = default_theta_grid()[theta_idx];
            let s = assessment_score(&m_p, m_w).unwrap();
            let q = threshold_quantile(&m_p, theta).unwrap();

            // Skip the interpolation gap between the two bracketing order
            // statistics, where the empirical quantile cannot resolve rank.
            let n = m_p.len() as f64;
            let p = (100.0 - theta) / 100.0;
            let k = (1..=m_p.len()).filter(|&k| (k as f64 - 0.5) / n < p).max().unwrap_or(0);
            let lo = if k == 0 { f64::NEG_INFINITY } else { m_p[k - 1] };
            let hi = if k >= m_p.len() { f64::INFINITY } else { m_p[k] };
            prop_assume!(!(lo <= m_w && m_w <= hi));
            prop_assert_eq!(s.is_good(theta), m_w < q);
        }
    }
}
