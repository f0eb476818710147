//! Prediction-quality metrics. Every metric here is lower-is-better.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patterns::{default_fan_levels, Pattern};

/// Which pattern variant a metric compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    Mean,
    QuantileFan,
    IncrementQuantileLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Mse,
    Mape,
    Sqif,
    #[serde(rename = "pof")]
    KupiecPof,
    #[serde(rename = "tuff")]
    KupiecTuff,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::Mse,
        MetricKind::Mape,
        MetricKind::Sqif,
        MetricKind::KupiecPof,
        MetricKind::KupiecTuff,
    ];

    pub fn pattern_kind(self) -> PatternKind {
        match self {
            MetricKind::Mse | MetricKind::Mape => PatternKind::Mean,
            MetricKind::Sqif => PatternKind::QuantileFan,
            MetricKind::KupiecPof | MetricKind::KupiecTuff => PatternKind::IncrementQuantileLine,
        }
    }

    /// All five metrics are lower-is-better.
    pub fn lower_is_better(self) -> bool {
        true
    }

    /// Short identifier used on the command line and in file names.
    pub fn id(self) -> &'static str {
        match self {
            MetricKind::Mse => "mse",
            MetricKind::Mape => "mape",
            MetricKind::Sqif => "sqif",
            MetricKind::KupiecPof => "pof",
            MetricKind::KupiecTuff => "tuff",
        }
    }

    /// Column header used in emitted tables.
    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Mse => "MSE",
            MetricKind::Mape => "MAPE",
            MetricKind::Sqif => "SQIF",
            MetricKind::KupiecPof => "Kupiec's POF",
            MetricKind::KupiecTuff => "Kupiec's TUFF",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.label() == label.trim())
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mse" => Ok(MetricKind::Mse),
            "mape" => Ok(MetricKind::Mape),
            "sqif" => Ok(MetricKind::Sqif),
            "pof" | "kupiec_pof" | "kupiec-pof" => Ok(MetricKind::KupiecPof),
            "tuff" | "kupiec_tuff" | "kupiec-tuff" => Ok(MetricKind::KupiecTuff),
            other => Err(Error::invalid_arg(format!("unknown metric '{other}'"))),
        }
    }
}

/// Band and fan levels for the space quantiles-inclusion factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqifConfig {
    /// Central band widths in percent; band `q` spans the fan lines at
    /// `(100 - q) / 2` and `(100 + q) / 2`.
    pub bands: Vec<f64>,
    pub fan_levels: Vec<f64>,
}

impl Default for SqifConfig {
    fn default() -> Self {
        Self {
            bands: (0..=10).map(|k| 10.0 * k as f64).collect(),
            fan_levels: default_fan_levels(),
        }
    }
}

impl SqifConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bands.is_empty() {
            return Err(Error::Config("SQIF needs at least one band".into()));
        }
        for &q in &self.bands {
            if !(0.0..=100.0).contains(&q) {
                return Err(Error::Config(format!("SQIF band {q} outside [0, 100]")));
            }
            for level in band_levels(q) {
                if !self.fan_levels.iter().any(|l| (l - level).abs() < 1e-9) {
                    return Err(Error::Config(format!(
                        "SQIF band {q} needs fan level {level}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn band_levels(q: f64) -> [f64; 2] {
    [(100.0 - q) / 2.0, (100.0 + q) / 2.0]
}

/// Settings shared by all metric evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub sqif: SqifConfig,
    /// Smallest admissible `|P(t)|` for MAPE.
    pub mape_epsilon: f64,
    /// Quantile order (percent) of the POF increment line.
    pub pof_order: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            sqif: SqifConfig::default(),
            mape_epsilon: 1e-12,
            pof_order: 51.0,
        }
    }
}

fn check_lengths(pattern: &[f64], trajectory: &[f64]) -> Result<()> {
    if pattern.is_empty() {
        return Err(Error::invalid_arg("empty series"));
    }
    if pattern.len() != trajectory.len() {
        return Err(Error::invalid_arg(format!(
            "pattern has {} points, trajectory has {}",
            pattern.len(),
            trajectory.len()
        )));
    }
    Ok(())
}

pub fn mse(pattern: &[f64], trajectory: &[f64]) -> Result<f64> {
    check_lengths(pattern, trajectory)?;
    let sum: f64 = pattern
        .iter()
        .zip(trajectory)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pattern.len() as f64)
}

/// Mean absolute percentage error relative to the pattern, as a fraction.
pub fn mape(pattern: &[f64], trajectory: &[f64], epsilon: f64) -> Result<f64> {
    check_lengths(pattern, trajectory)?;
    let mut sum = 0.0;
    for (index, (p, t)) in pattern.iter().zip(trajectory).enumerate() {
        if p.abs() <= epsilon {
            return Err(Error::DivisionHazard { index, value: *p });
        }
        sum += (p - t).abs() / p.abs();
    }
    Ok(sum / pattern.len() as f64)
}

/// Fraction of `trajectory` inside `[lower, upper]` pointwise, edges included.
fn inclusion_fraction(lower: &[f64], upper: &[f64], trajectory: &[f64]) -> f64 {
    let inside = trajectory
        .iter()
        .zip(lower.iter().zip(upper))
        .filter(|(v, (lo, hi))| lo <= v && v <= hi)
        .count();
    inside as f64 / trajectory.len() as f64
}

/// Space quantiles-inclusion factor: mean squared gap between each central
/// band's empirical coverage and its nominal width, both on `[0, 1]`.
pub fn sqif(fan: &Pattern, trajectory: &[f64], cfg: &SqifConfig) -> Result<f64> {
    if !matches!(fan, Pattern::QuantileFan { .. }) {
        return Err(Error::Config("SQIF needs a quantile fan pattern".into()));
    }
    if cfg.bands.is_empty() {
        return Err(Error::Config("SQIF needs at least one band".into()));
    }
    let mut total = 0.0;
    for &q in &cfg.bands {
        let [lo_level, hi_level] = band_levels(q);
        let missing = |l: f64| Error::Config(format!("fan has no line at level {l}"));
        let lower = fan.fan_line(lo_level).ok_or_else(|| missing(lo_level))?;
        let upper = fan.fan_line(hi_level).ok_or_else(|| missing(hi_level))?;
        check_lengths(lower, trajectory)?;
        let phi = inclusion_fraction(lower, upper, trajectory);
        total += (phi - q / 100.0).powi(2);
    }
    Ok(total / cfg.bands.len() as f64)
}

fn check_p_star(p_star: f64) -> Result<()> {
    if !(p_star > 0.0 && p_star < 1.0) {
        return Err(Error::invalid_arg(format!(
            "exceedance probability {p_star} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Proportion-of-failures likelihood ratio for `x` exceedances out of `n`
/// observations at nominal exceedance probability `p_star`.
pub fn pof_statistic(n: usize, x: usize, p_star: f64) -> Result<f64> {
    check_p_star(p_star)?;
    if n == 0 || x > n {
        return Err(Error::invalid_arg(format!(
            "need 0 <= x <= n and n >= 1, got x={x}, n={n}"
        )));
    }
    let nf = n as f64;
    let xf = x as f64;
    Ok(if x == 0 {
        -2.0 * nf * (1.0 - p_star).ln()
    } else if x == n {
        -2.0 * nf * p_star.ln()
    } else {
        -2.0 * ((nf - xf) * (nf * (1.0 - p_star) / (nf - xf)).ln() + xf * (nf * p_star / xf).ln())
    })
}

/// Time-until-first-failure likelihood ratio. `first` is the 1-based index
/// of the first exceedance, `None` when nothing exceeds.
///
/// The `x = 1` and no-exceedance branches carry the factor `n`, matching the
/// published form of the statistic.
pub fn tuff_statistic(n: usize, first: Option<usize>, p_star: f64) -> Result<f64> {
    check_p_star(p_star)?;
    if n == 0 {
        return Err(Error::invalid_arg("TUFF needs at least one observation"));
    }
    let nf = n as f64;
    Ok(match first {
        None => -2.0 * nf * (1.0 - p_star).ln(),
        Some(1) => -2.0 * nf * p_star.ln(),
        Some(x) if x <= n => {
            let xf = x as f64;
            -2.0 * (p_star.ln() + (xf - 1.0) * (1.0 - p_star).ln() + xf * xf.ln()
                - (xf - 1.0) * (xf - 1.0).ln())
        }
        Some(x) => {
            return Err(Error::invalid_arg(format!(
                "first exceedance {x} beyond {n} observations"
            )))
        }
    })
}

fn increment_line(pattern: &Pattern) -> Result<(f64, &[f64])> {
    match pattern {
        Pattern::IncrementQuantileLine { order, line } => Ok((*order, line)),
        _ => Err(Error::Config(
            "Kupiec statistics need an increment quantile line".into(),
        )),
    }
}

fn exceedances<'a>(line: &'a [f64], increments: &'a [f64]) -> impl Iterator<Item = bool> + 'a {
    increments.iter().zip(line).map(|(s, q)| s > q)
}

/// POF statistic of `increments` against the line's order `p`, with
/// `p_star = 1 - p / 100`. Exceeding means strictly above the line.
pub fn kupiec_pof(pattern: &Pattern, increments: &[f64]) -> Result<f64> {
    let (order, line) = increment_line(pattern)?;
    check_lengths(line, increments)?;
    let x = exceedances(line, increments).filter(|&e| e).count();
    pof_statistic(increments.len(), x, 1.0 - order / 100.0)
}

pub fn kupiec_tuff(pattern: &Pattern, increments: &[f64]) -> Result<f64> {
    let (order, line) = increment_line(pattern)?;
    check_lengths(line, increments)?;
    let first = exceedances(line, increments).position(|e| e).map(|i| i + 1);
    tuff_statistic(increments.len(), first, 1.0 - order / 100.0)
}

/// Quantile order for the TUFF line over `n` increments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuffOrder {
    /// Exceedance probability, the root of `(1 - x)^n = x` in `(0, 1)`.
    pub p_star: f64,
    /// Quantile order of the line in percent, `100 * (1 - p_star)`.
    pub order: f64,
}

/// Bisection on `(1 - x)^n - x`, which is strictly decreasing on `[0, 1]`
/// and changes sign there, so the root is unique.
pub fn solve_tuff_order(n: usize) -> Result<TuffOrder> {
    if n == 0 {
        return Err(Error::invalid_arg("TUFF order needs n >= 1"));
    }
    let nf = n as f64;
    let f = |x: f64| (nf * (-x).ln_1p()).exp() - x;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p_star = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    Ok(TuffOrder {
        p_star,
        order: 100.0 * (1.0 - p_star),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fan(lines: Vec<(f64, Vec<f64>)>) -> Pattern {
        let (levels, lines) = lines.into_iter().unzip();
        Pattern::QuantileFan { levels, lines }
    }

    fn flat_fan(len: usize, value_at_level: impl Fn(f64) -> f64) -> Pattern {
        fan(default_fan_levels()
            .into_iter()
            .map(|l| (l, vec![value_at_level(l); len]))
            .collect())
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 12.5);
        assert_eq!(mse(&[0.0, 0.0], &[6.0, 8.0]).unwrap(), 50.0);
        assert!(mse(&[0.0], &[1.0, 2.0]).is_err());
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[2.0, 4.0], &[2.0, 4.0], 1e-12).unwrap(), 0.0);
        assert!((mape(&[2.0, 4.0], &[1.0, 5.0], 1e-12).unwrap() - 0.375).abs() < 1e-15);
        let scaled = mape(&[-6.0, -12.0], &[-3.0, -15.0], 1e-12).unwrap();
        assert!((scaled - 0.375).abs() < 1e-15);
        match mape(&[1.0, 0.0, 2.0], &[1.0, 1.0, 1.0], 1e-12) {
            Err(Error::DivisionHazard { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected division hazard, got {other:?}"),
        }
    }

    #[test]
    fn sqif_degenerate_cases() {
        // Every band collapses onto the same line: φ(q) = 1 for all q.
        let collapsed = flat_fan(4, |_| 3.0);
        let v = sqif(&collapsed, &[3.0; 4], &SqifConfig::default()).unwrap();
        assert!((v - 0.35).abs() < 1e-12, "{v}");

        let spread = flat_fan(4, |l| l);
        let v = sqif(&spread, &[150.0; 4], &SqifConfig::default()).unwrap();
        assert!((v - 0.35).abs() < 1e-12, "{v}");
    }

    #[test]
    fn sqif_identity_coverage_is_zero() {
        // Fan line value equals its level, so band q spans [50 - q/2, 50 + q/2].
        let fan = flat_fan(5, |l| l);
        let cfg = SqifConfig {
            bands: vec![0.0, 20.0, 60.0],
            ..SqifConfig::default()
        };
        // φ(0) = 0, φ(20) = 1/5, φ(60) = 3/5.
        let exact = [45.0, 30.0, 70.0, 95.0, 0.0];
        assert_eq!(sqif(&fan, &exact, &cfg).unwrap(), 0.0);
        let off = [10.0, 30.0, 90.0, 5.0, 95.0];
        assert!(sqif(&fan, &off, &cfg).unwrap() > 0.0);
    }

    #[test]
    fn sqif_requires_band_levels() {
        let partial = fan(vec![(0.0, vec![0.0]), (100.0, vec![1.0])]);
        assert!(matches!(
            sqif(&partial, &[0.5], &SqifConfig::default()),
            Err(Error::Config(_))
        ));
        let bad = SqifConfig {
            bands: vec![15.0],
            fan_levels: vec![0.0, 50.0, 100.0],
        };
        assert!(bad.validate().is_err());
        SqifConfig::default().validate().unwrap();
    }

    #[test]
    fn pof_examples() {
        assert!(pof_statistic(100, 49, 0.49).unwrap().abs() < 1e-9);
        let zero = pof_statistic(100, 0, 0.49).unwrap();
        assert!((zero - (-200.0 * 0.51f64.ln())).abs() < 1e-9);
        assert!((zero - 134.66).abs() < 0.01);
        let all = pof_statistic(100, 100, 0.49).unwrap();
        assert!((all - (-200.0 * 0.49f64.ln())).abs() < 1e-9);
        assert!((all - 142.67).abs() < 0.01);
        assert!(pof_statistic(0, 0, 0.49).is_err());
        assert!(pof_statistic(10, 11, 0.49).is_err());
        assert!(pof_statistic(10, 1, 1.0).is_err());
    }

    #[test]
    fn pof_counts_strict_exceedances() {
        let line = Pattern::IncrementQuantileLine {
            order: 51.0,
            line: vec![0.0; 4],
        };
        // Ties at the line do not count.
        let v = kupiec_pof(&line, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert_eq!(v, pof_statistic(4, 1, 0.49).unwrap());
        assert!(kupiec_pof(&line, &[]).is_err());
        let mean = Pattern::Mean { series: vec![0.0] };
        assert!(kupiec_pof(&mean, &[0.0]).is_err());
    }

    #[test]
    fn tuff_examples() {
        assert!(tuff_statistic(100, Some(50), 0.02).unwrap().abs() < 1e-9);

        let order = solve_tuff_order(199).unwrap();
        let none = tuff_statistic(199, None, order.p_star).unwrap();
        assert!((none - (-398.0 * (1.0 - order.p_star).ln())).abs() < 1e-9);
        let first = tuff_statistic(199, Some(1), order.p_star).unwrap();
        assert!((first - (-398.0 * order.p_star.ln())).abs() < 1e-9);
        assert!((first / 1566.0 - 1.0).abs() < 0.005, "{first}");

        let line = Pattern::IncrementQuantileLine {
            order: 98.0,
            line: vec![1.0; 5],
        };
        let v = kupiec_tuff(&line, &[0.0, 0.5, 2.0, 3.0, 0.0]).unwrap();
        assert!((v - tuff_statistic(5, Some(3), 0.02).unwrap()).abs() < 1e-12);
        assert!(tuff_statistic(5, Some(6), 0.02).is_err());
    }

    #[test]
    fn tuff_order_small_cases() {
        assert_eq!(solve_tuff_order(1).unwrap().p_star, 0.5);
        assert_eq!(solve_tuff_order(1).unwrap().order, 50.0);
        assert!(solve_tuff_order(0).is_err());
        let o = solve_tuff_order(199).unwrap();
        assert!((o.p_star - 0.0195).abs() < 5e-4, "{}", o.p_star);
        assert!(o.order > 98.0 && o.order < 98.1);
    }

    #[test]
    fn metric_names_round_trip() {
        for m in MetricKind::ALL {
            assert_eq!(m.id().parse::<MetricKind>().unwrap(), m);
            assert_eq!(MetricKind::from_label(m.label()), Some(m));
            assert!(m.lower_is_better());
        }
        assert!("rmse".parse::<MetricKind>().is_err());
    }
}
