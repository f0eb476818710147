//! Fitting a single-regime Gaussian model to an observed window so that
//! prognoses can be simulated for real data.
//!
//! Two forms are supported, both written in local time `tau = t - origin`:
//! a linear trend with a linear scale (warning regime) and an exponential
//! trend with an exponential scale (critical regime). Trends come from least
//! squares; the scale is fitted to the absolute residuals, corrected so it
//! estimates the Gaussian standard deviation.

use std::f64::consts::{FRAC_PI_2, LN_2};

use serde::{Deserialize, Serialize};

use crate::degradation::{simulate_ensemble_with, TrendScale};
use crate::error::{Error, Result};
use crate::series::{PrognosisEnsemble, Trajectory, Window};

/// Minimum number of samples a window fit accepts.
pub const MIN_FIT_LEN: usize = 10;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `-E[ln |Z|]` for standard normal `Z`.
const LOG_ABS_NORMAL_BIAS: f64 = 0.5 * (EULER_GAMMA + LN_2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Exponential,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(ModelKind::Linear),
            "exponential" | "exp" => Ok(ModelKind::Exponential),
            other => Err(Error::invalid_arg(format!("unknown model kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Curve {
    /// `slope * tau + intercept`
    Linear { slope: f64, intercept: f64 },
    /// `amplitude * exp(rate * tau) + offset`
    Exponential {
        amplitude: f64,
        rate: f64,
        offset: f64,
    },
}

impl Curve {
    pub fn eval(&self, tau: f64) -> f64 {
        match *self {
            Curve::Linear { slope, intercept } => slope * tau + intercept,
            Curve::Exponential {
                amplitude,
                rate,
                offset,
            } => amplitude * (rate * tau).exp() + offset,
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            Curve::Linear { slope, intercept } => slope.is_finite() && intercept.is_finite(),
            Curve::Exponential {
                amplitude,
                rate,
                offset,
            } => amplitude.is_finite() && rate.is_finite() && offset.is_finite(),
        }
    }
}

/// Trend and noise scale fitted to one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowModel {
    pub kind: ModelKind,
    /// Sample index where `tau = 0`.
    pub origin: usize,
    /// Window the model was fitted on.
    pub fitted_on: Window,
    pub trend: Curve,
    pub scale: Curve,
    /// Lower clamp applied to the scale curve.
    pub scale_floor: f64,
}

impl WindowModel {
    pub fn validate(&self) -> Result<()> {
        if !self.trend.is_finite() || !self.scale.is_finite() {
            return Err(Error::InvalidParameters(
                "window model has non-finite coefficients".into(),
            ));
        }
        if !(self.scale_floor.is_finite() && self.scale_floor >= 0.0) {
            return Err(Error::InvalidParameters(format!(
                "scale floor {} must be finite and nonnegative",
                self.scale_floor
            )));
        }
        if let Curve::Exponential { offset, .. } = self.scale {
            if offset != 0.0 {
                return Err(Error::InvalidParameters(
                    "exponential scale carries no offset".into(),
                ));
            }
        }
        Ok(())
    }

    fn tau(&self, t: usize) -> f64 {
        t as f64 - self.origin as f64
    }

    pub fn trend_at(&self, t: usize) -> f64 {
        self.trend.eval(self.tau(t))
    }

    pub fn scale_at(&self, t: usize) -> f64 {
        self.scale.eval(self.tau(t)).max(self.scale_floor)
    }
}

impl TrendScale for WindowModel {
    fn trend(&self, t: usize) -> Result<f64> {
        Ok(self.trend_at(t))
    }

    fn scale(&self, t: usize) -> Result<f64> {
        Ok(self.scale_at(t))
    }
}

/// Bounds of the exponential-rate grid, expressed as `rate * span` where
/// `span` is the window length minus one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFitOptions {
    pub min_rate_span: f64,
    pub max_rate_span: f64,
    /// Grid points per sign.
    pub points: usize,
    pub include_negative: bool,
}

impl Default for ExpFitOptions {
    fn default() -> Self {
        Self {
            min_rate_span: 1e-3,
            max_rate_span: 30.0,
            points: 241,
            include_negative: true,
        }
    }
}

impl ExpFitOptions {
    /// Candidate rates for a window spanning `span` samples, ascending.
    pub fn grid(&self, span: f64) -> Vec<f64> {
        let lo = self.min_rate_span.ln();
        let hi = self.max_rate_span.ln();
        let k = self.points.max(2);
        let positive: Vec<f64> = (0..k)
            .map(|i| (lo + (hi - lo) * i as f64 / (k - 1) as f64).exp() / span)
            .collect();
        let mut rates = Vec::with_capacity(2 * k);
        if self.include_negative {
            rates.extend(positive.iter().rev().map(|r| -r));
        }
        rates.extend(positive);
        rates
    }
}

fn check_data(data: &Trajectory) -> Result<()> {
    if data.len() < MIN_FIT_LEN {
        return Err(Error::invalid_arg(format!(
            "window fit needs at least {MIN_FIT_LEN} samples, got {}",
            data.len()
        )));
    }
    Ok(())
}

fn scale_floor(values: &[f64]) -> f64 {
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs > 0.0 {
        1e-9 * max_abs
    } else {
        1e-12
    }
}

/// Ordinary least squares `y = slope * x + intercept`.
fn least_squares_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

fn local_times(data: &Trajectory) -> Vec<f64> {
    (0..data.len()).map(|i| i as f64).collect()
}

/// Linear trend and linear scale.
pub fn fit_linear_window(data: &Trajectory) -> Result<WindowModel> {
    check_data(data)?;
    let tau = local_times(data);
    let (slope, intercept) = least_squares_line(&tau, &data.values);
    let envelope: Vec<f64> = tau
        .iter()
        .zip(&data.values)
        .map(|(x, y)| (y - (slope * x + intercept)).abs() * FRAC_PI_2.sqrt())
        .collect();
    let (s_slope, s_intercept) = least_squares_line(&tau, &envelope);
    let model = WindowModel {
        kind: ModelKind::Linear,
        origin: data.start,
        fitted_on: data.window(),
        trend: Curve::Linear { slope, intercept },
        scale: Curve::Linear {
            slope: s_slope,
            intercept: s_intercept,
        },
        scale_floor: scale_floor(&data.values),
    };
    model.validate()?;
    Ok(model)
}

/// Best `(amplitude, offset)` for a fixed rate and the resulting SSE.
fn exp_fit_at_rate(tau: &[f64], y: &[f64], rate: f64) -> (f64, f64, f64) {
    let f: Vec<f64> = tau.iter().map(|t| (rate * t).exp()).collect();
    let (amplitude, offset) = least_squares_line(&f, y);
    let sse = f
        .iter()
        .zip(y)
        .map(|(fi, yi)| (yi - amplitude * fi - offset).powi(2))
        .sum();
    (amplitude, offset, sse)
}

/// Golden-section search for the SSE minimum on `[lo, hi]`.
fn refine_rate(tau: &[f64], y: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let sse = |r: f64| exp_fit_at_rate(tau, y, r).2;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (sse(c), sse(d));
    for _ in 0..100 {
        if (hi - lo).abs() <= 1e-12 * hi.abs().max(lo.abs()) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = sse(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = sse(d);
        }
    }
    0.5 * (lo + hi)
}

/// Exponential trend `a * exp(b * tau) + c` by grid search over `b` with
/// closed-form `(a, c)`, then an exponential scale fitted in the log domain.
pub fn fit_exponential_window(data: &Trajectory, opts: &ExpFitOptions) -> Result<WindowModel> {
    check_data(data)?;
    if !(opts.min_rate_span > 0.0 && opts.max_rate_span > opts.min_rate_span) {
        return Err(Error::invalid_arg("exponential rate bounds must satisfy 0 < min < max"));
    }
    let tau = local_times(data);
    let y = &data.values;
    let span = (data.len() - 1) as f64;
    let grid = opts.grid(span);

    let fits: Vec<(f64, f64)> = grid
        .iter()
        .map(|&r| (r, exp_fit_at_rate(&tau, y, r).2))
        .collect();
    let best = fits
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .expect("grid is nonempty");

    let (mut rate, grid_sse) = fits[best];
    let lo = fits[best.saturating_sub(1)].0;
    let hi = fits[(best + 1).min(fits.len() - 1)].0;
    if lo < hi {
        let refined = refine_rate(&tau, y, lo, hi);
        if exp_fit_at_rate(&tau, y, refined).2 < grid_sse {
            rate = refined;
        }
    }
    let (amplitude, offset, _) = exp_fit_at_rate(&tau, y, rate);
    let trend = Curve::Exponential {
        amplitude,
        rate,
        offset,
    };

    let floor = scale_floor(y);
    let residuals: Vec<f64> = tau
        .iter()
        .zip(y)
        .map(|(t, v)| (v - trend.eval(*t)).abs())
        .collect();
    let scale = if residuals.iter().all(|r| *r <= floor) {
        Curve::Exponential {
            amplitude: floor,
            rate: 0.0,
            offset: 0.0,
        }
    } else {
        let logs: Vec<f64> = residuals.iter().map(|r| r.max(floor).ln()).collect();
        let (s_rate, s_log_amp) = least_squares_line(&tau, &logs);
        Curve::Exponential {
            amplitude: (s_log_amp + LOG_ABS_NORMAL_BIAS).exp(),
            rate: s_rate,
            offset: 0.0,
        }
    };

    let model = WindowModel {
        kind: ModelKind::Exponential,
        origin: data.start,
        fitted_on: data.window(),
        trend,
        scale,
        scale_floor: floor,
    };
    model.validate()?;
    Ok(model)
}

pub fn fit_window(data: &Trajectory, kind: ModelKind) -> Result<WindowModel> {
    match kind {
        ModelKind::Linear => fit_linear_window(data),
        ModelKind::Exponential => fit_exponential_window(data, &ExpFitOptions::default()),
    }
}

/// `n` trajectories of `trend + scale * Z` on `window`, seeded per
/// trajectory from `seed` like the degradation simulator.
pub fn simulate_from_window_model(
    model: &WindowModel,
    window: Window,
    n: usize,
    seed: u64,
) -> Result<PrognosisEnsemble> {
    model.validate()?;
    simulate_ensemble_with(model, window, n, seed, 1.0)
}
