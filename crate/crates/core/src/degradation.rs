//! Three-regime degradation model: a flat healthy regime, a linear warning
//! regime and an exponential critical regime, each with Gaussian noise whose
//! scale changes over time.
//!
//! The value at sample `t` is `trend(t) + scale(t) * Z_t` with `Z_t` iid
//! standard normal. Scale and trend are piecewise:
//!
//! | regime | samples         | scale            | trend                |
//! |--------|-----------------|------------------|----------------------|
//! | 1      | `1..=t1`        | `a1*t + b1`      | `c1`                 |
//! | 2      | `t1+1..=t2`     | `a2*t + b2`      | `a2*t + c2`          |
//! | 3      | `t2+1..=m`      | `a3*exp(b3*t)`   | `a3*exp(b3*t) + c3`  |
//!
//! The constants are pinned by the scale anchors `sigma1..sigma4` at
//! `t = 1, t1, t2, m` and by continuity of the trend at `t1` and `t2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{child_seed, standard_normals};
use crate::series::{PrognosisEnsemble, Trajectory, Window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationParams {
    /// Last sample of the healthy regime.
    pub t1_star: usize,
    /// Last sample of the warning regime.
    pub t2_star: usize,
    /// Trajectory length.
    pub m: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub sigma4: f64,
    /// Trend level of the healthy regime.
    pub c1: f64,
}

impl DegradationParams {
    /// The parameter set used for the simulation studies:
    /// `t1 = 6000, t2 = 9000, m = 10000, sigma = (1, 2, 7, 25), c1 = 10`.
    pub fn reference() -> Self {
        Self {
            t1_star: 6000,
            t2_star: 9000,
            m: 10000,
            sigma1: 1.0,
            sigma2: 2.0,
            sigma3: 7.0,
            sigma4: 25.0,
            c1: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1 < self.t1_star && self.t1_star < self.t2_star && self.t2_star < self.m) {
            return Err(Error::InvalidParameters(format!(
                "need 1 < t1_star < t2_star < m, got t1_star={}, t2_star={}, m={}",
                self.t1_star, self.t2_star, self.m
            )));
        }
        for (name, s) in [
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
            ("sigma3", self.sigma3),
            ("sigma4", self.sigma4),
        ] {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidParameters(format!(
                    "{name} must be positive and finite, got {s}"
                )));
            }
        }
        if !self.c1.is_finite() {
            return Err(Error::InvalidParameters("c1 must be finite".into()));
        }
        Ok(())
    }

    /// Samples of the warning regime, `[t1+1, t2]`.
    pub fn second_regime(&self) -> Window {
        Window {
            start: self.t1_star + 1,
            end: self.t2_star,
        }
    }

    /// Samples of the critical regime, `[t2+1, m]`.
    pub fn third_regime(&self) -> Window {
        Window {
            start: self.t2_star + 1,
            end: self.m,
        }
    }

    pub fn full_window(&self) -> Window {
        Window {
            start: 1,
            end: self.m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationCoefficients {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub a3: f64,
    pub b3: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Solves the anchor and continuity conditions for the piecewise constants.
///
/// Regime 2's line is anchored at `t1` (not `t1+1`) and regime 3's
/// exponential at `t2`, so the anchors coincide with the regime boundaries.
pub fn derive_coefficients(params: &DegradationParams) -> Result<DegradationCoefficients> {
    params.validate()?;
    let t1 = params.t1_star as f64;
    let t2 = params.t2_star as f64;
    let m = params.m as f64;

    let a1 = (params.sigma2 - params.sigma1) / (t1 - 1.0);
    let b1 = params.sigma1 - a1;
    let a2 = (params.sigma3 - params.sigma2) / (t2 - t1);
    let b2 = params.sigma2 - a2 * t1;
    let b3 = (params.sigma4 / params.sigma3).ln() / (m - t2);
    let a3 = params.sigma3 * (-b3 * t2).exp();
    let c2 = params.c1 - a2 * t1;
    let c3 = a2 * t2 + c2 - params.sigma3;

    Ok(DegradationCoefficients {
        a1,
        b1,
        a2,
        b2,
        a3,
        b3,
        c2,
        c3,
    })
}

/// Deterministic mean and noise scale of a Gaussian series model.
pub trait TrendScale: Sync {
    fn trend(&self, t: usize) -> Result<f64>;
    fn scale(&self, t: usize) -> Result<f64>;
}

/// Simulates `trend(t) + multiplier * scale(t) * Z_t` over `window`.
pub fn simulate_with<M: TrendScale + ?Sized>(
    model: &M,
    window: Window,
    seed: u64,
    noise_multiplier: f64,
) -> Result<Trajectory> {
    let mut values = vec![0.0; window.len()];
    standard_normals(seed, &mut values);
    for (t, v) in window.indices().zip(values.iter_mut()) {
        *v = model.trend(t)? + noise_multiplier * model.scale(t)? * *v;
    }
    Trajectory::new(window.start, values)
}

/// `n` independent trajectories; trajectory `i` draws from
/// `child_seed(master_seed, i)` so the result does not depend on scheduling.
pub fn simulate_ensemble_with<M: TrendScale + ?Sized>(
    model: &M,
    window: Window,
    n: usize,
    master_seed: u64,
    noise_multiplier: f64,
) -> Result<PrognosisEnsemble> {
    if n < 2 {
        return Err(Error::invalid_arg(format!(
            "ensemble size must be at least 2, got {n}"
        )));
    }
    let trajectories = (0..n)
        .into_par_iter()
        .map(|i| {
            simulate_with(model, window, child_seed(master_seed, i as u64), noise_multiplier)
                .map(|t| t.values)
        })
        .collect::<Result<Vec<_>>>()?;
    PrognosisEnsemble::new(window, trajectories)
}

/// The three-regime model with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradationModel {
    params: DegradationParams,
    coeffs: DegradationCoefficients,
    noise_multiplier: f64,
}

impl DegradationModel {
    pub fn new(params: DegradationParams) -> Result<Self> {
        let coeffs = derive_coefficients(&params)?;
        Ok(Self {
            params,
            coeffs,
            noise_multiplier: 1.0,
        })
    }

    /// Scales the random component at simulation time; `0.0` yields the
    /// bare trend.
    pub fn with_noise_multiplier(mut self, multiplier: f64) -> Result<Self> {
        if !(multiplier.is_finite() && multiplier >= 0.0) {
            return Err(Error::InvalidParameters(format!(
                "noise multiplier must be finite and nonnegative, got {multiplier}"
            )));
        }
        self.noise_multiplier = multiplier;
        Ok(self)
    }

    pub fn params(&self) -> &DegradationParams {
        &self.params
    }

    pub fn coefficients(&self) -> &DegradationCoefficients {
        &self.coeffs
    }

    pub fn noise_multiplier(&self) -> f64 {
        self.noise_multiplier
    }

    fn check_t(&self, t: usize) -> Result<()> {
        if t < 1 || t > self.params.m {
            return Err(Error::OutOfRange {
                t: t as i64,
                lo: 1,
                hi: self.params.m as i64,
            });
        }
        Ok(())
    }

    fn check_window(&self, window: Window) -> Result<()> {
        self.check_t(window.start)?;
        self.check_t(window.end)
    }

    pub fn scale_at(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        let c = &self.coeffs;
        let tf = t as f64;
        Ok(if t <= self.params.t1_star {
            c.a1 * tf + c.b1
        } else if t <= self.params.t2_star {
            c.a2 * tf + c.b2
        } else {
            self.regime3_exp(tf)
        })
    }

    /// `a3 * exp(b3 * t)`, evaluated as `sigma3 * exp(b3 * (t - t2))` so
    /// large rates do not overflow.
    fn regime3_exp(&self, t: f64) -> f64 {
        self.params.sigma3 * (self.coeffs.b3 * (t - self.params.t2_star as f64)).exp()
    }

    pub fn trend_at(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        let c = &self.coeffs;
        let tf = t as f64;
        Ok(if t <= self.params.t1_star {
            self.params.c1
        } else if t <= self.params.t2_star {
            c.a2 * tf + c.c2
        } else {
            self.regime3_exp(tf) + c.c3
        })
    }

    pub fn simulate_trajectory(&self, window: Window, seed: u64) -> Result<Trajectory> {
        self.check_window(window)?;
        simulate_with(self, window, seed, self.noise_multiplier)
    }

    pub fn simulate_ensemble(
        &self,
        window: Window,
        n: usize,
        master_seed: u64,
    ) -> Result<PrognosisEnsemble> {
        self.check_window(window)?;
        simulate_ensemble_with(self, window, n, master_seed, self.noise_multiplier)
    }
}

impl TrendScale for DegradationModel {
    fn trend(&self, t: usize) -> Result<f64> {
        self.trend_at(t)
    }

    fn scale(&self, t: usize) -> Result<f64> {
        self.scale_at(t)
    }
}
