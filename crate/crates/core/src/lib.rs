//! Quality assessment of long-horizon health-index (HI) predictions.
//!
//! An ensemble of prognosed trajectories is reduced to a metric-specific
//! pattern (mean trajectory, quantile-line fan, or increment quantile line).
//! Each prognosis is scored against that pattern to give a reference
//! distribution of metric values; the observed series is scored the same
//! way and placed inside that distribution. The resulting percentage is the
//! assessment score, and a prediction is judged good at threshold `theta`
//! when the score exceeds `theta`.
//!
//! Modules:
//! - [`degradation`]: three-regime HI simulator with time-varying noise.
//! - [`patterns`]: mean, quantile fan, increments and increment quantile lines.
//! - [`metrics`]: MSE, MAPE, SQIF, Kupiec POF and TUFF.
//! - [`assessment`]: metric sets, scores and threshold decisions.
//! - [`calibration`]: Monte-Carlo null calibration tables.
//! - [`estimation`]: single-window model fits for real data.
//! - [`io`]: CSV, config and report files.

pub mod assessment;
pub mod calibration;
pub mod degradation;
pub mod error;
pub mod estimation;
pub mod io;
pub mod metrics;
pub mod patterns;
pub mod pipeline;
pub mod rng;
pub mod series;

pub use assessment::{assess, AssessmentReport, Reference, Score};
pub use calibration::{run_calibration, CalibrationSpec, CalibrationTable, Regime};
pub use degradation::{DegradationCoefficients, DegradationModel, DegradationParams};
pub use error::{Error, Result};
pub use estimation::{ModelKind, WindowModel};
pub use metrics::{MetricConfig, MetricKind};
pub use patterns::Pattern;
pub use series::{PrognosisEnsemble, Trajectory, Window};
