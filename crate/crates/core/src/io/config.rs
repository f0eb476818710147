//! Run configuration (TOML, `schema_version = 1`).
//!
//! Every section is optional; each subcommand checks for the sections it
//! needs. Named presets shipped with the tool can be used wherever a config
//! path is accepted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assessment::{default_theta_grid, validate_theta_grid};
use crate::calibration::{calibration_theta_grid, CalibrationSpec, Regime};
use crate::degradation::DegradationParams;
use crate::error::{Error, Result};
use crate::estimation::ModelKind;
use crate::metrics::{MetricConfig, MetricKind};
use crate::series::Window;

pub const SCHEMA_VERSION: u32 = 1;

/// Presets compiled into the binary, by name.
/// Directory the presets were embedded from.
pub const PRESET_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");

pub const PRESETS: &[(&str, &str)] = &[
    (
        "reference_second_regime",
        include_str!("../../../../configs/reference_second_regime.toml"),
    ),
    (
        "reference_third_regime",
        include_str!("../../../../configs/reference_third_regime.toml"),
    ),
    (
        "femto_second_regime",
        include_str!("../../../../configs/femto_second_regime.toml"),
    ),
    (
        "femto_third_regime",
        include_str!("../../../../configs/femto_third_regime.toml"),
    ),
    (
        "ims_second_regime",
        include_str!("../../../../configs/ims_second_regime.toml"),
    ),
    (
        "ims_third_regime",
        include_str!("../../../../configs/ims_third_regime.toml"),
    ),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    #[serde(flatten)]
    pub params: DegradationParams,
    #[serde(default = "one")]
    pub noise_multiplier: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    pub regime: Regime,
    #[serde(default = "default_split")]
    pub split: f64,
}

fn default_split() -> f64 {
    0.8
}

/// Real-data input: a series file plus user-supplied regime change points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
    /// Last sample of the first and of the second regime.
    pub boundaries: [usize; 2],
    pub regime: Regime,
    /// Training share of the regime. Absent means the model is fitted on
    /// and assessed over the entire regime.
    #[serde(default)]
    pub split: Option<f64>,
    /// Window model form; defaults to linear for the second regime and
    /// exponential for the third.
    #[serde(default)]
    pub fit: Option<ModelKind>,
}

impl DataConfig {
    pub fn fit_kind(&self) -> ModelKind {
        self.fit.unwrap_or(match self.regime {
            Regime::Second => ModelKind::Linear,
            Regime::Third => ModelKind::Exponential,
        })
    }

    /// Samples of the configured regime within a series covering `series`.
    pub fn regime_window(&self, series: Window) -> Result<Window> {
        let [b1, b2] = self.boundaries;
        if !(series.start <= b1 && b1 < b2 && b2 < series.end) {
            return Err(Error::Config(format!(
                "regime boundaries {b1}, {b2} must be strictly increasing and inside {series}"
            )));
        }
        Ok(match self.regime {
            Regime::Second => Window { start: b1 + 1, end: b2 },
            Regime::Third => Window { start: b2 + 1, end: series.end },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n")]
    pub n_prognoses: usize,
    #[serde(default = "default_n")]
    pub n_tests: usize,
    #[serde(default = "all_metrics")]
    pub metrics: Vec<MetricKind>,
    /// Threshold grid; defaults depend on the subcommand.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    /// Threshold that decides the `assess` exit status.
    #[serde(default = "default_decision_theta")]
    pub decision_theta: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub calibration: Option<CalibrationSection>,
    #[serde(default)]
    pub data: Option<DataConfig>,
    #[serde(default)]
    pub metric_config: MetricConfig,
}

fn default_n() -> usize {
    1000
}

fn all_metrics() -> Vec<MetricKind> {
    MetricKind::ALL.to_vec()
}

fn default_decision_theta() -> f64 {
    50.0
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: None,
            seed: 0,
            n_prognoses: default_n(),
            n_tests: default_n(),
            metrics: all_metrics(),
            theta: None,
            decision_theta: default_decision_theta(),
            out: None,
            model: None,
            calibration: None,
            data: None,
            metric_config: MetricConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads `spec` as a file path if it exists, otherwise as a preset name.
    /// Relative data paths are resolved against the directory of the file,
    /// or of the preset sources for presets.
    pub fn load(spec: &str) -> Result<Self> {
        let path = Path::new(spec);
        if path.is_file() {
            let mut cfg = Self::from_toml(&super::read_text(path)?).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
                other => other,
            })?;
            if let (Some(data), Some(dir)) = (cfg.data.as_mut(), path.parent()) {
                if data.path.is_relative() && !dir.as_os_str().is_empty() {
                    data.path = dir.join(&data.path);
                }
            }
            return Ok(cfg);
        }
        match preset(spec) {
            Some(text) => {
                let mut cfg = Self::from_toml(text)?;
                if let Some(data) = cfg.data.as_mut() {
                    if data.path.is_relative() {
                        data.path = Path::new(PRESET_DIR).join(&data.path);
                    }
                }
                Ok(cfg)
            }
            None => Err(Error::Config(format!(
                "'{spec}' is neither a config file nor a preset ({})",
                PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.metrics.is_empty() {
            return Err(Error::Config("metrics list is empty".into()));
        }
        if let Some(theta) = &self.theta {
            validate_theta_grid(theta).map_err(|e| Error::Config(e.to_string()))?;
        }
        if !(self.decision_theta > 0.0 && self.decision_theta < 100.0) {
            return Err(Error::Config(format!(
                "decision_theta {} outside (0, 100)",
                self.decision_theta
            )));
        }
        if let Some(model) = &self.model {
            model.params.validate()?;
        }
        if let Some(data) = &self.data {
            let [b1, b2] = data.boundaries;
            if b1 >= b2 {
                return Err(Error::Config(format!(
                    "regime boundaries {b1}, {b2} must be strictly increasing"
                )));
            }
            if let Some(split) = data.split {
                if !(split > 0.0 && split < 1.0) {
                    return Err(Error::Config(format!("data split {split} outside (0, 1)")));
                }
            }
        }
        self.metric_config.sqif.validate()
    }

    /// Threshold grid for decision tables.
    pub fn decision_grid(&self) -> Vec<f64> {
        self.theta.clone().unwrap_or_else(default_theta_grid)
    }

    pub fn calibration_spec(&self) -> Result<CalibrationSpec> {
        let model = self
            .model
            .as_ref()
            .ok_or_else(|| Error::Config("calibration needs a [model] section".into()))?;
        let section = self
            .calibration
            .as_ref()
            .ok_or_else(|| Error::Config("calibration needs a [calibration] section".into()))?;
        Ok(CalibrationSpec {
            params: model.params,
            regime: section.regime,
            split: section.split,
            n_prognoses: self.n_prognoses,
            n_tests: self.n_tests,
            metrics: self.metrics.clone(),
            theta_grid: self.theta.clone().unwrap_or_else(calibration_theta_grid),
            master_seed: self.seed,
            noise_multiplier: model.noise_multiplier,
            metric_config: self.metric_config.clone(),
        })
    }
}

pub fn preset(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".toml").unwrap_or(name);
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
