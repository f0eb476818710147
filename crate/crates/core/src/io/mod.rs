//! File formats: HI series and ensembles as CSV, run configuration as TOML,
//! reports as JSON plus delimited tables and plot data.

pub mod config;
pub mod hi_csv;
pub mod report;

pub use config::{DataConfig, RunConfig};
pub use hi_csv::{read_ensemble_csv, read_hi_csv, write_ensemble_csv, write_trajectory_csv};
pub use report::{AssessmentBundle, MetricAssessment};

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Formats a percent-like grid value without a trailing `.0` when integral.
pub(crate) fn fmt_level(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}
