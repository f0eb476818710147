//! Report files.
//!
//! - `report.json`: every intermediate of an assessment run, enough to
//!   regenerate all other outputs.
//! - `decision_table.csv`: rows are thresholds, columns metrics, cells 1
//!   (good prediction) or 0 (bad prediction).
//! - `calibration_table.csv`: same shape, cells are percentages of good
//!   predictions under the null.
//! - plot data: `hist_<metric>.csv` (metric-set histogram), `markers.csv`
//!   (observed metric value and score per metric) and `overlay_*.csv`
//!   (observed series against each pattern).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{fmt_level, read_text, write_text};
use crate::assessment::{validate_theta_grid, AssessmentReport};
use crate::calibration::CalibrationTable;
use crate::error::{Error, Result};
use crate::estimation::WindowModel;
use crate::metrics::MetricKind;
use crate::patterns::{increments, Pattern};
use crate::series::{Trajectory, Window};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const HISTOGRAM_BINS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAssessment {
    pub report: AssessmentReport,
    pub pattern: Pattern,
}

/// All assessments of one observed series against one prognosis ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentBundle {
    pub schema_version: u32,
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub window: Window,
    pub decision_theta: f64,
    pub actual: Trajectory,
    pub model: Option<WindowModel>,
    pub metrics: Vec<MetricAssessment>,
}

impl AssessmentBundle {
    pub fn theta_grid(&self) -> Vec<f64> {
        self.metrics
            .first()
            .map(|m| m.report.theta_grid())
            .unwrap_or_default()
    }

    /// Good at the decision threshold under every assessed metric.
    pub fn is_good(&self) -> bool {
        self.metrics
            .iter()
            .all(|m| m.report.score > self.decision_theta)
    }

    pub fn reports(&self) -> Vec<&AssessmentReport> {
        self.metrics.iter().map(|m| &m.report).collect()
    }
}

/// Parsed threshold-by-metric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub theta_grid: Vec<f64>,
    pub metrics: Vec<MetricKind>,
    pub cells: Vec<Vec<f64>>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn table_header(metrics: &[MetricKind]) -> String {
    let mut out = String::from("theta");
    for m in metrics {
        out.push(',');
        out.push_str(&csv_field(m.label()));
    }
    out.push('\n');
    out
}

pub fn format_decision_table(reports: &[&AssessmentReport]) -> Result<String> {
    let Some(first) = reports.first() else {
        return Err(Error::invalid_arg("no reports to tabulate"));
    };
    let grid = first.theta_grid();
    validate_theta_grid(&grid)?;
    if reports.iter().any(|r| r.theta_grid() != grid) {
        return Err(Error::invalid_arg("reports use different threshold grids"));
    }
    let metrics: Vec<MetricKind> = reports.iter().map(|r| r.metric).collect();
    let mut out = table_header(&metrics);
    for (row, theta) in grid.iter().enumerate() {
        out.push_str(&fmt_level(*theta));
        for r in reports {
            out.push_str(if r.decisions[row].good { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_decision_table(path: impl AsRef<Path>, reports: &[&AssessmentReport]) -> Result<()> {
    let text = format_decision_table(reports)?;
    write_text(path.as_ref(), &text)
}

pub fn format_calibration_table(table: &CalibrationTable) -> Result<String> {
    validate_theta_grid(&table.theta_grid)?;
    let mut out = table_header(&table.metrics);
    for (theta, row) in table.theta_grid.iter().zip(&table.percent) {
        out.push_str(&fmt_level(*theta));
        for v in row {
            let _ = write!(out, ",{v:.1}");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_calibration_table(path: impl AsRef<Path>, table: &CalibrationTable) -> Result<()> {
    let text = format_calibration_table(table)?;
    write_text(path.as_ref(), &text)
}

/// Reads a decision or calibration table written by this module.
pub fn read_table(path: impl AsRef<Path>) -> Result<Table> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.get(0) != Some("theta") {
        return Err(parse_err(1, "first column must be 'theta'".into()));
    }
    let metrics = header
        .iter()
        .skip(1)
        .map(|h| {
            MetricKind::from_label(h).ok_or_else(|| parse_err(1, format!("unknown metric column '{h}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut theta_grid = Vec::new();
    let mut cells = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            parse_err(e.position().map(|p| p.line() as usize).unwrap_or(0), e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let values = record
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(line, format!("'{f}' is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        theta_grid.push(values[0]);
        cells.push(values[1..].to_vec());
    }
    Ok(Table {
        theta_grid,
        metrics,
        cells,
    })
}

/// Equal-width histogram over the metric set and the observed value.
pub fn histogram(m_p: &[f64], m_w: f64, bins: usize) -> Vec<(f64, f64, usize)> {
    let bins = bins.max(1);
    let lo = m_p.iter().copied().fold(m_w, f64::min);
    let hi = m_p.iter().copied().fold(m_w, f64::max);
    let (lo, width) = if hi > lo {
        (lo, (hi - lo) / bins as f64)
    } else {
        (lo - 0.5, 1.0 / bins as f64)
    };
    let mut counts = vec![0usize; bins];
    for v in m_p {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (lo + k as f64 * width, lo + (k + 1) as f64 * width, c))
        .collect()
}

fn overlay_text(actual: &Trajectory, pattern: &Pattern) -> Result<(String, String)> {
    let mut out = String::new();
    match pattern {
        Pattern::Mean { series } => {
            out.push_str("t,actual,pattern\n");
            for ((t, a), p) in actual.window().indices().zip(&actual.values).zip(series) {
                let _ = writeln!(out, "{t},{a},{p}");
            }
            Ok(("overlay_mean.csv".into(), out))
        }
        Pattern::QuantileFan { levels, lines } => {
            out.push_str("t,actual");
            for l in levels {
                let _ = write!(out, ",q{}", fmt_level(*l));
            }
            out.push('\n');
            for (j, (t, a)) in actual.window().indices().zip(&actual.values).enumerate() {
                let _ = write!(out, "{t},{a}");
                for line in lines {
                    let _ = write!(out, ",{}", line[j]);
                }
                out.push('\n');
            }
            Ok(("overlay_fan.csv".into(), out))
        }
        Pattern::IncrementQuantileLine { order, line } => {
            let _ = writeln!(out, "# quantile order {order}");
            out.push_str("t,increment,line\n");
            let incs = increments(&actual.values)?;
            for ((t, s), q) in (actual.start + 1..).zip(&incs).zip(line) {
                let _ = writeln!(out, "{t},{s},{q}");
            }
            Ok((String::new(), out))
        }
    }
}

/// Writes histogram, marker and overlay files into `dir`; returns the paths.
pub fn write_plot_data(dir: impl AsRef<Path>, bundle: &AssessmentBundle) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut written = Vec::new();
    let mut markers = String::from("metric,m_w,gamma1,gamma2,score\n");
    let mut mean_done = false;
    for entry in &bundle.metrics {
        let r = &entry.report;
        let mut hist = String::from("bin_left,bin_right,count\n");
        for (lo, hi, c) in histogram(&r.m_p, r.m_w, HISTOGRAM_BINS) {
            let _ = writeln!(hist, "{lo},{hi},{c}");
        }
        let path = dir.join(format!("hist_{}.csv", r.metric.id()));
        write_text(&path, &hist)?;
        written.push(path);
        let _ = writeln!(
            markers,
            "{},{},{},{},{}",
            r.metric.id(),
            r.m_w,
            r.gamma1,
            r.gamma2,
            r.score
        );

        if matches!(entry.pattern, Pattern::Mean { .. }) {
            if mean_done {
                continue;
            }
            mean_done = true;
        }
        let (name, text) = overlay_text(&bundle.actual, &entry.pattern)?;
        let name = if name.is_empty() {
            format!("overlay_{}.csv", r.metric.id())
        } else {
            name
        };
        let path = dir.join(name);
        write_text(&path, &text)?;
        written.push(path);
    }
    let path = dir.join("markers.csv");
    write_text(&path, &markers)?;
    written.push(path);
    Ok(written)
}

pub fn write_bundle_json(path: impl AsRef<Path>, bundle: &AssessmentBundle) -> Result<()> {
    let text = serde_json::to_string_pretty(bundle)
        .map_err(|e| Error::invalid_arg(format!("report serialization failed: {e}")))?;
    write_text(path.as_ref(), &(text + "\n"))
}

pub fn read_bundle_json(path: impl AsRef<Path>) -> Result<AssessmentBundle> {
    let path = path.as_ref();
    let bundle: AssessmentBundle =
        serde_json::from_str(&read_text(path)?).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
    if bundle.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "unsupported report schema_version {}",
            bundle.schema_version
        )));
    }
    Ok(bundle)
}

/// Writes `report.json`, `decision_table.csv` and all plot data into `dir`.
pub fn write_bundle(dir: impl AsRef<Path>, bundle: &AssessmentBundle) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let table = format_decision_table(&bundle.reports())?;
    let json = dir.join("report.json");
    write_bundle_json(&json, bundle)?;
    let table_path = dir.join("decision_table.csv");
    write_text(&table_path, &table)?;
    let mut written = vec![json, table_path];
    written.extend(write_plot_data(dir, bundle)?);
    Ok(written)
}
