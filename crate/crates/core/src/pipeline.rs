//! End-to-end runs combining simulation or estimation with assessment.

use crate::assessment::{validate_theta_grid, Reference};
use crate::calibration::{split_window, regime_window};
use crate::degradation::DegradationModel;
use crate::error::{Error, Result};
use crate::estimation::{fit_window, simulate_from_window_model, WindowModel};
use crate::io::config::RunConfig;
use crate::io::hi_csv::read_hi_csv;
use crate::io::report::{AssessmentBundle, MetricAssessment, REPORT_SCHEMA_VERSION};
use crate::metrics::{MetricConfig, MetricKind};
use crate::rng::child_seed;
use crate::series::{PrognosisEnsemble, Trajectory, Window};

/// Options shared by every assessment run.
#[derive(Debug, Clone)]
pub struct AssessOptions {
    pub metrics: Vec<MetricKind>,
    pub theta_grid: Vec<f64>,
    pub decision_theta: f64,
    pub metric_config: MetricConfig,
    pub seed: Option<u64>,
    pub name: Option<String>,
}

impl AssessOptions {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            metrics: cfg.metrics.clone(),
            theta_grid: cfg.decision_grid(),
            decision_theta: cfg.decision_theta,
            metric_config: cfg.metric_config.clone(),
            seed: Some(cfg.seed),
            name: cfg.name.clone(),
        }
    }
}

/// Assesses `actual` against `ensemble` under every selected metric.
pub fn run_assessment(
    ensemble: &PrognosisEnsemble,
    actual: &Trajectory,
    opts: &AssessOptions,
    model: Option<WindowModel>,
) -> Result<AssessmentBundle> {
    validate_theta_grid(&opts.theta_grid)?;
    if opts.metrics.is_empty() {
        return Err(Error::invalid_arg("no metrics selected"));
    }
    let metrics = opts
        .metrics
        .iter()
        .map(|&m| {
            let reference = Reference::new(ensemble, m, &opts.metric_config)?;
            let report = reference.report(actual, &opts.theta_grid, opts.seed)?;
            Ok(MetricAssessment {
                report,
                pattern: reference.pattern().clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AssessmentBundle {
        schema_version: REPORT_SCHEMA_VERSION,
        name: opts.name.clone(),
        seed: opts.seed,
        window: ensemble.window(),
        decision_theta: opts.decision_theta,
        actual: actual.clone(),
        model,
        metrics,
    })
}

/// Windows and fitted model of a measured series.
#[derive(Debug, Clone)]
pub struct DataRun {
    pub series: Trajectory,
    pub regime: Window,
    pub test: Window,
    pub model: WindowModel,
}

/// Reads the configured series, fits the window model on the whole regime
/// and picks the test window: the trailing part after the split, or the
/// whole regime without a split.
pub fn prepare_data_run(cfg: &RunConfig) -> Result<DataRun> {
    let data = cfg
        .data
        .as_ref()
        .ok_or_else(|| Error::Config("this run needs a [data] section".into()))?;
    let series = read_hi_csv(&data.path)?;
    let regime = data.regime_window(series.window())?;
    let test = match data.split {
        Some(split) => split_window(regime, split)?.1,
        None => regime,
    };
    let model = fit_window(&series.slice(regime)?, data.fit_kind())?;
    Ok(DataRun {
        series,
        regime,
        test,
        model,
    })
}

/// Fits the configured series and assesses its test window against an
/// ensemble simulated from the fitted model.
pub fn run_data_assessment(cfg: &RunConfig) -> Result<AssessmentBundle> {
    let run = prepare_data_run(cfg)?;
    let ensemble = simulate_from_window_model(&run.model, run.test, cfg.n_prognoses, cfg.seed)?;
    let actual = run.series.slice(run.test)?;
    run_assessment(&ensemble, &actual, &AssessOptions::from_config(cfg), Some(run.model))
}

/// Assesses one simulated series against an ensemble from the same model on
/// the configured test window. Seeds follow the calibration layout, so the
/// series is the first calibration test series.
pub fn run_model_assessment(cfg: &RunConfig) -> Result<AssessmentBundle> {
    let spec = cfg.calibration_spec()?;
    let (_, window) = regime_window(&spec.params, spec.regime, spec.split)?;
    let model = DegradationModel::new(spec.params)?.with_noise_multiplier(spec.noise_multiplier)?;
    let ensemble = model.simulate_ensemble(window, cfg.n_prognoses, child_seed(cfg.seed, 0))?;
    let actual = model.simulate_trajectory(window, child_seed(child_seed(cfg.seed, 1), 0))?;
    run_assessment(&ensemble, &actual, &AssessOptions::from_config(cfg), None)
}
