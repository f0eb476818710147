//! Command-line front end.
//!
//! Exit codes: 0 on success (for `assess`: good prediction under every
//! selected metric at the decision threshold), 2 when `assess` finds a bad
//! prediction, 1 on any error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hiqa::calibration::Regime;
use hiqa::degradation::DegradationParams;
use hiqa::estimation::{fit_window, simulate_from_window_model, ModelKind, WindowModel};
use hiqa::io::config::{ModelSection, RunConfig};
use hiqa::io::hi_csv::{read_ensemble_csv, read_hi_csv, write_ensemble_csv, write_trajectory_csv};
use hiqa::io::report::{
    format_calibration_table, format_decision_table, read_bundle_json, write_bundle,
    write_plot_data, AssessmentBundle,
};
use hiqa::io::{read_text, write_text};
use hiqa::metrics::MetricKind;
use hiqa::pipeline::{run_assessment, run_data_assessment, run_model_assessment, AssessOptions};
use hiqa::{DegradationModel, Error, Result, Window};

#[derive(Parser, Debug)]
#[command(name = "hiqa", version, about = "Assess health-indicator prognoses against measured series")]
struct Cli {
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Config file or preset name.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated metrics (mse, mape, sqif, pof, tuff).
    #[arg(long, global = true, value_delimiter = ',')]
    metrics: Option<Vec<String>>,
    /// Comma-separated threshold grid in percent.
    #[arg(long, global = true, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the degradation model.
    Simulate(SimulateArgs),
    /// Assess an observed series against a prognosis ensemble.
    Assess(AssessArgs),
    /// Tabulate good-prediction rates under the null on simulated data.
    Calibrate(CalibrateArgs),
    /// Fit a window model to a measured series.
    Estimate(EstimateArgs),
    /// Rewrite tables and plot data from a saved report.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Window `start,end` (default: the whole lifetime).
    #[arg(long, value_parser = parse_window)]
    window: Option<Window>,
    /// Number of trajectories; 1 writes `trajectory.csv`, more `ensemble.csv`.
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    noise_multiplier: Option<f64>,
}

#[derive(Args, Debug)]
struct AssessArgs {
    /// Prognosis ensemble CSV (`t,T1,...,Tn`).
    #[arg(long)]
    ensemble: Option<PathBuf>,
    /// Observed series CSV; sliced to the prognosis window.
    #[arg(long)]
    actual: Option<PathBuf>,
    /// Window model TOML to simulate prognoses from.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Window `start,end` for prognoses from `--model` (default: the
    /// window the model was fitted on).
    #[arg(long, value_parser = parse_window)]
    window: Option<Window>,
    /// Measured series CSV; overrides the data path of the config.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Decision threshold in percent.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    n_prognoses: Option<usize>,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    #[arg(long, value_parser = parse_regime)]
    regime: Option<Regime>,
    #[arg(long)]
    n_prognoses: Option<usize>,
    #[arg(long)]
    n_tests: Option<usize>,
    #[arg(long)]
    split: Option<f64>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Measured series CSV; defaults to the data path of the config.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Window `start,end` to fit; defaults to the configured regime.
    #[arg(long, value_parser = parse_window)]
    window: Option<Window>,
    #[arg(long, value_parser = parse_kind)]
    kind: Option<ModelKind>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Saved `report.json`.
    #[arg(long)]
    report: PathBuf,
}

fn parse_window(s: &str) -> std::result::Result<Window, String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected start,end, got '{s}'"))?;
    let a = a.trim().parse::<usize>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<usize>().map_err(|e| e.to_string())?;
    Window::new(a, b).map_err(|e| e.to_string())
}

fn parse_regime(s: &str) -> std::result::Result<Regime, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let mut cfg = match &cli.config {
        Some(spec) => RunConfig::load(spec)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(metrics) = &cli.metrics {
        cfg.metrics = metrics
            .iter()
            .map(|m| m.parse::<MetricKind>())
            .collect::<Result<Vec<_>>>()?;
    }
    if let Some(theta) = &cli.theta {
        cfg.theta = Some(theta.clone());
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));

    match cli.command {
        Command::Simulate(args) => simulate(&cfg, &out, args),
        Command::Assess(args) => assess(cfg, &out, args),
        Command::Calibrate(args) => calibrate(cfg, &out, args),
        Command::Estimate(args) => estimate(&cfg, &out, args),
        Command::Report(args) => report(&cli.out, args),
    }
}

fn model_section(cfg: &RunConfig) -> ModelSection {
    cfg.model.clone().unwrap_or(ModelSection {
        params: DegradationParams::reference(),
        noise_multiplier: 1.0,
    })
}

fn simulate(cfg: &RunConfig, out: &Path, args: SimulateArgs) -> Result<u8> {
    let section = model_section(cfg);
    let model = DegradationModel::new(section.params)?
        .with_noise_multiplier(args.noise_multiplier.unwrap_or(section.noise_multiplier))?;
    let window = args.window.unwrap_or_else(|| section.params.full_window());
    let path = if args.n == 1 {
        let path = out.join("trajectory.csv");
        write_trajectory_csv(&path, &model.simulate_trajectory(window, cfg.seed)?)?;
        path
    } else {
        let path = out.join("ensemble.csv");
        write_ensemble_csv(&path, &model.simulate_ensemble(window, args.n, cfg.seed)?)?;
        path
    };
    println!("wrote {}", path.display());
    Ok(0)
}

fn assess(mut cfg: RunConfig, out: &Path, args: AssessArgs) -> Result<u8> {
    if let Some(tau) = args.tau {
        cfg.decision_theta = tau;
    }
    if let Some(n) = args.n_prognoses {
        cfg.n_prognoses = n;
    }
    if let Some(path) = &args.data {
        let data = cfg
            .data
            .as_mut()
            .ok_or_else(|| Error::Config("--data needs a config with a [data] section".into()))?;
        data.path = path.clone();
    }
    cfg.validate()?;
    let opts = AssessOptions::from_config(&cfg);

    let bundle = match (&args.ensemble, &args.model, &args.actual) {
        (Some(_), Some(_), _) => {
            return Err(Error::InvalidArgument(
                "--ensemble and --model are mutually exclusive".into(),
            ))
        }
        (Some(ensemble), None, Some(actual)) => {
            let ensemble = read_ensemble_csv(ensemble)?;
            let actual = read_hi_csv(actual)?.slice(ensemble.window())?;
            run_assessment(&ensemble, &actual, &opts, None)?
        }
        (None, Some(model), Some(actual)) => {
            let model: WindowModel = toml::from_str(&read_text(model)?)
                .map_err(|e| Error::Config(format!("{}: {}", model.display(), e.message())))?;
            model.validate()?;
            let window = args.window.unwrap_or(model.fitted_on);
            let ensemble = simulate_from_window_model(&model, window, cfg.n_prognoses, cfg.seed)?;
            let actual = read_hi_csv(actual)?.slice(window)?;
            run_assessment(&ensemble, &actual, &opts, Some(model))?
        }
        (Some(_), None, None) | (None, Some(_), None) => {
            return Err(Error::InvalidArgument("--actual is required".into()))
        }
        (None, None, Some(_)) => {
            return Err(Error::InvalidArgument(
                "--actual needs --ensemble or --model".into(),
            ))
        }
        (None, None, None) if cfg.data.is_some() => run_data_assessment(&cfg)?,
        (None, None, None) if cfg.model.is_some() => run_model_assessment(&cfg)?,
        (None, None, None) => {
            return Err(Error::InvalidArgument(
                "nothing to assess: pass --ensemble/--model with --actual, or a config with [data] or [model]"
                    .into(),
            ))
        }
    };

    write_bundle(out, &bundle)?;
    print_summary(&bundle)?;
    Ok(if bundle.is_good() { 0 } else { 2 })
}

fn print_summary(bundle: &AssessmentBundle) -> Result<()> {
    println!(
        "window {}  n = {}  decision threshold {}",
        bundle.window,
        bundle.metrics.first().map(|m| m.report.meta.n).unwrap_or(0),
        bundle.decision_theta
    );
    for m in &bundle.metrics {
        let r = &m.report;
        let verdict = if r.score > bundle.decision_theta { "good" } else { "bad" };
        println!(
            "{:<14} m_w = {:<14.6e} score = {:>6.2}  {verdict}",
            r.metric.label(),
            r.m_w,
            r.score
        );
    }
    print!("{}", format_decision_table(&bundle.reports())?);
    Ok(())
}

fn calibrate(mut cfg: RunConfig, out: &Path, args: CalibrateArgs) -> Result<u8> {
    if cfg.model.is_none() {
        cfg.model = Some(model_section(&cfg));
    }
    let mut section = cfg.calibration.clone().unwrap_or(hiqa::io::config::CalibrationSection {
        regime: Regime::Second,
        split: 0.8,
    });
    if let Some(regime) = args.regime {
        section.regime = regime;
    }
    if let Some(split) = args.split {
        section.split = split;
    }
    cfg.calibration = Some(section);
    if let Some(n) = args.n_prognoses {
        cfg.n_prognoses = n;
    }
    if let Some(n) = args.n_tests {
        cfg.n_tests = n;
    }
    let spec = cfg.calibration_spec()?;
    let table = hiqa::run_calibration(&spec)?;
    let text = format_calibration_table(&table)?;
    let path = out.join("calibration_table.csv");
    write_text(&path, &text)?;
    println!("test window {}", spec.test_window()?);
    print!("{text}");
    Ok(0)
}

fn estimate(cfg: &RunConfig, out: &Path, args: EstimateArgs) -> Result<u8> {
    let data_path = args
        .data
        .clone()
        .or_else(|| cfg.data.as_ref().map(|d| d.path.clone()))
        .ok_or_else(|| Error::InvalidArgument("--data is required without a [data] config".into()))?;
    let series = read_hi_csv(&data_path)?;
    let window = match (args.window, &cfg.data) {
        (Some(w), _) => w,
        (None, Some(data)) => data.regime_window(series.window())?,
        (None, None) => series.window(),
    };
    let kind = args
        .kind
        .or_else(|| cfg.data.as_ref().map(|d| d.fit_kind()))
        .unwrap_or(ModelKind::Linear);
    let model = fit_window(&series.slice(window)?, kind)?;
    let text = toml::to_string(&model).map_err(|e| Error::Config(e.to_string()))?;
    let path = out.join("window_model.toml");
    write_text(&path, &text)?;
    print!("{text}");
    println!("wrote {}", path.display());
    Ok(0)
}

fn report(out: &Option<PathBuf>, args: ReportArgs) -> Result<u8> {
    let bundle = read_bundle_json(&args.report)?;
    let dir = match out {
        Some(dir) => dir.clone(),
        None => args
            .report
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default(),
    };
    let table = format_decision_table(&bundle.reports())?;
    write_text(&dir.join("decision_table.csv"), &table)?;
    let written = write_plot_data(&dir, &bundle)?;
    print!("{table}");
    println!("wrote {} plot files to {}", written.len(), dir.display());
    Ok(0)
}
