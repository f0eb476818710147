mod common;

use common::median;
use hiqa::estimation::{fit_exponential_window, fit_linear_window, simulate_from_window_model, Curve, ExpFitOptions};
use hiqa::{DegradationModel, DegradationParams};
use rayon::prelude::*;

fn reference_model() -> DegradationModel {
    DegradationModel::new(DegradationParams::reference()).unwrap()
}

#[test]
fn linear_fit_recovers_second_regime() {
    let model = reference_model();
    let window = model.params().second_regime();
    let a2 = model.coefficients().a2;
    let (s2, s3) = (model.params().sigma2, model.params().sigma3);
    let fits: Vec<(f64, f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let data = model.simulate_trajectory(window, seed).unwrap();
            let fit = fit_linear_window(&data).unwrap();
            let Curve::Linear { slope, .. } = fit.trend else { unreachable!() };
            (slope, fit.scale_at(window.start), fit.scale_at(window.end))
        })
        .collect();
    let mut slope_err: Vec<f64> = fits.iter().map(|f| (f.0 - a2).abs() / a2).collect();
    let mut start_err: Vec<f64> = fits.iter().map(|f| (f.1 - s2).abs() / s2).collect();
    let mut end_err: Vec<f64> = fits.iter().map(|f| (f.2 - s3).abs() / s3).collect();
    let (e1, e2, e3) = (median(&mut slope_err), median(&mut start_err), median(&mut end_err));
    assert!(e1 <= 0.10, "slope median error {e1}");
    assert!(e2 <= 0.15, "scale start median error {e2}");
    assert!(e3 <= 0.15, "scale end median error {e3}");
}

#[test]
fn exponential_fit_recovers_third_regime_trend() {
    let model = reference_model();
    let window = model.params().third_regime();
    let mid = (window.start + window.end) / 2;
    let true_mid = model.trend_at(mid).unwrap();
    let true_end = model.trend_at(window.end).unwrap();
    let errs: Vec<(f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let data = model.simulate_trajectory(window, 500 + seed).unwrap();
            let fit = fit_exponential_window(&data, &ExpFitOptions::default()).unwrap();
            (
                (fit.trend_at(mid) - true_mid).abs() / true_mid.abs(),
                (fit.trend_at(window.end) - true_end).abs() / true_end.abs(),
            )
        })
        .collect();
    let mut mid_err: Vec<f64> = errs.iter().map(|e| e.0).collect();
    let mut end_err: Vec<f64> = errs.iter().map(|e| e.1).collect();
    let (m, e) = (median(&mut mid_err), median(&mut end_err));
    assert!(m <= 0.10, "midpoint median error {m}");
    assert!(e <= 0.10, "endpoint median error {e}");
}

#[test]
fn window_model_simulation_matches_scale() {
    let model = reference_model();
    let window = model.params().second_regime();
    let data = model.simulate_trajectory(window, 42).unwrap();
    let fit = fit_linear_window(&data).unwrap();
    let ens = simulate_from_window_model(&fit, window, 1000, 9).unwrap();
    for (j, t) in window.indices().enumerate() {
        let col = ens.column(j);
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let scale = fit.scale_at(t);
        assert!((sd - scale).abs() <= 0.10 * scale, "t={t} sd={sd} scale={scale}");
    }
}

#[test]
fn refit_of_simulated_series_is_stable() {
    let model = reference_model();
    let window = model.params().second_regime();
    let fit = fit_linear_window(&model.simulate_trajectory(window, 1).unwrap()).unwrap();
    let Curve::Linear { slope, .. } = fit.trend else { unreachable!() };
    let resim = simulate_from_window_model(&fit, window, 100, 77).unwrap();
    let mut errs: Vec<f64> = (0..100)
        .map(|i| {
            let refit = fit_linear_window(&resim.trajectory(i)).unwrap();
            assert!(refit.scale_at(window.start) > 0.0 && refit.scale_at(window.end) > 0.0);
            let Curve::Linear { slope: b, .. } = refit.trend else { unreachable!() };
            (b - slope).abs() / slope.abs()
        })
        .collect();
    let e = median(&mut errs);
    assert!(e <= 0.10, "refit slope median error {e}");
}
