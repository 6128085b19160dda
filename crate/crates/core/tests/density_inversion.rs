use gammaexp::benchmark::charfn::char_function;
use gammaexp::benchmark::error_metric::{fourier_density, pure_jump_endpoint};
use gammaexp::benchmark::pure_jump_series::PureJumpSeries;
use gammaexp::benchmark::simulate::simulate_paths;
use gammaexp::benchmark::{BuiltinModel, ModelKind};
use gammaexp::density::{OmegaEvaluator, PointFlag};
use gammaexp::validation::{
    expansion_normalization, fourier_normalization, gamma_inversion, gaussian_inversion, DAILY, MONTHLY, WEEKLY,
};

const KINDS: [ModelKind; 3] = [ModelKind::ConstantDiffusion, ModelKind::SqrtDiffusion, ModelKind::PureJumpOu];

#[test]
fn sqrt_diffusion_second_order_density_at_the_mode() {
    let m = BuiltinModel::reference(ModelKind::SqrtDiffusion);
    let sd = m.leading_variance(DAILY).sqrt();
    let mean = m.mean(DAILY);
    let grid: Vec<f64> = (0..401).map(|i| mean - 2.0 * sd + 4.0 * sd * i as f64 / 400.0).collect();
    let bench = fourier_density(&m, DAILY, &grid).unwrap();
    let mode = (0..grid.len()).max_by(|&i, &j| bench[i].total_cmp(&bench[j])).unwrap();
    let ev = OmegaEvaluator::new(m.spec(), DAILY, 2).unwrap();
    let p = ev.density(&grid[mode..=mode]).unwrap().partial_sums[2][0];
    let rel = (p - bench[mode]).abs() / bench[mode];
    assert!(rel <= 1e-4, "relative error {rel:e} at x={}", grid[mode]);
}

#[test]
fn pure_jump_series_matches_fourier_inversion() {
    let m = BuiltinModel::reference(ModelKind::PureJumpOu);
    for delta in [MONTHLY, WEEKLY] {
        let series = PureJumpSeries::new(&m, delta, 60).unwrap();
        assert!((series.endpoint() - pure_jump_endpoint(&m, delta)).abs() < 1e-15);
        let sd = m.leading_variance(delta).sqrt();
        let lo = series.endpoint() + 0.05 * sd;
        let grid: Vec<f64> = (0..40).map(|i| lo + 6.0 * sd * i as f64 / 39.0).collect();
        let bench = fourier_density(&m, delta, &grid).unwrap();
        for ((x, f), s) in grid.iter().zip(&bench).zip(grid.iter().map(|&x| series.density(x))) {
            assert!((s - f).abs() <= 1e-6 * f.abs().max(1e-3), "Δ={delta} x={x}: {s} vs {f}");
        }
    }
}

#[test]
fn densities_integrate_to_one() {
    for kind in KINDS {
        for report in [expansion_normalization(kind), fourier_normalization(kind)] {
            assert!(report.passed, "{}: {:e} ({})", report.name, report.measured, report.detail);
        }
    }
}

#[test]
fn gaussian_and_gamma_laws_are_recovered() {
    for report in [gaussian_inversion(), gamma_inversion()] {
        assert!(report.passed, "{}: {:e} ({})", report.name, report.measured, report.detail);
    }
}

#[test]
fn pure_jump_density_vanishes_below_the_support() {
    let m = BuiltinModel::reference(ModelKind::PureJumpOu);
    let ev = OmegaEvaluator::new(m.spec(), WEEKLY, 2).unwrap();
    let start = ev.support_start().unwrap();
    assert!((start - (m.x0 + m.eta() * WEEKLY)).abs() < 1e-15);
    let d = ev.density(&[start - 0.01, start + 0.01]).unwrap();
    assert_eq!(d.flags, vec![PointFlag::OutsideSupport, PointFlag::Regular]);
    assert!(d.partial_sums.iter().all(|p| p[0] == 0.0));
}

#[test]
fn characteristic_function_slope_is_the_mean() {
    let h = 1e-4;
    for kind in KINDS {
        let m = BuiltinModel::reference(kind);
        for delta in [MONTHLY, DAILY] {
            let phi = char_function(&m, delta, h).unwrap();
            let phi_neg = char_function(&m, delta, -h).unwrap();
            let slope = (phi - phi_neg).im / (2.0 * h);
            assert!((slope - m.mean(delta)).abs() < 1e-6, "{kind} Δ={delta}: {slope}");
            assert!((char_function(&m, delta, 0.0).unwrap().re - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn simulated_means_match_the_exact_mean() {
    for (kind, seed) in [(ModelKind::ConstantDiffusion, 31), (ModelKind::SqrtDiffusion, 32)] {
        let m = BuiltinModel::reference(kind);
        let xs = simulate_paths(&m, MONTHLY, 200, 100_000, seed).unwrap();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let z = (mean - m.mean(MONTHLY)) / (var / n).sqrt();
        assert!(z.abs() < 3.0, "{kind}: z = {z:.2}");
    }
}

#[test]
fn simulated_pure_jump_paths_stay_above_the_drift_bound() {
    let m = BuiltinModel::reference(ModelKind::PureJumpOu);
    let xs = simulate_paths(&m, WEEKLY, 200, 20_000, 33).unwrap();
    let bound = m.x0 - m.kappa * (m.x0 - m.theta).max(0.0) * WEEKLY * 1.1;
    assert!(xs.iter().all(|&x| x >= bound));
}

#[test]
fn empirical_characteristic_function_matches() {
    let omega = 5.0;
    for (kind, seed) in [(ModelKind::ConstantDiffusion, 41), (ModelKind::SqrtDiffusion, 42), (ModelKind::PureJumpOu, 43)] {
        let m = BuiltinModel::reference(kind);
        let xs = simulate_paths(&m, MONTHLY, 200, 100_000, seed).unwrap();
        let n = xs.len() as f64;
        let exact = char_function(&m, MONTHLY, omega).unwrap();
        for (part, f) in [("re", f64::cos as fn(f64) -> f64), ("im", f64::sin)] {
            let v: Vec<f64> = xs.iter().map(|x| f(omega * x)).collect();
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let target = if part == "re" { exact.re } else { exact.im };
            let z = (mean - target) / (var / n).sqrt();
            assert!(z.abs() < 3.0, "{kind} {part}: z = {z:.2}");
        }
    }
}
