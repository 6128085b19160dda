//! Reporting grids and maximum relative errors against the Fourier benchmark.

use super::inversion::{default_config, FourierDensity};
use super::models::{BuiltinModel, ModelKind};
use crate::density::OmegaEvaluator;
use crate::error::{Error, Result};

/// Points enter the error region when the benchmark density is at least this
/// fraction of its maximum on the grid.
pub const REGION_THRESHOLD: f64 = 1e-3;
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Lower support endpoint `e^{−κΔ}x₀ + θ(1 − e^{−κΔ})` of the pure-jump model.
pub fn pure_jump_endpoint(model: &BuiltinModel, delta: f64) -> f64 {
    let e = (-model.kappa * delta).exp();
    e * model.x0 + model.theta * (1.0 - e)
}

/// Uniform grid covering `mean ± 10 sd` plus `20/b` on the jump side. For
/// the pure-jump model the grid starts one step above the support endpoint.
pub fn reporting_grid(model: &BuiltinModel, delta: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument("grid needs at least two points".into()));
    }
    let sd = model.leading_variance(delta).sqrt();
    let mean = model.mean(delta);
    let hi = mean + 10.0 * sd + 20.0 / model.b;
    let mut lo = mean - 10.0 * sd;
    if model.kind == ModelKind::PureJumpOu {
        let c = pure_jump_endpoint(model, delta);
        lo = lo.max(c);
        lo += (hi - lo) / n as f64;
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| lo + step * i as f64).collect())
}

/// Benchmark densities on a grid.
pub fn fourier_density(model: &BuiltinModel, delta: f64, grid: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = grid_bounds(grid)?;
    let fd = FourierDensity::for_model(model, delta, default_config(model, delta, lo, hi)?)?;
    fd.densities(grid)
}

fn grid_bounds(grid: &[f64]) -> Result<(f64, f64)> {
    match (grid.first(), grid.last()) {
        (Some(&lo), Some(&hi)) if hi > lo => Ok((lo, hi)),
        _ => Err(Error::InvalidArgument("grid must be increasing with at least two points".into())),
    }
}

/// Indices with `p ≥ REGION_THRESHOLD · max p`.
pub fn error_region(benchmark: &[f64]) -> Vec<usize> {
    let peak = benchmark.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..benchmark.len())
        .filter(|&i| benchmark[i] >= REGION_THRESHOLD * peak)
        .collect()
}

/// `max_{x∈D} |p^{(M)}(x) − p(x)| / p(x)`.
pub fn max_relative_error(approx: &[f64], benchmark: &[f64], region: &[usize]) -> Result<f64> {
    if region.is_empty() {
        return Err(Error::InvalidArgument("error region is empty".into()));
    }
    Ok(region
        .iter()
        .map(|&i| (approx[i] - benchmark[i]).abs() / benchmark[i])
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug)]
pub struct ErrorRow {
    pub order: usize,
    pub max_relative_error: f64,
    /// Location of the maximum.
    pub argmax: f64,
}

/// Maximum relative errors of the partial sums `p^{(0)}, …, p^{(M)}`.
pub fn error_table(model: &BuiltinModel, delta: f64, max_order: usize, grid: &[f64]) -> Result<Vec<ErrorRow>> {
    let bench = fourier_density(model, delta, grid)?;
    let region = error_region(&bench);
    if region.is_empty() {
        return Err(Error::InvalidArgument("error region is empty".into()));
    }
    let exp = OmegaEvaluator::new(model.spec(), delta, max_order)?.density(grid)?;
    (0..=max_order)
        .map(|m| {
            let p = &exp.partial_sums[m];
            let (i, e) = region
                .iter()
                .map(|&i| (i, (p[i] - bench[i]).abs() / bench[i]))
                .fold((region[0], f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            if !e.is_finite() {
                return Err(Error::NonFinite("relative error"));
            }
            Ok(ErrorRow {
                order: m,
                max_relative_error: e,
                argmax: grid[i],
            })
        })
        .collect()
}
