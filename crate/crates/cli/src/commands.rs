//! The four subcommands. Each returns the text it emits so callers decide
//! where it goes.

use gammaexp::benchmark::closed_form::Perturbation;
use gammaexp::benchmark::error_metric::{error_table, fourier_density, reporting_grid, DEFAULT_GRID_POINTS, REGION_THRESHOLD};
use gammaexp::benchmark::simulate::simulate_paths;
use gammaexp::benchmark::BuiltinModel;
use gammaexp::density::{OmegaEvaluator, PointFlag};
use gammaexp::validation::{run_all, CheckReport, McBudget};
use serde::Serialize;

use crate::config::{Method, ResolvedModel, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{DensityResult, Metadata};

fn require_builtin<'a>(model: &'a ResolvedModel, what: &str) -> Result<&'a BuiltinModel> {
    model
        .builtin()
        .ok_or_else(|| CliError::config("model", format!("{what} needs a built-in model")))
}

/// Histogram estimate with bins of one grid step centred on each point.
fn histogram(samples: &mut [f64], grid: &[f64]) -> Vec<Option<f64>> {
    samples.sort_by(f64::total_cmp);
    let h = grid[1] - grid[0];
    let n = samples.len() as f64;
    grid.iter()
        .map(|&x| {
            let lo = samples.partition_point(|&s| s < x - 0.5 * h);
            let hi = samples.partition_point(|&s| s < x + 0.5 * h);
            Some((hi - lo) as f64 / (n * h))
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct DensitySummary {
    pub delta: f64,
    pub rows: usize,
    pub flagged: usize,
    pub support_start: Option<f64>,
}

pub fn density(cfg: &RunConfig) -> Result<(DensityResult, DensitySummary)> {
    let model = cfg.resolve_model()?;
    let delta = cfg.single_delta()?.value();
    let orders = cfg.validated_orders()?;
    let methods = cfg.validated_methods()?;
    let grid = cfg
        .grid
        .as_ref()
        .ok_or_else(|| CliError::config("grid", "required"))?
        .points();
    let mut result = DensityResult {
        x: grid.clone(),
        columns: Vec::new(),
    };
    let mut flagged = 0;
    let mut support_start = None;
    for method in methods {
        match method {
            Method::Expansion => {
                let max = *orders.last().expect("orders are nonempty");
                let ev = OmegaEvaluator::new(model.spec(), delta, max)?;
                support_start = ev.support_start();
                let d = ev.density(&grid)?;
                flagged = d.flags.iter().filter(|&&f| f != PointFlag::Regular).count();
                for &m in &orders {
                    let col = d.partial_sums[m]
                        .iter()
                        .zip(&d.flags)
                        .map(|(&v, &f)| (f == PointFlag::Regular).then_some(v))
                        .collect();
                    result.columns.push((format!("p_m{m}"), col));
                }
            }
            Method::Fourier => {
                let m = require_builtin(&model, "the fourier method")?;
                let p = fourier_density(m, delta, &grid)?;
                result.columns.push(("p_fourier".into(), p.into_iter().map(Some).collect()));
            }
            Method::Mc => {
                let m = require_builtin(&model, "the mc method")?;
                cfg.validate_mc()?;
                let mut xs = simulate_paths(m, delta, cfg.mc.steps, cfg.mc.paths, cfg.seed)?;
                result.columns.push(("p_mc".into(), histogram(&mut xs, &grid)));
            }
        }
    }
    let summary = DensitySummary {
        delta,
        rows: grid.len(),
        flagged,
        support_start,
    };
    Ok((result, summary))
}

#[derive(Debug, Serialize)]
pub struct ErrorTableSummary {
    pub region: String,
    pub grid_points: usize,
}

pub fn error_table_csv(cfg: &RunConfig) -> Result<(String, ErrorTableSummary)> {
    let model = cfg.resolve_model()?;
    let m = require_builtin(&model, "error-table")?;
    let orders = cfg.validated_orders()?;
    let max = *orders.last().expect("orders are nonempty");
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["model", "delta", "order", "max_rel_error", "argmax"])?;
    let mut grid_points = 0;
    for delta in cfg.deltas()? {
        let grid = match &cfg.grid {
            Some(g) => g.points(),
            None => reporting_grid(m, delta.value(), DEFAULT_GRID_POINTS)?,
        };
        grid_points = grid.len();
        let rows = error_table(m, delta.value(), max, &grid)?;
        for row in rows.iter().filter(|r| orders.contains(&r.order)) {
            out.write_record([
                m.kind.id().to_string(),
                delta.literal().to_string(),
                row.order.to_string(),
                format!("{:e}", row.max_relative_error),
                format!("{:e}", row.argmax),
            ])?;
        }
    }
    let bytes = out.into_inner().map_err(|e| CliError::io("<csv>", e.into_error()))?;
    let summary = ErrorTableSummary {
        region: format!("p_fourier >= {REGION_THRESHOLD:e} * max p_fourier"),
        grid_points,
    };
    Ok((String::from_utf8(bytes).expect("csv output is UTF-8"), summary))
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub paths: usize,
    pub steps: usize,
    pub sample_mean: f64,
    pub exact_mean: f64,
}

pub fn simulate_csv(cfg: &RunConfig) -> Result<(String, SimulateSummary)> {
    let model = cfg.resolve_model()?;
    let m = require_builtin(&model, "simulate")?;
    let delta = cfg.single_delta()?.value();
    cfg.validate_mc()?;
    let xs = simulate_paths(m, delta, cfg.mc.steps, cfg.mc.paths, cfg.seed)?;
    let mut body = String::with_capacity(16 * xs.len());
    body.push_str("x\n");
    for x in &xs {
        body.push_str(&format!("{x:e}\n"));
    }
    let summary = SimulateSummary {
        paths: cfg.mc.paths,
        steps: cfg.mc.steps,
        sample_mean: xs.iter().sum::<f64>() / xs.len() as f64,
        exact_mean: m.mean(delta),
    };
    Ok((body, summary))
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub schema: u32,
    pub seed: u64,
    pub budget: McBudget,
    pub closed_form_perturbation: f64,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

pub fn validate(reduced: bool, seed: u64, perturbation: f64) -> ValidationReport {
    let budget = if reduced { McBudget::REDUCED } else { McBudget::FULL };
    let checks = run_all(budget, seed, Perturbation { relative: perturbation });
    ValidationReport {
        schema: crate::config::SCHEMA,
        seed,
        budget,
        closed_form_perturbation: perturbation,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

pub fn metadata<'a, T: Serialize>(command: &'a str, cfg: &'a RunConfig, summary: T) -> Result<Metadata<'a, T>> {
    Ok(Metadata::new(command, cfg.resolve_model()?.label(), summary, cfg))
}
