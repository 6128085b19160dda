use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gammaexp_cli::commands;
use gammaexp_cli::config::{parse_methods, parse_orders, Deltas, Grid, Method, RunConfig};
use gammaexp_cli::output::{emit, write_file};
use gammaexp_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "gammaexp", version, about = "Transition density expansions for gamma-driven jump-diffusions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expansion, Fourier and Monte Carlo densities on a grid.
    Density(RunArgs),
    /// Maximum relative errors of the expansion against the Fourier benchmark.
    ErrorTable(RunArgs),
    /// Terminal values of simulated paths.
    Simulate(RunArgs),
    /// Runs the invariant suite and prints a JSON report.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// pure-jump-ou, constant-diffusion or sqrt-diffusion.
    #[arg(long)]
    model: Option<String>,
    /// `M` for orders 0..=M, or a comma list.
    #[arg(long)]
    order: Option<String>,
    /// Interval such as 1/252; error-table accepts a comma list.
    #[arg(long)]
    delta: Option<String>,
    /// xmin:xmax:n
    #[arg(long)]
    grid: Option<String>,
    /// Comma list of expansion, fourier, mc.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Euler steps per path.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 20240601)]
    seed: u64,
    /// Smaller Monte Carlo samples; the z-score checks widen accordingly.
    #[arg(long)]
    reduced_mc: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true, default_value_t = 0.0)]
    perturb_closed_form: f64,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.model {
            cfg.model = Some(m);
            cfg.custom = None;
        }
        if let Some(o) = self.order {
            cfg.orders = parse_orders(&o)?;
        }
        if let Some(d) = self.delta {
            cfg.delta = Some(d.parse::<Deltas>()?);
        }
        if let Some(g) = self.grid {
            cfg.grid = Some(g.parse::<Grid>()?);
        }
        if let Some(m) = self.methods {
            cfg.methods = parse_methods(&m)?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = self.out {
            cfg.out = Some(o);
        }
        if let Some(p) = self.paths {
            cfg.mc.paths = p;
        }
        if let Some(s) = self.steps {
            cfg.mc.steps = s;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Density(args) => {
            let cfg = args.into_config()?;
            let (result, summary) = commands::density(&cfg)?;
            let body = result.to_csv_string()?;
            emit(cfg.out.as_deref(), &body, &commands::metadata("density", &cfg, summary)?)?;
            Ok(true)
        }
        Command::ErrorTable(args) => {
            let mut cfg = args.into_config()?;
            if !cfg.methods.contains(&Method::Fourier) {
                cfg.methods.push(Method::Fourier);
            }
            let (body, summary) = commands::error_table_csv(&cfg)?;
            emit(cfg.out.as_deref(), &body, &commands::metadata("error-table", &cfg, summary)?)?;
            Ok(true)
        }
        Command::Simulate(args) => {
            let cfg = args.into_config()?;
            let (body, summary) = commands::simulate_csv(&cfg)?;
            emit(cfg.out.as_deref(), &body, &commands::metadata("simulate", &cfg, summary)?)?;
            Ok(true)
        }
        Command::Validate(args) => {
            if !args.perturb_closed_form.is_finite() {
                return Err(CliError::config("perturb-closed-form", "must be finite"));
            }
            let report = commands::validate(args.reduced_mc, args.seed, args.perturb_closed_form);
            let json = serde_json::to_string_pretty(&report)?;
            match &args.out {
                Some(path) => write_file(path, json.as_bytes())?,
                None => println!("{json}"),
            }
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
