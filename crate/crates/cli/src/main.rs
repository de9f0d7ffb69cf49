use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use egkcap_cli::config::{FadingSpec, GridSpec, OutputFormat, RunConfig};
use egkcap_cli::output::{AuxDocument, CapacityDocument, MgfDocument, SimulateDocument};
use egkcap_cli::{config, run, validate, CliError};

#[derive(Parser)]
#[command(
    name = "egkcap",
    version,
    about = "Ergodic capacity of diversity receivers over extended generalized-K fading"
)]
struct Cli {
    /// Worker threads for grid dispatch; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity over a mean-SNR grid, optionally checked against the sampling oracle.
    Capacity(RunArgs),
    /// Auxiliary capacity kernel with closed-form cross-checks where they exist.
    Aux(AuxArgs),
    /// Generalized transform of gamma^p and its derivative.
    Mgf(MgfArgs),
    /// Monte-Carlo capacity estimates without the analytic route.
    Simulate(RunArgs),
    /// Built-in validation suite; exits 0 only when every criterion passes.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// MRC, EGC, SC, RMSC, CASCADED, AF_MULTIHOP, GEOMETRIC_MEAN, or MIN_BOUND.
    #[arg(long)]
    scheme: Option<String>,
    /// Diversity branch count L.
    #[arg(long)]
    branches: Option<usize>,
    /// Power-mean order standing in for a limit scheme (SC, CASCADED,
    /// GEOMETRIC_MEAN, MIN_BOUND only).
    #[arg(long)]
    surrogate_order: Option<u32>,
    /// Fading descriptor; repeat once per branch for unequal branches.
    #[arg(long)]
    fading: Vec<String>,
    /// Mean-SNR grid in dB: start:stop:step, or a single value.
    #[arg(long)]
    snr_db: Option<String>,
    /// Bandwidth multiplier W; capacity columns stay per unit bandwidth.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Quadrature node count.
    #[arg(long)]
    nodes: Option<usize>,
    /// Capacity error tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Monte-Carlo sample count; setting it enables the oracle columns,
    /// 0 disables them.
    #[arg(long)]
    mc_samples: Option<u64>,
    /// Monte-Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AuxArgs {
    #[arg(long)]
    scheme: String,
    #[arg(long, default_value_t = 1)]
    branches: usize,
    #[arg(long)]
    surrogate_order: Option<u32>,
    /// Comma-separated transform points, all positive.
    #[arg(long, default_value = "0.01,0.1,1,10,100")]
    s_values: String,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MgfArgs {
    /// Fading descriptor for the single branch under inspection.
    #[arg(long)]
    fading: String,
    /// Transform power p (nonzero).
    #[arg(long)]
    power: f64,
    /// Mean-SNR grid in dB: start:stop:step, or a single value.
    #[arg(long, default_value = "10")]
    snr_db: String,
    /// Comma-separated transform points, all positive.
    #[arg(long, default_value = "0.1,1,10")]
    s_values: String,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Run a single criterion by number (1 through 9).
    #[arg(long)]
    criterion: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        // Ignore failure: the pool can already be set in tests.
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .ok();
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Capacity(args) => {
            let config = merge_config(&args, false)?;
            let resolved = config.resolve()?;
            let rows = run::capacity_rows(&resolved)?;
            let doc = CapacityDocument::new(config, rows);
            emit(&doc.render(resolved.format)?, resolved.output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate(args) => {
            let config = merge_config(&args, true)?;
            let resolved = config.resolve()?;
            let rows = run::simulate_rows(&resolved)?;
            let doc = SimulateDocument { config, rows };
            emit(&doc.render(resolved.format)?, resolved.output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Aux(args) => {
            let mut combiner = egkcap::capacity::CombinerSpec::new(
                args.scheme
                    .parse()
                    .map_err(|e: egkcap::Error| CliError::Config(format!("scheme: {e}")))?,
                args.branches,
            );
            combiner.surrogate_order = args.surrogate_order;
            let s_values = parse_s_values(&args.s_values)?;
            let rows = run::aux_rows(&combiner, &s_values)?;
            let doc = AuxDocument {
                scheme: combiner.scheme.to_string(),
                branches: combiner.branch_count,
                surrogate_order: combiner.surrogate_order,
                rows,
            };
            let format = parse_format(&args.format)?;
            emit(&doc.render(format)?, args.output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Mgf(args) => {
            let fading: FadingSpec = args
                .fading
                .parse()
                .map_err(|e| CliError::Config(format!("fading: {e}")))?;
            if !(args.power.is_finite() && args.power != 0.0) {
                return Err(CliError::Config(format!(
                    "power must be a nonzero finite real, got {}",
                    args.power
                )));
            }
            let grid: GridSpec = args.snr_db.parse().map_err(CliError::Config)?;
            grid.check().map_err(CliError::Config)?;
            let s_values = parse_s_values(&args.s_values)?;
            let rows = run::mgf_rows(&fading, &grid, args.power, &s_values)?;
            let doc = MgfDocument {
                fading: args.fading.clone(),
                rows,
            };
            let format = parse_format(&args.format)?;
            emit(&doc.render(format)?, args.output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate(args) => {
            let bin = std::env::current_exe()
                .map_err(|e| CliError::Config(format!("cannot locate own binary: {e}")))?;
            let reports = match args.criterion {
                Some(index) => vec![validate::run_one(index, &bin)
                    .ok_or_else(|| {
                        CliError::Config(format!("criterion {index} does not exist; use 1-9"))
                    })?],
                None => validate::run_all(&bin),
            };
            let mut all_passed = true;
            for report in &reports {
                println!("{}", report.line());
                all_passed &= report.passed;
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!(
                "{} of {} criteria passed",
                reports.len() - failed,
                reports.len()
            );
            Ok(if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

/// File config first, then flag overrides; required fields checked after
/// the overlay so they can come from either side.
fn merge_config(args: &RunArgs, force_mc: bool) -> Result<RunConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("config {}: {e}", path.display()))
            })?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig {
            scheme: String::new(),
            branches: 1,
            surrogate_order: None,
            fading: Vec::new(),
            snr_db: GridSpec::single(10.0),
            bandwidth: 1.0,
            nodes: egkcap::capacity::QuadratureSpec::default().node_count,
            tolerance: egkcap::capacity::QuadratureSpec::default().tolerance,
            monte_carlo: config::McConfig::default(),
            format: OutputFormat::Csv,
            output: None,
        },
    };
    if let Some(s) = &args.scheme {
        config.scheme = s.clone();
    }
    if let Some(b) = args.branches {
        config.branches = b;
    }
    if args.surrogate_order.is_some() {
        config.surrogate_order = args.surrogate_order;
    }
    if !args.fading.is_empty() {
        config.fading = args.fading.clone();
    }
    match &args.snr_db {
        Some(text) => config.snr_db = text.parse().map_err(CliError::Config)?,
        None if args.config.is_none() => {
            return Err(CliError::Config("snr_db is required".into()))
        }
        None => {}
    }
    if let Some(b) = args.bandwidth {
        config.bandwidth = b;
    }
    if let Some(n) = args.nodes {
        config.nodes = n;
    }
    if let Some(t) = args.tolerance {
        config.tolerance = t;
    }
    if let Some(n) = args.mc_samples {
        config.monte_carlo.enabled = n > 0;
        if n > 0 {
            config.monte_carlo.samples = n;
        }
    }
    if let Some(s) = args.seed {
        config.monte_carlo.seed = s;
    }
    if let Some(f) = &args.format {
        config.format = f.parse().map_err(CliError::Config)?;
    }
    if let Some(o) = &args.output {
        config.output = Some(o.display().to_string());
    }
    if config.scheme.is_empty() {
        return Err(CliError::Config("scheme is required".into()));
    }
    if config.fading.is_empty() {
        return Err(CliError::Config("fading is required".into()));
    }
    if force_mc {
        if args.mc_samples == Some(0) {
            return Err(CliError::Config(
                "simulate needs a positive mc_samples".into(),
            ));
        }
        config.monte_carlo.enabled = true;
    }
    Ok(config)
}

fn parse_s_values(text: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, CliError> = text
        .split(',')
        .map(|part| {
            part.trim().parse::<f64>().map_err(|_| {
                CliError::Config(format!("s_values: {part:?} is not a number"))
            })
        })
        .collect();
    let values = values?;
    if values.is_empty() {
        return Err(CliError::Config("s_values must be non-empty".into()));
    }
    if let Some(bad) = values.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
        return Err(CliError::Config(format!(
            "s_values must all be positive and finite, got {bad}"
        )));
    }
    Ok(values)
}

fn parse_format(text: &str) -> Result<OutputFormat, CliError> {
    text.parse().map_err(CliError::Config)
}

fn emit(text: &str, output: Option<&std::path::Path>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            CliError::Config(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
