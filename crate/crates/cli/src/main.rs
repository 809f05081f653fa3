//! `gfb`: run validations, flows, curvature sweeps and isotropy scans from a JSON config.

mod commands;
mod config;
mod error;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Exit code for a failed validation.
const EXIT_FAIL: u8 = 1;
/// Exit code for bad configuration, unknown ids or I/O trouble.
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "gfb", version, about = "Generalised frame bundle toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the report and CSV files (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog entries, or show one with --id.
    Catalog {
        #[arg(long)]
        id: Option<String>,
    },
    /// Check the structure equation on seeded samples; exit 1 on failure.
    Validate(RunArgs),
    /// Integrate fundamental flows and path schedules.
    Flow(RunArgs),
    /// Curvature panels on points and seeded samples.
    Curvature(RunArgs),
    /// Isotropy groups of points of a locally Klein example.
    Isotropy(RunArgs),
}

fn init_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("GFB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Config(format!("GFB_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(CliError::Config("GFB_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn run_with_config(name: &str, args: &RunArgs) -> CliResult<bool> {
    let raw = fs::read_to_string(&args.config).map_err(|e| CliError::io(args.config.display().to_string(), e))?;
    let cfg = RunConfig::from_json(&raw)?;
    let outcome = match name {
        "validate" => commands::validate(&cfg, &raw)?,
        "flow" => commands::flow_cmd(&cfg, &raw)?,
        "curvature" => commands::curvature(&cfg, &raw)?,
        "isotropy" => commands::isotropy(&cfg, &raw)?,
        _ => unreachable!("subcommands are fixed"),
    };
    let text = serde_json::to_string_pretty(&outcome.report)?;
    if let Some(dir) = args.out.as_ref().or(cfg.out.as_ref()) {
        let mut outputs = outcome.outputs;
        outputs.add(format!("{name}.json"), text.clone() + "\n");
        outputs.write_all(dir)?;
    }
    println!("{text}");
    Ok(outcome.pass)
}

fn run(cli: Cli) -> CliResult<bool> {
    init_threads()?;
    match &cli.command {
        Command::Catalog { id } => {
            let listing = commands::catalog(id.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&listing)?);
            Ok(true)
        }
        Command::Validate(a) => run_with_config("validate", a),
        Command::Flow(a) => run_with_config("flow", a),
        Command::Curvature(a) => run_with_config("curvature", a),
        Command::Isotropy(a) => run_with_config("isotropy", a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("gfb: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
