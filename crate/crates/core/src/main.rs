use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;

use bipartition::commands::{self, Command, Overrides};
use bipartition::{config, Error};

/// Division-relative analysis of coupled oscillator systems.
#[derive(Debug, Parser)]
#[command(name = "bipartition", version)]
struct Cli {
    /// validate | partition | normal-modes | ground-state | entangle | compare |
    /// invert-means | evolve | shield-search | oracle-check
    #[arg(value_parser = parse_command)]
    command: Command,
    /// TOML config file (schema = 1).
    config: String,
    /// Print a JSON report instead of a table.
    #[arg(long)]
    json: bool,
    /// Canonicity tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Oracle grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Evolution horizon.
    #[arg(long)]
    horizon: Option<f64>,
    /// Add a wall-clock timestamp to the report.
    #[arg(long)]
    timestamp: bool,
}

fn parse_command(s: &str) -> Result<Command, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn execute(cli: &Cli) -> Result<i32, Error> {
    let mut doc = config::parse(&cli.config)?;
    Overrides { tol: cli.tol, grid: cli.grid, horizon: cli.horizon }.apply(&mut doc)?;
    let mut report = commands::run(cli.command, &doc, &cli.config)?;
    if cli.timestamp {
        report.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
    }
    if cli.json {
        println!("{}", report.to_json()?);
    } else {
        print!("{}", report.to_table());
    }
    Ok(if report.passed { 0 } else { cli.command.failure_code() })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
