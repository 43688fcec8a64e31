//! Command-line front end: `table`, `heat`, `cool`, `sweep`, `analytic`.
//!
//! Exit codes: 0 success, 1 configuration or i/o error, 2 numerical
//! instability, 3 no steady state reached.

pub mod commands;
pub mod config;
pub mod output;
pub mod sweep;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{cmd_analytic, cmd_cool, cmd_heat, cmd_sweep, cmd_table, CliError, CommandOutput};
pub use config::{ConfigError, Format, RunConfig};
pub use output::{write_tables, Cell, DataTable};
pub use sweep::{PointStatus, SweepPoint};

#[derive(Debug, Parser)]
#[command(name = "shotnoise", version, about = "Shot-noise heating and feedback cooling of a levitated nanoparticle")]
pub struct Args {
    /// Run configuration (`key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed for all trajectory streams.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "K")]
    pub trajectories: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Write the effective configuration (after flags) to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub save_config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Closed-form rates, frequencies and ratios per particle.
    Table,
    /// Shot-noise heating without feedback.
    Heat,
    /// Parametric feedback cooling.
    Cool,
    /// Steady-state occupation against gain, or its minimum against Δn.
    Sweep,
    /// Closed-form cooling curve.
    Analytic,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Table => "table",
            Command::Heat => "heat",
            Command::Cool => "cool",
            Command::Sweep => "sweep",
            Command::Analytic => "analytic",
        }
    }
}

/// Loads the config file and applies the command-line overrides.
pub fn effective_config(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.integrator.master_seed = seed;
    }
    if let Some(k) = args.trajectories {
        cfg.integrator.trajectories = Some(k);
    }
    if let Some(dir) = &args.out {
        cfg.output_dir = dir.to_string_lossy().into_owned();
    }
    if let Some(f) = args.format {
        cfg.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    Ok(cfg)
}

pub fn execute(args: &Args) -> Result<(CommandOutput, Vec<PathBuf>), CliError> {
    let cfg = effective_config(args)?;
    if let Some(path) = &args.save_config {
        std::fs::write(path, cfg.to_text())?;
    }
    let output = match args.command {
        Command::Table => cmd_table(&cfg)?,
        Command::Heat => cmd_heat(&cfg)?,
        Command::Cool => cmd_cool(&cfg)?,
        Command::Sweep => cmd_sweep(&cfg)?,
        Command::Analytic => cmd_analytic(&cfg)?,
    };
    let paths = write_tables(
        std::path::Path::new(&cfg.output_dir),
        &output.tables,
        cfg.format,
        &cfg.hash(),
        cfg.integrator.master_seed,
    )?;
    Ok((output, paths))
}

/// Parses `argv`, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    ExitCode::from(run(argv))
}

/// [`main_with_args`] returning the raw exit status.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&args) {
        Ok((output, paths)) => {
            print!("{}", output.text);
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("shotnoise {}: {e}", args.command.name());
            e.exit_code()
        }
    }
}
