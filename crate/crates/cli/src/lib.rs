//! Library side of the `rgquad` command: config parsing, the pipelines and
//! report rendering. The binary is a thin clap wrapper around [`run_cli`].

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{Overrides, RunConfig};
pub use run::{execute, Command, RunReport};

use config::OutputFormat;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed config or model parameters.
    #[error("config error: {0}")]
    Parse(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] rgquad_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Parse(_) | Self::Usage(_) => 2,
            Self::Core(_) | Self::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rgquad", version, about = "Quadratic Bethe equations for spin-1/2 Richardson-Gaudin models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    #[command(flatten)]
    Run(RunCommand),
    /// List the built-in model families and their parameters.
    Catalog {
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Do not fail when fewer than 2^N distinct tuples are found.
    #[arg(long)]
    pub allow_incomplete: bool,
    /// Largest spin count handled with dense operators.
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum RunCommand {
    /// Certify integrability of the model.
    Check(RunArgs),
    /// Derive the quadratic relations and check them.
    Derive(RunArgs),
    /// Solve the quadratic Bethe equations for the full spectrum.
    Solve(RunArgs),
    /// Solve, then compare with exact diagonalization.
    Verify(RunArgs),
}

impl RunCommand {
    fn split(&self) -> (Command, &RunArgs) {
        match self {
            Self::Check(a) => (Command::Check, a),
            Self::Derive(a) => (Command::Derive, a),
            Self::Solve(a) => (Command::Solve, a),
            Self::Verify(a) => (Command::Verify, a),
        }
    }
}

fn env_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("RGQUAD_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("RGQUAD_CAP must be a spin count, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

/// Loads, resolves and runs one pipeline command.
pub fn run_command(command: &RunCommand) -> Result<RunReport, CliError> {
    let (command, args) = command.split();
    let overrides = Overrides {
        seed: args.seed,
        format: args.format,
        output: args.output.as_ref().map(|p| p.display().to_string()),
        cap: args.cap,
        env_cap: env_cap()?,
    };
    let config = RunConfig::load(&args.config)?.resolve(&overrides);
    execute(command, config, args.allow_incomplete)
}

pub fn render(report: &RunReport) -> String {
    match report.config.output.format {
        OutputFormat::Json => output::to_json(report),
        OutputFormat::Tsv => output::to_tsv(report),
    }
}

pub fn render_catalog(format: OutputFormat) -> String {
    let families = rgquad_core::catalog::families();
    match format {
        OutputFormat::Json => output::to_json(&families),
        OutputFormat::Tsv => {
            let mut out = String::from("family\tparameter\tmeaning\n");
            for f in &families {
                for (name, meaning) in &f.parameters {
                    out.push_str(&format!("{}\t{name}\t{meaning}\n", f.family));
                }
            }
            out
        }
    }
}

/// Parses `args`, runs, writes the report, and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        CliCommand::Catalog { format } => {
            print!("{}", render_catalog(format.unwrap_or_default()));
            return 0;
        }
        CliCommand::Run(command) => run_command(command).and_then(|report| {
            let text = render(&report);
            match &report.config.output.path {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(report)
        }),
    };
    match result {
        Ok(report) => {
            for reason in &report.failures {
                eprintln!("rgquad: {reason}");
            }
            report.exit_code()
        }
        Err(e) => {
            eprintln!("rgquad: {e}");
            e.exit_code()
        }
    }
}
