//! Command-line experiment runner for Dirac spinor tomography.
//!
//! A run is fully described by an [`ExperimentConfig`]: read from a JSON
//! file, overridden by flags, hashed, and embedded in the output next to the
//! library version. Exit status is 0 on success, 2 for configuration or I/O
//! errors and 3 when a run misses its acceptance threshold.

pub mod config;
pub mod output;
pub mod runners;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{Command, ExperimentConfig, Format};
pub use output::{Cell, Table};
pub use runners::{run, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FAILED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("run failed: {0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Run(_) => EXIT_FAILED,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "dirac-tomo", version, about = "Seeded Dirac spinor tomography experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<CommandArg>,
    /// JSON config; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Shots per frame; omit for exact marginals.
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// majorana | standard | chiral | all
    #[arg(long, global = true)]
    pub rep: Option<String>,
    /// discrete_majorana | combined_st_chiral | continuous_grid(nθ,nφ)
    #[arg(long, global = true)]
    pub protocol: Option<String>,
    /// Quadrature grid as `NTHETAxNPHI`, e.g. 32x64.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// rotations | full | all
    #[arg(long, global = true)]
    pub group: Option<String>,
    /// Output file; `-` for standard output.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// csv | json
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum CommandArg {
    /// Maximum Fierz-identity residuals over random spinors.
    FierzCheck,
    /// Simulate marginals, reconstruct, and score against the generator.
    Roundtrip,
    /// Marginal-gradient span ranks per representation and group.
    Feasibility,
    /// Search for inequivalent spinors with identical marginals.
    Ambiguity,
    /// Sphere-kernel vector reconstruction on random vectors.
    KernelCheck,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::FierzCheck => Command::FierzCheck,
            CommandArg::Roundtrip => Command::Roundtrip,
            CommandArg::Feasibility => Command::Feasibility,
            CommandArg::Ambiguity => Command::Ambiguity,
            CommandArg::KernelCheck => Command::KernelCheck,
        }
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Config(format!("bad grid `{s}` (expected e.g. 32x64)"));
    let (a, b) = s.split_once(['x', '×', ',']).ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

impl Cli {
    /// Builds the effective config: file (if any), then flag overrides.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let command = self.command.map(Command::from);
        let mut cfg = match (&self.config, command) {
            (Some(path), _) => ExperimentConfig::from_file(path, command)?,
            (None, Some(c)) => ExperimentConfig::new(c),
            (None, None) => return Err(CliError::Config("no command given (see --help)".into())),
        };
        let cfg_err = |e: dirac_tomography::Error| CliError::Config(e.to_string());
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.shots {
            cfg.shots = Some(n);
        }
        if let Some(n) = self.trials {
            cfg.trials = n;
        }
        if let Some(r) = &self.rep {
            cfg.representation = match r.as_str() {
                "all" => None,
                other => Some(other.parse().map_err(cfg_err)?),
            };
        }
        if let Some(p) = &self.protocol {
            cfg.protocol = p.parse().map_err(cfg_err)?;
        }
        if let Some(g) = &self.grid {
            cfg.grid = Some(parse_grid(g)?);
        }
        if let Some(g) = &self.group {
            cfg.group = match g.as_str() {
                "all" => None,
                other => Some(other.parse().map_err(cfg_err)?),
            };
        }
        if let Some(o) = &self.out {
            cfg.output_path = o.clone();
        }
        if let Some(f) = &self.format {
            cfg.format = f.parse()?;
        }
        if let Some(t) = self.threads {
            cfg.threads = Some(t);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs a config end to end and writes its report; returns the exit code.
pub fn execute(cfg: &ExperimentConfig) -> i32 {
    let result = run(cfg).and_then(|o| output::emit(&o.table, cfg).map(|_| o.passed));
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("dirac-tomo {}: acceptance threshold not met", cfg.command);
            EXIT_FAILED
        }
        Err(e) => {
            eprintln!("dirac-tomo {}: {e}", cfg.command);
            e.exit_code()
        }
    }
}

/// Entry point shared by the binary and the tests.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.resolve() {
        Ok(cfg) => execute(&cfg),
        Err(e) => {
            eprintln!("dirac-tomo: {e}");
            e.exit_code()
        }
    }
}
