//! qmemnet: model passive linear quantum networks, synthesize matched
//! write/read pulses, and simulate the full memory protocol from a single
//! TOML configuration.
//!
//! Exit codes: 0 success (threshold met where applicable), 1 threshold
//! failed, 2 configuration or usage error, 3 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::commands::Ctx;
use crate::config::{Frame, RunConfig};

/// A command failure carrying its process exit code.
#[derive(Debug)]
pub struct CmdError {
    pub message: String,
    pub code: u8,
}

impl CmdError {
    pub fn usage(message: String) -> Self {
        Self { message, code: 2 }
    }

    pub fn numerical(message: String) -> Self {
        Self { message, code: 3 }
    }
}

impl From<qmemnet::Error> for CmdError {
    fn from(err: qmemnet::Error) -> Self {
        use qmemnet::Error as E;
        match err {
            E::EigenFailure
            | E::SingularResolvent { .. }
            | E::StepTooLarge { .. }
            | E::WindowTooSmall { .. }
            | E::BlockStructureViolation { .. } => Self::numerical(err.to_string()),
            _ => Self::usage(err.to_string()),
        }
    }
}

/// A finished command: the JSON report for stdout and the exit code.
pub struct CmdOutcome {
    pub report: Value,
    pub exit: u8,
}

#[derive(Parser)]
#[command(
    name = "qmemnet",
    about = "Passive linear quantum network memory: analysis, pulse synthesis, and protocol simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV/JSON files (QMEMNET_OUT overrides).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Integrator step override.
    #[arg(long, global = true)]
    step: Option<f64>,

    /// Reporting frame for atomic-network statistics.
    #[arg(long, global = true, value_enum)]
    frame: Option<FrameArg>,

    /// Emitted file formats: csv, json, or csv,json (default).
    #[arg(long, global = true)]
    format: Option<String>,

    /// Protocol pass/fail fidelity threshold (default 0.999).
    #[arg(long, global = true)]
    fidelity_threshold: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameArg {
    Node,
    Primed,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral and structural analysis of the configured system.
    Analyze,
    /// Matched writing/reading pulse tables and Gramian residuals.
    Synthesize,
    /// Writing-stage trajectory and photon/coherent statistics.
    Simulate,
    /// Full write/store/read protocol with a fidelity threshold.
    Protocol,
    /// Re-run a packaged experiment.
    Reproduce {
        #[command(subcommand)]
        target: ReproduceTarget,
    },
}

#[derive(Subcommand)]
enum ReproduceTarget {
    /// Network writing run: pulse shapes and per-node photon numbers.
    Fig5,
    /// Matched vs mismatched absorption on the single cavity mode.
    SingleMode,
    /// Port closed one unit early: degraded storage and retrieval.
    EarlySwitch,
    /// Dark-state intensity for the rising-exponential drive.
    Darkstate,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CmdError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CmdError::usage("missing --config PATH".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::usage(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::parse(&text)
}

fn build_ctx(cli: &Cli, config: RunConfig) -> Result<Ctx, CmdError> {
    let out_dir = std::env::var_os("QMEMNET_OUT")
        .map(PathBuf::from)
        .or_else(|| cli.out.clone())
        .or_else(|| config.outputs.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CmdError::usage(format!("cannot create {}: {e}", out_dir.display())))?;

    let formats: Vec<String> = match &cli.format {
        Some(raw) => raw.split(',').map(|s| s.trim().to_string()).collect(),
        None => config
            .outputs
            .formats
            .clone()
            .unwrap_or_else(|| vec!["csv".into(), "json".into()]),
    };
    for f in &formats {
        if f != "csv" && f != "json" {
            return Err(CmdError::usage(format!(
                "unknown format `{f}` (expected csv or json)"
            )));
        }
    }

    Ok(Ctx {
        config,
        out_dir,
        write_csv: formats.iter().any(|f| f == "csv"),
        write_json: formats.iter().any(|f| f == "json"),
        step: cli.step,
        frame: cli.frame.map(|f| match f {
            FrameArg::Node => Frame::Node,
            FrameArg::Primed => Frame::Primed,
        }),
        fidelity_threshold: cli.fidelity_threshold,
    })
}

/// Reproduce targets run from a built-in configuration; a config file is
/// optional and only contributes output settings.
fn reproduce_ctx(cli: &Cli) -> Result<Ctx, CmdError> {
    let config = match &cli.config {
        Some(_) => load_config(cli)?,
        None => RunConfig {
            system: config::SystemConfig {
                preset: Some("atomic-network".into()),
                kappa: Some(2.0),
                g: Some(1.0),
                delta: Some(1.0),
                epsilon: None,
                frame: Some(Frame::Primed),
                omega: None,
                coupling: None,
            },
            input: None,
            schedule: None,
            numerics: config::NumericsConfig::default(),
            outputs: config::OutputsConfig::default(),
        },
    };
    build_ctx(cli, config)
}

fn run(cli: &Cli) -> Result<CmdOutcome, CmdError> {
    match &cli.command {
        Command::Analyze => commands::analyze(&build_ctx(cli, load_config(cli)?)?),
        Command::Synthesize => commands::synthesize(&build_ctx(cli, load_config(cli)?)?),
        Command::Simulate => commands::simulate(&build_ctx(cli, load_config(cli)?)?),
        Command::Protocol => commands::protocol(&build_ctx(cli, load_config(cli)?)?),
        Command::Reproduce { target } => {
            let ctx = reproduce_ctx(cli)?;
            match target {
                ReproduceTarget::Fig5 => commands::reproduce_fig5(&ctx),
                ReproduceTarget::SingleMode => commands::reproduce_single_mode(&ctx),
                ReproduceTarget::EarlySwitch => commands::reproduce_early_switch(&ctx),
                ReproduceTarget::Darkstate => commands::reproduce_darkstate(&ctx),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            println!("{:#}", outcome.report);
            ExitCode::from(outcome.exit)
        }
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
