//! `fastslow` command-line front end.
//!
//! Exit codes: 0 success, 1 failed expectation / divergence / runtime
//! error, 2 usage or configuration error.

mod analyze;
mod config;
mod maps;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use config::{ConfigError, IntegratorKind, RunSpec};

#[derive(Debug, Parser)]
#[command(name = "fastslow", version, about = "Fast-slow adaptive network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario and check its expectations.
    Run {
        #[command(flatten)]
        source: Source,
        /// Overrides the configured integrator.
        #[arg(long, value_enum)]
        integrator: Option<IntegratorKind>,
    },
    /// Run one scenario under Euler, RK4 and canard-aware integration.
    Compare {
        #[command(flatten)]
        source: Source,
    },
    /// Report the singular-limit structure of a scenario's model.
    Analyze {
        #[command(flatten)]
        source: Source,
    },
    /// Evaluate a transition map of the blow-up analysis.
    Maps {
        #[command(subcommand)]
        map: maps::MapCommand,
        /// Print JSON instead of key = value lines.
        #[arg(long, global = true)]
        json: bool,
    },
    /// List the preset names.
    Presets,
}

#[derive(Debug, Args)]
struct Source {
    /// TOML run configuration.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Preset scenario name, e.g. triangle_y19 or ring(7).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides FASTSLOW_OUTPUT_DIR and the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<RunSpec, ConfigError> {
        match (&self.config, &self.preset) {
            (Some(path), _) => RunSpec::from_file(path),
            (None, Some(name)) => RunSpec::from_preset(name),
            (None, None) => unreachable!("clap requires a config or a preset"),
        }
    }
}

const PRESET_NAMES: [&str; 8] = [
    "triangle_y19",
    "triangle_y20",
    "triangle_nonsym(w13,w23)",
    "ring(n)",
    "star(n)",
    "complete(n)",
    "periodic_drift",
    "periodic_cubic",
];

fn load(source: &Source) -> Result<RunSpec, ExitCode> {
    source.load().map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}

fn runtime_failure(e: anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { source, integrator } => {
            let spec = match load(&source) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let kind = integrator.unwrap_or(spec.integrator);
            match run::cmd_run(&spec, kind, source.out.as_deref()) {
                Ok(outcome) => {
                    print!("{}", outcome.report);
                    if outcome.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => runtime_failure(e),
            }
        }
        Command::Compare { source } => {
            let spec = match load(&source) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match run::cmd_compare(&spec, source.out.as_deref()) {
                Ok(table) => {
                    print!("{table}");
                    ExitCode::SUCCESS
                }
                Err(e) => runtime_failure(e),
            }
        }
        Command::Analyze { source } => {
            let spec = match load(&source) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match analyze::cmd_analyze(&spec, source.out.as_deref()) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => runtime_failure(e),
            }
        }
        Command::Maps { map, json } => match maps::evaluate(&map) {
            Ok(v) => {
                if json {
                    println!("{}", serde_json::to_string_pretty(&v).expect("json value"));
                } else {
                    print!("{}", maps::render(&v));
                }
                ExitCode::SUCCESS
            }
            Err(e) => runtime_failure(e),
        },
        Command::Presets => {
            for n in PRESET_NAMES {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
    }
}
