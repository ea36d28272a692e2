//! Command-line front end.
//!
//! Subcommands: `run` (configured pipeline), `preset <name>` (bundled
//! figure datasets or the bundled certification gate), `certify`
//! (certification of the configured or bundled parameter sets).
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use double_fano_cli::config::{load_config, ConfigError, RunConfig};
use double_fano_cli::runner::{
    execute_certify_bundled, execute_certify_config, execute_preset, execute_run, RunFlags,
    RunnerError,
};

#[derive(Parser)]
#[command(
    name = "double-fano",
    version,
    about = "Susceptibility spectra, transparency windows, oracle certification, and dynamics cross-checks for a Lambda medium with two degenerate autoionizing levels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for output files (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads for grid evaluation; results are identical for any
    /// value.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Transparency threshold as a fraction of the background absorption,
    /// strictly between 0 and 1.
    #[arg(long, global = true, default_value_t = 0.1)]
    depth_fraction: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured pipeline (defaults when --config is omitted).
    Run {
        /// JSON configuration document; empty file means all defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a bundled preset: fig2, fig3, fig4, fig5, or certify.
    Preset { name: String },
    /// Certify the closed form against the independent oracles.
    Certify {
        /// Certify the configured system instead of the bundled sets.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

enum CliError {
    Config(ConfigError),
    Runtime(RunnerError),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<RunnerError> for CliError {
    fn from(e: RunnerError) -> Self {
        CliError::Runtime(e)
    }
}

fn read_config(path: Option<&Path>) -> Result<RunConfig, ConfigError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| ConfigError::Io {
                path: p.display().to_string(),
                message: e.to_string(),
            })?;
            load_config(&text)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    if cli.threads == 0 {
        return Err(ConfigError::Invalid(String::from("--threads must be at least 1")).into());
    }
    if !(cli.depth_fraction > 0.0 && cli.depth_fraction < 1.0) {
        return Err(ConfigError::Invalid(format!(
            "--depth-fraction must lie strictly between 0 and 1, got {}",
            cli.depth_fraction
        ))
        .into());
    }
    let flags = RunFlags {
        threads: cli.threads,
        depth_fraction: cli.depth_fraction,
    };
    match &cli.command {
        Command::Run { config } => {
            let resolved = read_config(config.as_deref())?.resolve()?;
            execute_run(&resolved, &cli.out_dir, &flags)?;
        }
        Command::Preset { name } => {
            if name == "certify" {
                execute_certify_bundled(&cli.out_dir, &flags)?;
            } else {
                let preset = double_fano::presets::by_name(name).ok_or_else(|| {
                    ConfigError::Invalid(format!(
                        "unknown preset `{name}` (expected fig2, fig3, fig4, fig5, or certify)"
                    ))
                })?;
                execute_preset(&preset, &cli.out_dir, &flags)?;
            }
        }
        Command::Certify { config } => match config {
            None => execute_certify_bundled(&cli.out_dir, &flags)?,
            Some(path) => {
                let resolved = read_config(Some(path))?.resolve()?;
                execute_certify_config(&resolved, &cli.out_dir, &flags)?;
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::from(3)
        }
    }
}
