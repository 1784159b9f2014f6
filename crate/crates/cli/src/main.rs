use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use sqg_cli::config::{parse_config, Command};
use sqg_cli::runner;

/// Spectral laboratory for the two-dimensional dissipative quasi-geostrophic
/// equation on the torus.
///
/// Exit codes: 0 certified/success, 1 usage or environment error, 2
/// violated, 3 inconclusive.
#[derive(Parser)]
#[command(name = "sqg-lab", version)]
struct Cli {
    /// Experiment to run; must agree with the config file's `command` key.
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Data-parallel kernels. Norm sums are then reproducible only to about
    /// 1e-13 relative; reference (serial) mode is the determinism baseline.
    #[arg(long)]
    parallel: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot read {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let mut config = match parse_config(&text) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    if config.command != cli.command {
        eprintln!(
            "config names command `{}` but `{}` was requested",
            config.command, cli.command
        );
        return ExitCode::from(1);
    }
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    sqg_core::set_parallel(cli.parallel);
    ExitCode::from(runner::run(&config) as u8)
}
