use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use commands::Failure;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "steklov", version, about = "Mixed Steklov-Neumann eigenvalues, Green's functions and resonance tuning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (TOML, `version = 1`).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the node count of the config.
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the configured partition.
    Spectrum(Common),
    /// Green's function on the boundary and on an interior grid.
    Greens(Common),
    /// Grow a Neumann arc until an eigenvalue hits the target.
    Optimize(Common),
    /// Oracle and invariant checks.
    Validate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(c: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(n) = c.nodes {
        cfg.nodes = n;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectrum(c) => commands::cmd_spectrum(&load(&c)?, &c.out),
        Command::Greens(c) => commands::cmd_greens(&load(&c)?, &c.out),
        Command::Optimize(c) => commands::cmd_optimize(&load(&c)?, &c.out),
        Command::Validate { out } => {
            let report = commands::cmd_validate(out.as_deref())?;
            print!("{}", report.to_table());
            if report.all_passed() {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
    }
}

fn main() -> ExitCode {
    faer::set_global_parallelism(faer::Par::Seq);
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
