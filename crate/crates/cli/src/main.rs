use std::path::PathBuf;
use std::process::ExitCode;

use biphoton_cli::error::{exit, CliError};
use biphoton_cli::output::Format;
use biphoton_cli::{load, run, Command, Overrides};
use clap::Parser;

/// Biphoton source simulator: spectra, fringes, tomography and reports.
///
/// Log verbosity follows RUST_LOG (e.g. RUST_LOG=info).
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Pipeline configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Random seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output formats; overrides the config.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let overrides = Overrides {
        seed: args.seed,
        out: args.out,
        format: args.format,
    };
    let result = load(&args.config, &overrides).and_then(|cfg| run(args.command, &cfg));
    match result {
        Ok((_, text)) => {
            print!("{text}");
            ExitCode::from(exit::SUCCESS as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::NotConverged(_) = e {
                eprintln!("outputs were written; see tomography_report.json");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
