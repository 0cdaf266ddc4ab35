use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use distortion_cli::{Overrides, EXIT_VALIDATION, RESULT_SCHEMA};

/// Distortion energies, minimisers and convergence diagnostics for planar maps.
#[derive(Debug, Parser)]
#[command(name = "distortion", version)]
struct Args {
    /// Run configuration (JSON).
    #[arg(long, required_unless_present = "schema")]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for every randomized step; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Do not print the summary line.
    #[arg(long)]
    quiet: bool,
    /// Print the JSON schema of result.json and exit.
    #[arg(long)]
    schema: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION as u8 } else { 0 });
        }
    };
    if args.schema {
        print!("{RESULT_SCHEMA}");
        return ExitCode::SUCCESS;
    }
    let config = args.config.expect("clap enforces --config");
    let overrides = Overrides { out: args.out, seed: args.seed, threads: args.threads.map(|t| t as usize), quiet: args.quiet };
    ExitCode::from(distortion_cli::run(&config, &overrides) as u8)
}
