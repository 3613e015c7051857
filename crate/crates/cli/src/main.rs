use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use conslaw_cli::run::{CONFIG_ERROR_CODE, IO_ERROR_CODE};
use conslaw_cli::{parse_config, run_all, Mode, RunError};

/// Admissibility, hyperbolicity and wave-propagation runs for elastic conservation laws.
#[derive(Debug, Parser)]
#[command(name = "conslaw", version)]
struct Cli {
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,

    /// Override the configured mode: admissibility, hyperbolicity, simulate or all.
    #[arg(long)]
    mode: Option<Mode>,

    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the probe seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Suppress the per-stage summary on stdout.
    #[arg(long)]
    quiet: bool,
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return exit(CONFIG_ERROR_CODE);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return exit(CONFIG_ERROR_CODE);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return exit(CONFIG_ERROR_CODE);
        }
    };
    if let Some(m) = cli.mode {
        cfg.mode = m;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    match run_all(&cfg) {
        Ok(summary) => {
            if !cli.quiet {
                for line in &summary.lines {
                    println!("{line}");
                }
                println!("outputs written to {}", cfg.out.display());
            }
            exit(summary.status.code())
        }
        Err(e @ RunError::Model(_)) => {
            eprintln!("error: {e}");
            exit(CONFIG_ERROR_CODE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit(IO_ERROR_CODE)
        }
    }
}
