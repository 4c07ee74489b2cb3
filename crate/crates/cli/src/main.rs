use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use dirreg_cli::{execute, Command, Options};

/// Directional well-posedness analyses of set-valued maps.
///
/// Exit status: 0 pass, 1 error, 2 inconclusive, 3 fail.
#[derive(Parser, Debug)]
#[command(name = "dirreg", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Instance file (TOML, `schema = 1`).
    #[arg(long)]
    instance: PathBuf,
    /// CSV report path.
    #[arg(long)]
    out: PathBuf,
    /// Override the command's tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Multiply grid densities and direction counts.
    #[arg(long)]
    grid_scale: Option<usize>,
    #[arg(long)]
    seed_override: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("DIRREG_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: DIRREG_THREADS ignored: {e}");
        }
    }
    let opts = Options { tol: cli.tol, grid_scale: cli.grid_scale, seed_override: cli.seed_override };
    let start = Instant::now();
    match execute(cli.command, &cli.instance, &cli.out, &opts) {
        Ok(outcome) => {
            eprintln!("{}: {:?} in {:.2}s", cli.command.name(), outcome, start.elapsed().as_secs_f64());
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
