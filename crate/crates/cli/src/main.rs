use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hypequil_cli::{parse_config, run_task, CliError, Task};

/// Runs a hyperbolic equilibrium experiment described by a JSON config.
#[derive(Debug, Parser)]
#[command(name = "hypequil", version)]
struct Args {
    /// resolve, ppa, verify or grid-oracle; overrides the config's task.
    task: Task,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Writes a Poincaré-disk SVG (two-dimensional runs only).
    #[arg(long)]
    plot: bool,
}

/// Exit status 1: some verdict failed. 2: the run could not complete.
fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("hypequil: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: &Args) -> Result<bool, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let mut cfg = parse_config(&text)?;
    cfg.task = args.task;
    if let Some(seed) = args.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &args.out {
        cfg.output = out.clone();
    }
    cfg.plot |= args.plot;
    let report = run_task(&cfg)?;
    for f in &report.files {
        println!("{}", f.display());
    }
    Ok(report.passed)
}
