use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwgauge_cli::run::{check, converge, simulate, Context};
use qwgauge_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "qwgauge", version, about = "Gauged quantum walks: simulation, invariant checks and continuum convergence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a walk and write probability, observables and snapshots
    Simulate(Common),
    /// Run the invariant checks and write checks.json
    Check(Common),
    /// Compare the walk with the Dirac reference over a range of lattice spacings
    Converge(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides `seed`)
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress progress output
    #[arg(long)]
    quiet: bool,
}

fn context(args: &Common) -> Result<Context, CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let base = args
        .config
        .parent()
        .map(PathBuf::from)
        .unwrap_or_default();
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok(Context {
        cfg,
        base,
        out,
        quiet: args.quiet,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (args, action): (&Common, fn(&Context) -> Result<(), CliError>) = match &cli.command {
        Command::Simulate(a) => (a, simulate),
        Command::Check(a) => (a, check),
        Command::Converge(a) => (a, converge),
    };
    match context(args).and_then(|ctx| action(&ctx)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
