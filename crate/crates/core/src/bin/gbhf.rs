use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gbhf::cli::{execute, Command, Invocation};

#[derive(Parser)]
#[command(
    name = "gbhf",
    version,
    about = "Mean-field solvers with an exact Fock-space oracle"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the configured solver.
    Solve(Flags),
    /// Run the structural check suites.
    Check(Flags),
    /// Solve along the configured parameter sweep.
    Sweep(Flags),
    /// Exact ground energies per particle-number sector.
    Oracle(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::Solve(f) => (Command::Solve, f),
        Sub::Check(f) => (Command::Check, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Oracle(f) => (Command::Oracle, f),
    };
    std::process::exit(execute(&Invocation {
        command,
        config: flags.config,
        out: flags.out,
        seed: flags.seed,
        threads: flags.threads,
    }));
}
