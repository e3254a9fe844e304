use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relqsim_cli::{run, Overrides, Task};

#[derive(Parser)]
#[command(name = "relqsim", version, about = "Relativistic kinetic energy on a qubit grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy of a fixed state.
    Evaluate(Common),
    /// Variational ground-state search.
    Vqe(Common),
    /// Repeat evaluate or vqe along one parameter axis.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    oracle_check: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, args) = match cli.command {
        Command::Evaluate(a) => (Task::Evaluate, a),
        Command::Vqe(a) => (Task::Vqe, a),
        Command::Sweep(a) => (Task::Sweep, a),
    };
    let ov = Overrides { seed: args.seed, workers: args.workers, oracle_check: args.oracle_check, out: args.out };
    match run(task, &args.config, &ov) {
        Ok((output, path)) => {
            println!("{} -> {}", output.summary(), path.display());
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
