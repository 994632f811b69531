use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qmaxcut::report::{run, Command, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Quantum Max-Cut: relaxation, product rounding and rotation layer.
    Qmc,
    /// EPR Hamiltonian: relaxation and deterministic rotation layer.
    Epr,
    /// Write the bound curves as CSV files into the output directory.
    Curves,
    /// Run the exact cross-checks on a small instance.
    OracleCheck,
}

#[derive(Debug, Parser)]
#[command(
    name = "qmaxcut",
    version,
    about = "Relax-and-round approximations for Quantum Max-Cut and the EPR Hamiltonian"
)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// Edge-list file: optional `n <count>` header, then `i j w` lines.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Report file (stdout if omitted); a directory for `curves`.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Product-rounding trials; the best one is kept.
    #[arg(long, default_value_t = 64)]
    trials: usize,
    /// Relative duality-gap tolerance of the SDP solver.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Add exact diagonalisation and statevector energies (n <= 14).
    #[arg(long)]
    oracle: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = RunConfig {
        command: match cli.command {
            Cmd::Qmc => Command::Qmc,
            Cmd::Epr => Command::Epr,
            Cmd::Curves => Command::Curves,
            Cmd::OracleCheck => Command::OracleCheck,
        },
        input: cli.input,
        output: cli.output,
        seed: cli.seed,
        trials: cli.trials,
        tol: cli.tol,
        oracle: cli.oracle,
    };
    match run(&cfg) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("qmaxcut: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
