use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use torvol_cli::{run, CliError, Command, RunOptions};

#[derive(Parser)]
#[command(name = "torvol", version, about = "Arithmetic volumes of toric metrized line bundles")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// JSON problem config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Largest level of the convergence experiment.
    #[arg(long, global = true)]
    lmax: Option<u32>,
    /// Node budget of the exact ellipsoid count.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON instead of text (polytope).
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Vertices, lattice points and volume of the polytope.
    Polytope,
    /// Ample, nef and big.
    Classify,
    /// Legendre–Fenchel conjugate on a rational grid of the polytope.
    ConjugateGrid,
    /// Arithmetic volume.
    Volume,
    /// Logarithmic small-section counts for l = 1..lmax.
    Converge,
    /// Mahler measure of an integer Laurent polynomial.
    Mahler { polynomial: Option<String> },
    /// Volumes along a metric sequence.
    Sequence,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cmd = match args.command {
        Cmd::Polytope => Command::Polytope,
        Cmd::Classify => Command::Classify,
        Cmd::ConjugateGrid => Command::ConjugateGrid,
        Cmd::Volume => Command::Volume,
        Cmd::Converge => Command::Converge,
        Cmd::Mahler { polynomial } => Command::Mahler { polynomial },
        Cmd::Sequence => Command::Sequence,
    };
    let opts = RunOptions { tolerance: args.tol, lmax: args.lmax, budget: args.budget, seed: args.seed, json: args.json };
    let result = args
        .config
        .as_ref()
        .map(|p| std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))))
        .transpose()
        .and_then(|text| run(&cmd, text.as_deref(), &opts));
    let output = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("torvol: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let written = match &args.out {
        Some(path) => std::fs::write(path, &output.text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{}", output.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("torvol: {e}");
        return ExitCode::from(1);
    }
    if let Some(v) = &output.violation {
        eprintln!("torvol: self-check failed: {v}");
    }
    ExitCode::from(output.exit_code())
}
