//! Command-line front end: `aiet classify|dims|holder|sweep|simulate <file>`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aiet::exec::{self, Execution};
use aiet::markov::Side;
use aiet::report::{self, Command, Options};
use aiet::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aiet", version, about = "Dimensions and Hölder exponents of self-similar affine interval exchanges")]
struct Cli {
    #[command(subcommand)]
    command: CommandArg,
}

#[derive(Subcommand)]
enum CommandArg {
    /// Genus, spectrum, hyperbolicity and slope class.
    Classify(Args),
    /// Hausdorff dimensions of the invariant and conformal measures.
    Dims(Args),
    /// Hölder exponents of the conjugacy and its inverse.
    Holder(Args),
    /// Pressure sweep over the file's t grid, as CSV.
    Sweep(Args),
    /// Monte-Carlo estimate of the mean information.
    Simulate(Args),
}

#[derive(ValueEnum, Clone, Copy)]
enum SideArg {
    Invariant,
    Conformal,
}

#[derive(clap::Args)]
struct Args {
    /// Input JSON file.
    file: PathBuf,
    /// Seed of Monte-Carlo commands, overriding the file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte-Carlo transitions.
    #[arg(long)]
    length: Option<usize>,
    /// Base measure of `simulate`.
    #[arg(long, value_enum)]
    side: Option<SideArg>,
    /// Output path; `sweep` also writes `<path>.meta.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance override `key=value`, repeatable.
    #[arg(long = "tol-override")]
    tol_override: Vec<String>,
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn configure_threads() -> Result<()> {
    match std::env::var("AIET_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => {
                exec::limit_threads(n);
                Ok(())
            }
            _ => Err(Error::InvalidInput(format!("AIET_THREADS: expected a positive integer, found {v:?}"))),
        },
        Err(_) => Ok(()),
    }
}

fn execute(cli: Cli) -> Result<()> {
    configure_threads()?;
    let (command, args) = match cli.command {
        CommandArg::Classify(a) => (Command::Classify, a),
        CommandArg::Dims(a) => (Command::Dims, a),
        CommandArg::Holder(a) => (Command::Holder, a),
        CommandArg::Sweep(a) => (Command::Sweep, a),
        CommandArg::Simulate(a) => (Command::Simulate, a),
    };
    let input = std::fs::read(&args.file)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", args.file.display())))?;
    let opts = Options {
        seed: args.seed,
        length: args.length,
        side: args.side.map(|s| match s {
            SideArg::Invariant => Side::Invariant,
            SideArg::Conformal => Side::Conformal,
        }),
        overrides: args.tol_override,
        execution: Execution::default(),
    };
    let output = report::run(command, &input, &opts)?;
    let write = |path: &Path, text: &str| {
        std::fs::write(path, text).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
    };
    match &args.out {
        Some(path) => {
            write(path, &output.primary)?;
            if let Some(sidecar) = &output.sidecar {
                write(&sidecar_path(path), sidecar)?;
            }
        }
        None => print!("{}", output.primary),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
