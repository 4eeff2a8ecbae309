//! `zenolab` command line: run one protocol from a TOML configuration and
//! write per-step CSV records plus a summary document.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zenolab::cli::{self, CliError};

#[derive(Parser)]
#[command(
    name = "zenolab",
    version,
    about = "Repeated-measurement quantum dynamics on truncated Fock spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Drag a coherent state through N stepping yes/no questions
    Drag(RunArgs),
    /// Sweep the measurement basis cyclically over a phase window
    Laskey(RunArgs),
    /// Freeze a driven two-level decay by repeated projection
    Zeno(RunArgs),
    /// Entangle a two-outcome system with a pointer register and reduce
    Chain(RunArgs),
    /// Tabulate |⟨α|α+Δ⟩|² against the closed form over a Δ sweep
    OverlapTable(RunArgs),
}

impl Command {
    fn protocol_name(&self) -> &'static str {
        match self {
            Command::Drag(_) => "drag",
            Command::Laskey(_) => "laskey",
            Command::Zeno(_) => "zeno",
            Command::Chain(_) => "chain",
            Command::OverlapTable(_) => "overlap-table",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Drag(a)
            | Command::Laskey(a)
            | Command::Zeno(a)
            | Command::Chain(a)
            | Command::OverlapTable(a) => a,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the summary echo on stdout
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command.protocol_name(), cli.command.args()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn execute(expected: &str, args: &RunArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)?;
    let mut cfg = cli::parse_config(&text)?;
    if cfg.protocol.name() != expected {
        return Err(CliError::Validation(format!(
            "subcommand '{expected}' does not match the config's '{}' block",
            cfg.protocol.name()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }

    let outputs = cli::run(&cfg)?;
    for warning in &outputs.warnings {
        eprintln!("warning: {warning}");
    }
    if !args.quiet {
        print!("{}", outputs.summary);
        println!(
            "wrote {} and {}",
            outputs.csv_path.display(),
            outputs.summary_path.display()
        );
    }
    Ok(())
}
