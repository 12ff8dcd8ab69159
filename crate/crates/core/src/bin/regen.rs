//! `regen`: tails, simulations, hitting times and constants from the command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use regen_extremes::harness::{
    cmd_constants, cmd_hittime, cmd_simulate, cmd_tail, cmd_verify, CliError, CommandOutput, ConstantsArgs,
    FileConfig, HittimeArgs, HittimeConfig, Model, ModelArgs, SimulateArgs, SimulateConfig, TailArgs, TailConfig,
    EXIT_FAILURE,
};
use regen_extremes::rng::DEFAULT_MASTER_SEED;

#[derive(Parser)]
#[command(name = "regen", version, about = "Running-maximum laws for regenerative processes")]
struct Cli {
    /// TOML file with [model], [simulate], [tail], [hittime] and [constants] tables; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact vs asymptotic cycle-maximum tail table (bd, mmm).
    Tail {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: TailArgs,
    },
    /// Simulate replicas and emit the normalised statistics per checkpoint.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: SimulateArgs,
    },
    /// Scaled birth-death hitting times (bd only).
    Hittime {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: HittimeArgs,
    },
    /// Model constants as JSON, each with the route used to compute it.
    Constants {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: ConstantsArgs,
    },
    /// Fast deterministic self-checks.
    Verify,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("REGEN_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("REGEN_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

fn write_to(path: Option<&Path>, text: &str, fallback_stderr: bool) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None if fallback_stderr => Ok(std::io::stderr().write_all(text.as_bytes())?),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

/// Command output plus where to write the body and the summary.
type Done = (CommandOutput, Option<PathBuf>, Option<PathBuf>);

fn run(cli: Cli) -> Result<Done, CliError> {
    let file = cli.config.as_deref().map(FileConfig::load).transpose()?.unwrap_or_default();
    configure_threads()?;
    match cli.command {
        Command::Tail { model, run } => {
            let run = run.layered(file.tail);
            let cfg = TailConfig::resolve(&model.layered(file.model), &run)?;
            Ok((cmd_tail(&cfg)?, run.output, None))
        }
        Command::Simulate { model, run } => {
            let run = run.layered(file.simulate);
            let cfg = SimulateConfig::resolve(&model.layered(file.model), &run)?;
            Ok((cmd_simulate(&cfg)?, run.output, run.summary))
        }
        Command::Hittime { model, run } => {
            let run = run.layered(file.hittime);
            let cfg = HittimeConfig::resolve(&model.layered(file.model), &run)?;
            Ok((cmd_hittime(&cfg)?, run.output, run.summary))
        }
        Command::Constants { model, run } => {
            let run = run.layered(file.constants);
            let model = Model::from_args(&model.layered(file.model))?;
            Ok((cmd_constants(&model, run.seed.unwrap_or(DEFAULT_MASTER_SEED))?, run.output, None))
        }
        Command::Verify => Ok((cmd_verify()?, None, None)),
    }
}

fn main() -> ExitCode {
    let (out, body_path, summary_path) = match run(Cli::parse()) {
        Ok(done) => done,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let written = write_to(body_path.as_deref(), &out.body, false).and_then(|_| match &out.summary {
        Some(s) => write_to(summary_path.as_deref(), s, true),
        None => Ok(()),
    });
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_FAILURE as u8);
    }
    ExitCode::SUCCESS
}
