use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use cohistory::config::PipelineConfig;
use cohistory::pipeline::{run_all, run_stage, Stage, StageRun};
use cohistory::verify::verify;
use cohistory::{PipelineError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Ingest,
    Affiliation,
    Score,
    Communities,
    Consensus,
    Cut,
    Backbone,
    Timeline,
    Subnet,
    /// Every stage in order.
    All,
    /// Re-check invariants on the artifacts on disk.
    Verify,
}

/// Staged co-occurrence network pipeline.
#[derive(Debug, Parser)]
#[command(name = "pipeline", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; defaults to the number of cores. Outputs do not
    /// depend on it.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Recompute even when cached, and overwrite outputs made with other settings.
    #[arg(long)]
    force: bool,
}

fn report(run: &StageRun) {
    let state = if run.cached { "cached" } else { "done" };
    println!("{:<12} {state} ({} artifacts)", run.stage.name(), run.manifest.outputs.len());
}

fn execute(args: &Args) -> Result<()> {
    let config = PipelineConfig::load(&args.config)?;
    let stage = match args.command {
        Command::All => {
            for run in run_all(&config, args.force)? {
                report(&run);
            }
            return Ok(());
        }
        Command::Verify => {
            let result = verify(&config)?;
            println!("{result}");
            return match result.violations() {
                0 => Ok(()),
                n => Err(PipelineError::Violations(n)),
            };
        }
        other => Stage::parse(&format!("{other:?}").to_lowercase()).expect("stage command"),
    };
    report(&run_stage(stage, &config, args.force)?);
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n as usize);
    }
    if let Err(e) = pool.build_global() {
        eprintln!("error: cannot start worker threads: {e}");
        return ExitCode::from(1);
    }
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
