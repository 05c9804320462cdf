use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use antclust::harness::config::{ConfigMap, GenJob};
use antclust::harness::trace::parse_trace;
use antclust::harness::{eval, generate, run, HarnessError, RunConfig, Snapshot};
use antclust::metrics::DEFAULT_LAMBDA;

#[derive(Parser)]
#[command(name = "antclust", version, about = "Ant-colony clustering of dynamic communication graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the engine over a trace or a generated workload.
    ///
    /// Any config key can be given as a flag: `--seed 3 --trace t.txt`.
    Run {
        /// Flat `key = value` config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// `--key value` overrides.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Write a generated workload trace plus its ground-truth sidecar.
    Gen {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Score a snapshot's coloring against the graph its trace builds.
    Eval {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
    },
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load(config: Option<&Path>, overrides: &[String]) -> Result<ConfigMap, HarnessError> {
    let mut map = match config {
        Some(path) => ConfigMap::parse(&read(path)?)?,
        None => ConfigMap::default(),
    };
    map.override_with(overrides)?;
    Ok(map)
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run { config, overrides } => {
            let config = RunConfig::from_map(load(config.as_deref(), &overrides)?)?;
            let summary = run(&config)?;
            eprintln!(
                "{} steps, {} moves, {} evacuations, {} snapshots",
                summary.steps, summary.moves, summary.evacuations, summary.snapshots
            );
        }
        Command::Gen { config, overrides } => {
            let job = GenJob::from_map(load(config.as_deref(), &overrides)?)?;
            let events = generate(&job)?;
            eprintln!("{events} events -> {}, truth -> {}", job.trace.display(), job.truth.display());
        }
        Command::Eval {
            trace,
            snapshot,
            lambda,
        } => {
            let events = parse_trace(&read(&trace)?)?;
            let snapshot = Snapshot::parse(&read(&snapshot)?)?;
            print!("{}", eval(&events, &snapshot, lambda)?.render());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("antclust: {e}");
            ExitCode::FAILURE
        }
    }
}
