//! Operational surface: configuration, file formats, and the run loop.

pub mod config;
pub mod output;
pub mod run;
pub mod snapshot;
pub mod trace;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::advisor::AdvisorError;
use crate::colony::ColonyError;
use crate::graph::GraphError;
use crate::metrics::MetricsError;
use crate::workloads::WorkloadError;

pub use config::{GenConfig, RunConfig, Source};
pub use run::{eval, generate, run, Evaluation, RunSummary, Simulation, StepOutput};
pub use snapshot::Snapshot;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Semantic { line: usize, source: GraphError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Colony(#[from] ColonyError),
    #[error(transparent)]
    Advisor(#[from] AdvisorError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error("{0}")]
    Mismatch(String),
}

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}

fn syntax(line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Syntax {
        line,
        message: message.into(),
    }
}

/// Splits a line at `#` and whitespace; `None` for blank and comment lines.
fn tokens(line: &str) -> Option<Vec<&str>> {
    let content = line.split('#').next().unwrap_or("");
    let fields: Vec<&str> = content.split_whitespace().collect();
    (!fields.is_empty()).then_some(fields)
}

fn field<T: std::str::FromStr>(line: usize, what: &str, text: &str) -> Result<T, HarnessError> {
    text.parse()
        .map_err(|_| syntax(line, format!("bad {what} `{text}`")))
}
