//! The simulation loop and the three subcommands behind the CLI.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::{GenJob, RunConfig, Source};
use super::output::{advice_lines, csv_row, CSV_HEADER};
use super::snapshot::Snapshot;
use super::trace::{parse_trace_lines, write_trace, write_truth, TraceLine};
use super::{io_error, HarnessError};
use crate::advisor::{Advisor, MigrationAdvice};
use crate::colony::{ColonyEngine, ColonyParams, ColorAssignment};
use crate::graph::{DynamicGraph, GraphEvent};
use crate::metrics::{brute_force_optimum, cut_ratio, balance, score, MetricsRecord, Optimum, BRUTE_FORCE_MAX_VERTICES};

/// Graph, engine, and advisor driven together, one step per tick.
#[derive(Debug, Clone)]
pub struct Simulation {
    graph: DynamicGraph,
    engine: ColonyEngine,
    advisor: Advisor,
    lambda: f64,
    previous: ColorAssignment,
    steps: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub record: MetricsRecord,
    /// `None` while no color is live.
    pub advice: Option<MigrationAdvice>,
    pub assignment: ColorAssignment,
}

impl Simulation {
    pub fn new(params: ColonyParams, seed: u64, h: u32, lambda: f64) -> Result<Self, HarnessError> {
        Ok(Self {
            graph: DynamicGraph::new(),
            engine: ColonyEngine::new(params, seed)?,
            advisor: Advisor::new(h)?,
            lambda,
            previous: ColorAssignment::default(),
            steps: 0,
        })
    }

    pub fn from_config(config: &RunConfig) -> Result<Self, HarnessError> {
        Self::new(config.params.clone(), config.seed, config.h, config.lambda)
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn advisor(&self) -> &Advisor {
        &self.advisor
    }

    /// Steps taken so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn apply(&mut self, event: &GraphEvent) -> Result<(), HarnessError> {
        self.graph.apply(event)?;
        Ok(())
    }

    pub fn step(&mut self) -> Result<StepOutput, HarnessError> {
        self.steps += 1;
        let assignment = self.engine.step(&mut self.graph)?;
        let record = MetricsRecord::compute(self.steps, &self.graph, &assignment, &self.previous, self.lambda);
        let advice = if self.graph.colors().is_empty() {
            None
        } else {
            Some(self.advisor.advise(self.steps, &assignment, self.graph.colors())?)
        };
        self.previous = assignment.clone();
        Ok(StepOutput {
            record,
            advice,
            assignment,
        })
    }

    /// Applies `events`, stepping at every tick, until the stream ends or
    /// `max_steps` steps have run. `on_step` sees the simulation after each step.
    pub fn drive<'a>(
        &mut self,
        events: impl IntoIterator<Item = &'a GraphEvent>,
        max_steps: u64,
        mut on_step: impl FnMut(&Simulation, &StepOutput) -> Result<(), HarnessError>,
    ) -> Result<(), HarnessError> {
        for event in events {
            if self.steps >= max_steps {
                break;
            }
            match event {
                GraphEvent::Tick => {
                    let out = self.step()?;
                    on_step(self, &out)?;
                }
                other => self.apply(other)?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunSummary {
    pub steps: u64,
    pub moves: usize,
    pub evacuations: usize,
    pub snapshots: usize,
}

struct Sinks {
    metrics: BufWriter<Box<dyn Write>>,
    metrics_path: PathBuf,
    advice: Option<(BufWriter<fs::File>, PathBuf)>,
    snapshots: Option<PathBuf>,
    snapshot_every: u64,
}

fn create(path: &Path) -> Result<fs::File, HarnessError> {
    fs::File::create(path).map_err(io_error(path))
}

impl Sinks {
    fn open(config: &RunConfig) -> Result<Self, HarnessError> {
        let (metrics, metrics_path): (Box<dyn Write>, PathBuf) = match &config.metrics {
            Some(path) => (Box::new(create(path)?), path.clone()),
            None => (Box::new(io::stdout()), PathBuf::from("<stdout>")),
        };
        let advice = match &config.advice {
            Some(path) => Some((BufWriter::new(create(path)?), path.clone())),
            None => None,
        };
        if let Some(dir) = &config.snapshots {
            fs::create_dir_all(dir).map_err(io_error(dir))?;
        }
        let mut sinks = Self {
            metrics: BufWriter::new(metrics),
            metrics_path,
            advice,
            snapshots: config.snapshots.clone(),
            snapshot_every: config.snapshot_every,
        };
        writeln!(sinks.metrics, "{CSV_HEADER}").map_err(io_error(&sinks.metrics_path))?;
        Ok(sinks)
    }

    fn record(&mut self, sim: &Simulation, out: &StepOutput, summary: &mut RunSummary) -> Result<(), HarnessError> {
        summary.steps = out.record.step;
        let moves = out.advice.as_ref().map_or(0, |a| a.moves.len());
        summary.moves += moves;
        writeln!(self.metrics, "{}", csv_row(&out.record, moves)).map_err(io_error(&self.metrics_path))?;
        if let (Some((file, path)), Some(advice)) = (&mut self.advice, &out.advice) {
            summary.evacuations += advice.evacuations.len();
            file.write_all(advice_lines(advice).as_bytes()).map_err(io_error(path.as_path()))?;
        }
        if let Some(dir) = &self.snapshots {
            if self.snapshot_every > 0 && out.record.step % self.snapshot_every == 0 {
                let path = dir.join(snapshot_name(out.record.step));
                let text = Snapshot::capture(out.record.step, sim.graph()).render();
                fs::write(&path, text).map_err(io_error(&path))?;
                summary.snapshots += 1;
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<(), HarnessError> {
        self.metrics.flush().map_err(io_error(&self.metrics_path))?;
        if let Some((mut file, path)) = self.advice {
            file.flush().map_err(io_error(path))?;
        }
        Ok(())
    }
}

/// File name of the snapshot taken after `step`.
pub fn snapshot_name(step: u64) -> String {
    format!("step-{step:08}.snap")
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceLine>, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    parse_trace_lines(&text)
}

/// Executes a run and writes its outputs.
pub fn run(config: &RunConfig) -> Result<RunSummary, HarnessError> {
    let mut sim = Simulation::from_config(config)?;
    let lines = match &config.source {
        Source::Trace(path) => Some(read_trace(path)?),
        Source::Generated(_) => None,
    };
    let mut sinks = Sinks::open(config)?;
    let mut summary = RunSummary::default();
    match (&config.source, lines) {
        (Source::Trace(_), Some(lines)) => {
            // Stepped by hand so graph errors can name their trace line.
            for TraceLine { line, event } in lines {
                if sim.steps() >= config.max_steps {
                    break;
                }
                match event {
                    GraphEvent::Tick => {
                        let out = sim.step()?;
                        sinks.record(&sim, &out, &mut summary)?;
                    }
                    other => sim
                        .graph
                        .apply(&other)
                        .map_err(|source| HarnessError::Semantic { line, source })?,
                }
            }
        }
        (Source::Generated(gen), _) => {
            let workload = gen.generate()?;
            sim.drive(&workload.events, config.max_steps, |sim, out| {
                sinks.record(sim, out, &mut summary)
            })?;
        }
        (Source::Trace(_), None) => unreachable!("trace read above"),
    }
    sinks.finish()?;
    Ok(summary)
}

/// Writes a generated trace and its ground truth.
pub fn generate(job: &GenJob) -> Result<usize, HarnessError> {
    let workload = job.gen.generate()?;
    for (path, text) in [
        (&job.trace, write_trace(&workload.events)),
        (&job.truth, write_truth(&workload.truth)),
    ] {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_error(dir))?;
        }
        fs::write(path, text).map_err(io_error(path.as_path()))?;
    }
    Ok(workload.events.len())
}

/// Metrics of a snapshot's coloring on the graph its trace builds.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub step: u64,
    pub cut_ratio: f64,
    pub balance: f64,
    pub score: f64,
    /// Present when the graph is small enough to enumerate and has colors.
    pub optimum: Option<Optimum>,
}

impl Evaluation {
    pub fn render(&self) -> String {
        let mut out = format!(
            "step={}\ncut_ratio={:.6}\nbalance={:.6}\nscore={:.6}\n",
            self.step, self.cut_ratio, self.balance, self.score
        );
        if let Some(opt) = &self.optimum {
            out += &format!(
                "optimum_score={:.6}\noptimum_cut_ratio={:.6}\noptimum_balance={:.6}\nscore_over_optimum={:.6}\n",
                opt.score,
                opt.cut_ratio,
                opt.balance,
                if opt.score > 0.0 { self.score / opt.score } else { 1.0 }
            );
        }
        out
    }
}

/// Replays `trace` through the snapshot's step and scores the snapshot's
/// vertex colors on the resulting graph.
pub fn eval(trace: &[GraphEvent], snapshot: &Snapshot, lambda: f64) -> Result<Evaluation, HarnessError> {
    let mut graph = DynamicGraph::new();
    let mut ticks = 0u64;
    for event in trace {
        if matches!(event, GraphEvent::Tick) {
            if ticks == snapshot.step {
                break;
            }
            ticks += 1;
            if ticks == snapshot.step {
                break;
            }
        } else {
            graph.apply(event)?;
        }
    }
    if ticks < snapshot.step {
        return Err(HarnessError::Mismatch(format!(
            "trace has {ticks} steps, snapshot is at step {}",
            snapshot.step
        )));
    }
    let mut live: Vec<_> = graph.vertices().map(|v| v.id()).collect();
    live.sort_unstable();
    if !live.iter().copied().eq(snapshot.vertices.iter().map(|&(v, _)| v)) {
        return Err(HarnessError::Mismatch(
            "snapshot vertices differ from the trace's graph at that step".into(),
        ));
    }
    let assignment = snapshot.assignment();
    let cut = cut_ratio(&graph, &assignment);
    let bal = balance(&assignment, graph.colors());
    let k = graph.colors().len();
    let optimum = if k > 0 && graph.vertex_count() <= BRUTE_FORCE_MAX_VERTICES {
        Some(brute_force_optimum(&graph, k, lambda)?)
    } else {
        None
    };
    Ok(Evaluation {
        step: snapshot.step,
        cut_ratio: cut,
        balance: bal,
        score: score(cut, bal, lambda),
        optimum,
    })
}
