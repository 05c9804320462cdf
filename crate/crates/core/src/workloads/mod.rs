//! Synthetic dynamic workloads with known structure.

mod churn;
mod communities;
mod flocking;

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::colony::SimRng;
use crate::graph::{ColorId, GraphEvent, VertexId};

pub use churn::{gen_churn, ChurnAction, ChurnSchedule, ScheduledAction, VertexChurn};
pub use communities::{gen_communities, CommunitySpec};
pub use flocking::{gen_flocking, Flock, FlockSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),
    #[error("inconsistent schedule: {0}")]
    Schedule(String),
}

/// Community label of a vertex in the ground truth.
pub type Label = u32;

/// An event stream plus the structure it was generated from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Workload {
    pub events: Vec<GraphEvent>,
    /// Label of every vertex live at the end of the stream.
    pub truth: BTreeMap<VertexId, Label>,
}

impl Workload {
    pub fn tick_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, GraphEvent::Tick)).count()
    }

    /// Registers colors `0..count` ahead of every other event.
    pub fn with_colors(mut self, count: u64) -> Self {
        let colors = (0..count).map(|c| GraphEvent::AddColor(ColorId(c)));
        self.events.splice(0..0, colors);
        self
    }

    /// Appends `count` bare ticks.
    pub fn with_extra_ticks(mut self, count: usize) -> Self {
        self.events.extend(std::iter::repeat_n(GraphEvent::Tick, count));
        self
    }
}

/// Calls `hit` with every index in `0..total` that passes a Bernoulli(p)
/// trial, skipping geometrically between successes.
pub(crate) fn bernoulli_indices(total: u64, p: f64, rng: &mut SimRng, mut hit: impl FnMut(u64)) {
    if total == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(hit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut i: u64 = 0;
    loop {
        // 1 - U lies in (0, 1], so the logarithm is finite.
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if skip >= (total - i) as f64 {
            return;
        }
        i += skip as u64;
        hit(i);
        i += 1;
        if i >= total {
            return;
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<(), WorkloadError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(WorkloadError::InvalidSpec(format!("{name} must be in [0, 1], got {p}")))
    }
}

fn check_weight(name: &str, w: f64) -> Result<(), WorkloadError> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        Err(WorkloadError::InvalidSpec(format!("{name} must be finite and >= 0, got {w}")))
    }
}
