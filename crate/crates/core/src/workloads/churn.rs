use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{check_probability, CommunitySpec, Label, Workload, WorkloadError};
use crate::colony::{seeded_rng, SimRng};
use crate::graph::{ColorId, DynamicGraph, EdgeId, GraphEvent, VertexId};

/// Structural change spliced into a stream.
#[derive(Debug, Clone, PartialEq)]
pub enum ChurnAction {
    /// Every pair across the two communities gains a `w_in` edge with
    /// probability `p`; existing edges between them are raised to `w_in`.
    /// Community `b` takes label `a`.
    Merge { a: Label, b: Label, p: f64 },
    /// Undoes a merge: removes every edge between the members that came from
    /// `a` and those that came from `b`, and restores label `b`.
    Split { a: Label, b: Label },
    /// A fresh community of `size` vertices, wired with the base `CommunitySpec`
    /// probabilities and weights.
    AddCommunity { size: usize },
    AddColor(ColorId),
    RemoveColor(ColorId),
}

/// `action` is emitted immediately before the `at`-th tick (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledAction {
    pub at: usize,
    pub action: ChurnAction,
}

/// Random vertex turnover on ticks `from..=until`. Rates are expected counts
/// per tick; newcomers join a uniformly chosen existing community.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexChurn {
    pub remove_rate: f64,
    pub add_rate: f64,
    pub from: usize,
    pub until: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChurnSchedule {
    /// Minimum number of ticks in the output; bare ticks are appended to the
    /// base stream as needed.
    pub steps: usize,
    pub actions: Vec<ScheduledAction>,
    pub churn: Option<VertexChurn>,
    pub seed: u64,
}

struct State<'a> {
    spec: &'a CommunitySpec,
    rng: SimRng,
    graph: DynamicGraph,
    out: Vec<GraphEvent>,
    label: BTreeMap<VertexId, Label>,
    origin: HashMap<VertexId, Label>,
    by_label: BTreeMap<Label, Vec<VertexId>>,
    live: Vec<VertexId>,
    live_pos: HashMap<VertexId, usize>,
    next_vertex: u64,
    next_edge: u64,
    next_label: Label,
    merged: HashSet<(Label, Label)>,
}

impl State<'_> {
    fn emit(&mut self, event: GraphEvent) -> Result<(), WorkloadError> {
        self.graph
            .apply(&event)
            .map_err(|e| WorkloadError::Schedule(format!("{e} while splicing {event:?}")))?;
        match event {
            GraphEvent::AddVertex(v) => {
                self.live_pos.insert(v, self.live.len());
                self.live.push(v);
                if let Some(&l) = self.label.get(&v) {
                    self.by_label.entry(l).or_default().push(v);
                }
            }
            GraphEvent::RemoveVertex(v) => {
                let pos = self.live_pos.remove(&v).expect("tracked vertex");
                self.live.swap_remove(pos);
                if let Some(&moved) = self.live.get(pos) {
                    self.live_pos.insert(moved, pos);
                }
                if let Some(l) = self.label.remove(&v) {
                    let members = self.by_label.get_mut(&l).expect("label members");
                    members.retain(|&m| m != v);
                    if members.is_empty() {
                        self.by_label.remove(&l);
                    }
                }
                self.origin.remove(&v);
            }
            _ => {}
        }
        self.out.push(event);
        Ok(())
    }

    fn add_vertex(&mut self, label: Label) -> Result<VertexId, WorkloadError> {
        let v = VertexId(self.next_vertex);
        self.next_vertex += 1;
        self.label.insert(v, label);
        self.origin.insert(v, label);
        self.emit(GraphEvent::AddVertex(v))?;
        Ok(v)
    }

    fn add_edge(&mut self, u: VertexId, v: VertexId, w: f64) -> Result<(), WorkloadError> {
        let e = EdgeId(self.next_edge);
        self.next_edge += 1;
        self.emit(GraphEvent::AddEdge(e, u, v, w))
    }

    /// Live members of `l`, possibly none after turnover. Labels that never
    /// existed are a schedule error.
    fn members(&self, l: Label) -> Result<Vec<VertexId>, WorkloadError> {
        if l >= self.next_label {
            return Err(WorkloadError::Schedule(format!("community {l} does not exist")));
        }
        Ok(self.by_label.get(&l).cloned().unwrap_or_default())
    }

    /// Each vertex of `pool` (other than `v` and those in `skip`) becomes a
    /// neighbor of `v` independently with probability `p`.
    fn wire(&mut self, v: VertexId, pool: &[VertexId], p: f64, w: f64, skip: Option<Label>) -> Result<(), WorkloadError> {
        if pool.is_empty() || p <= 0.0 {
            return Ok(());
        }
        let count = Binomial::new(pool.len() as u64, p.min(1.0)).expect("valid p").sample(&mut self.rng) as usize;
        let mut picks = index::sample(&mut self.rng, pool.len(), count).into_vec();
        picks.sort_unstable();
        for i in picks {
            let u = pool[i];
            if u == v || (skip.is_some() && self.label.get(&u).copied() == skip) {
                continue;
            }
            self.add_edge(v, u, w)?;
        }
        Ok(())
    }

    fn apply(&mut self, action: &ChurnAction) -> Result<(), WorkloadError> {
        match *action {
            ChurnAction::Merge { a, b, p } => {
                check_probability("merge p", p)?;
                if a == b {
                    return Err(WorkloadError::Schedule(format!("cannot merge community {a} with itself")));
                }
                let left = self.members(a)?;
                let right = self.members(b)?;
                for &u in &left {
                    for &v in &right {
                        match self.graph.edge_between(u, v) {
                            Some(e) => {
                                if self.graph.edge(e).map(|x| x.weight()) != Some(self.spec.w_in) {
                                    self.emit(GraphEvent::SetWeight(e, self.spec.w_in))?;
                                }
                            }
                            None => {
                                if p >= 1.0 || self.rng.random::<f64>() < p {
                                    self.add_edge(u, v, self.spec.w_in)?;
                                }
                            }
                        }
                    }
                }
                self.merged.insert((a, b));
                for v in right {
                    self.label.insert(v, a);
                }
                let moved = self.by_label.remove(&b).unwrap_or_default();
                self.by_label.entry(a).or_default().extend(moved);
            }
            ChurnAction::Split { a, b } => {
                if !self.merged.remove(&(a, b)) {
                    return Err(WorkloadError::Schedule(format!("community {b} was not merged into {a}")));
                }
                let group = self.members(a)?;
                let (from_b, from_a): (Vec<VertexId>, Vec<VertexId>) =
                    group.iter().partition(|v| self.origin.get(v) == Some(&b));
                let doomed: Vec<EdgeId> = from_a
                    .iter()
                    .flat_map(|&u| from_b.iter().map(move |&v| (u, v)))
                    .filter_map(|(u, v)| self.graph.edge_between(u, v))
                    .collect();
                for e in doomed {
                    self.emit(GraphEvent::RemoveEdge(e))?;
                }
                for &v in &from_b {
                    self.label.insert(v, b);
                }
                for (label, members) in [(a, from_a), (b, from_b)] {
                    if members.is_empty() {
                        self.by_label.remove(&label);
                    } else {
                        self.by_label.insert(label, members);
                    }
                }
            }
            ChurnAction::AddCommunity { size } => {
                let label = self.next_label;
                self.next_label += 1;
                let outsiders = self.live.clone();
                let mut fresh = Vec::with_capacity(size);
                for _ in 0..size {
                    let v = self.add_vertex(label)?;
                    let (p_in, w_in) = (self.spec.p_in, self.spec.w_in);
                    let peers = fresh.clone();
                    self.wire(v, &peers, p_in, w_in, None)?;
                    fresh.push(v);
                }
                for &v in &fresh {
                    let (p_out, w_out) = (self.spec.p_out, self.spec.w_out);
                    self.wire(v, &outsiders, p_out, w_out, None)?;
                }
            }
            ChurnAction::AddColor(c) => self.emit(GraphEvent::AddColor(c))?,
            ChurnAction::RemoveColor(c) => self.emit(GraphEvent::RemoveColor(c))?,
        }
        Ok(())
    }

    fn draw_count(&mut self, rate: f64) -> usize {
        let whole = rate.floor();
        let extra = if self.rng.random::<f64>() < rate - whole { 1 } else { 0 };
        whole as usize + extra
    }

    fn turnover(&mut self, churn: &VertexChurn) -> Result<(), WorkloadError> {
        let removals = self.draw_count(churn.remove_rate);
        for _ in 0..removals.min(self.live.len()) {
            let v = self.live[self.rng.random_range(0..self.live.len())];
            self.emit(GraphEvent::RemoveVertex(v))?;
        }
        let additions = self.draw_count(churn.add_rate);
        for _ in 0..additions {
            let labels: Vec<Label> = self.by_label.keys().copied().collect();
            let label = if labels.is_empty() {
                0
            } else {
                labels[self.rng.random_range(0..labels.len())]
            };
            let peers = self.by_label.get(&label).cloned().unwrap_or_default();
            let others = self.live.clone();
            let v = self.add_vertex(label)?;
            self.wire(v, &peers, self.spec.p_in, self.spec.w_in, None)?;
            self.wire(v, &others, self.spec.p_out, self.spec.w_out, Some(label))?;
        }
        Ok(())
    }
}

/// Splices scheduled structural changes and vertex turnover into `base`.
/// With an empty schedule the output equals `base`.
pub fn gen_churn(base: &Workload, spec: &CommunitySpec, schedule: &ChurnSchedule) -> Result<Workload, WorkloadError> {
    spec.validate()?;
    let mut segments: Vec<&[GraphEvent]> = base.events.split(|e| matches!(e, GraphEvent::Tick)).collect();
    let trailing = segments.pop().unwrap_or(&[]);
    let total = segments.len().max(schedule.steps);
    for s in &schedule.actions {
        if s.at == 0 || s.at > total {
            return Err(WorkloadError::Schedule(format!("action at tick {} outside 1..={total}", s.at)));
        }
    }

    let mut next_vertex = 0;
    let mut next_edge = 0;
    for event in &base.events {
        match *event {
            GraphEvent::AddVertex(v) => next_vertex = next_vertex.max(v.0 + 1),
            GraphEvent::AddEdge(e, ..) => next_edge = next_edge.max(e.0 + 1),
            _ => {}
        }
    }
    let mut state = State {
        spec,
        rng: seeded_rng(schedule.seed),
        graph: DynamicGraph::new(),
        out: Vec::with_capacity(base.events.len() + total),
        label: base.truth.clone(),
        origin: base.truth.iter().map(|(&v, &l)| (v, l)).collect(),
        by_label: BTreeMap::new(),
        live: Vec::new(),
        live_pos: HashMap::new(),
        next_vertex,
        next_edge,
        next_label: base.truth.values().copied().max().map_or(0, |l| l + 1),
        merged: HashSet::new(),
    };

    for tick in 1..=total {
        if let Some(segment) = segments.get(tick - 1) {
            for event in segment.iter() {
                state.emit(event.clone())?;
            }
        }
        for s in schedule.actions.iter().filter(|s| s.at == tick) {
            state.apply(&s.action)?;
        }
        if let Some(churn) = &schedule.churn {
            if (churn.from..=churn.until).contains(&tick) {
                state.turnover(churn)?;
            }
        }
        state.emit(GraphEvent::Tick)?;
    }
    for event in trailing {
        state.emit(event.clone())?;
    }
    Ok(Workload {
        events: state.out,
        truth: state.label,
    })
}
