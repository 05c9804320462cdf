//! The ant system.
//!
//! One colony per live color. Ants walk the graph, deposit pheromone of
//! their color on every edge they cross, and are drawn by their own color,
//! by heavy edges, and pushed away by foreign colors. Each vertex takes the
//! color that dominates the pheromone on its incident edges.
//!
//! A step runs four phases in a fixed order: population management, ant
//! moves (colony order, then ant id), evaporation, recoloring.
//!
//! Colonies are ordered by color registration order, which is also the
//! order in which the graph stores pheromone channels. Processing order and
//! tie-breaks follow that order rather than the numeric [`ColorId`], so that
//! relabeling colors relabels the outcome and nothing else.

use std::collections::VecDeque;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{ColorId, DynamicGraph, Edge, EdgeId, ElementId, GraphError, VertexId};

/// Deterministic generator used throughout the engine and the generators.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ColonyError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no live vertex to relocate an ant to")]
    EmptyGraph,
    #[error("invalid colony parameter: {0}")]
    InvalidParams(String),
}

/// Tuning knobs of the ant system.
#[derive(Debug, Clone, PartialEq)]
pub struct ColonyParams {
    /// Exponent of the attraction to own-color pheromone.
    pub alpha: f64,
    /// Exponent of the attraction to edge weight.
    pub beta: f64,
    /// Exponent of the repulsion from foreign pheromone.
    pub gamma: f64,
    /// Fraction of pheromone lost per step.
    pub rho: f64,
    /// Pheromone deposited per edge crossing.
    pub q: f64,
    /// Smoothing floor added to pheromone before exponentiation.
    pub epsilon: f64,
    /// Values below this are truncated to exactly zero after evaporation.
    pub phi_min: f64,
    /// Ants per vertex per colony.
    pub eta: f64,
    /// Length of the tabu memory.
    pub tau: usize,
}

impl Default for ColonyParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 2.0,
            gamma: 1.0,
            rho: 0.1,
            q: 0.1,
            epsilon: 1e-3,
            phi_min: 1e-9,
            eta: 1.0,
            tau: 4,
        }
    }
}

impl ColonyParams {
    pub fn validate(&self) -> Result<(), ColonyError> {
        let bad = |what: &str| Err(ColonyError::InvalidParams(what.to_string()));
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !nonneg(self.alpha) {
            return bad("alpha must be >= 0");
        }
        if !nonneg(self.beta) {
            return bad("beta must be >= 0");
        }
        if !nonneg(self.gamma) {
            return bad("gamma must be >= 0");
        }
        if !(nonneg(self.rho) && self.rho < 1.0) {
            return bad("rho must be in [0, 1)");
        }
        if !pos(self.q) {
            return bad("q must be > 0");
        }
        if !pos(self.epsilon) {
            return bad("epsilon must be > 0");
        }
        if !nonneg(self.phi_min) {
            return bad("phi_min must be >= 0");
        }
        if !pos(self.eta) {
            return bad("eta must be > 0");
        }
        Ok(())
    }

    /// Colony size for a graph with `vertices` live vertices.
    pub fn colony_size(&self, vertices: usize) -> usize {
        (self.eta * vertices as f64).ceil() as usize
    }
}

#[derive(Debug, Clone)]
pub struct Ant {
    id: u64,
    color: ColorId,
    location: VertexId,
    tabu: VecDeque<VertexId>,
    // Storage slot the location last had; saves a hash lookup per move.
    hint: usize,
}

impl PartialEq for Ant {
    fn eq(&self, other: &Self) -> bool {
        (self.id, self.color, self.location, &self.tabu) == (other.id, other.color, other.location, &other.tabu)
    }
}

impl Ant {
    pub fn new(id: u64, color: ColorId, location: VertexId) -> Self {
        Self {
            id,
            color,
            location,
            tabu: VecDeque::new(),
            hint: usize::MAX,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn color(&self) -> ColorId {
        self.color
    }

    pub fn location(&self) -> VertexId {
        self.location
    }

    /// Recently visited vertices, oldest first. Includes the current location
    /// once the ant has moved.
    pub fn tabu(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.tabu.iter().copied()
    }

    pub fn with_tabu(mut self, tabu: impl IntoIterator<Item = VertexId>) -> Self {
        self.tabu = tabu.into_iter().collect();
        self
    }

    fn locate(&self, graph: &DynamicGraph) -> Result<usize, GraphError> {
        match graph.id_at(self.hint) {
            Some(v) if v == self.location => Ok(self.hint),
            _ => graph.slot_of(self.location),
        }
    }

    fn visit(&mut self, vertex: VertexId, slot: usize, tau: usize) {
        self.location = vertex;
        self.hint = slot;
        if tau == 0 {
            return;
        }
        while self.tabu.len() >= tau {
            self.tabu.pop_front();
        }
        self.tabu.push_back(vertex);
    }

    fn teleport(&mut self, vertex: VertexId, slot: usize) {
        self.location = vertex;
        self.hint = slot;
        self.tabu.clear();
    }
}

/// All ants of one color.
#[derive(Debug, Clone)]
pub struct Colony {
    color: ColorId,
    ants: Vec<Ant>,
    next_ant_id: u64,
}

impl Colony {
    fn new(color: ColorId) -> Self {
        Self {
            color,
            ants: Vec::new(),
            next_ant_id: 0,
        }
    }

    pub fn color(&self) -> ColorId {
        self.color
    }

    /// Ants in ascending id order.
    pub fn ants(&self) -> &[Ant] {
        &self.ants
    }

    fn spawn(&mut self, at: VertexId) -> u64 {
        let id = self.next_ant_id;
        self.next_ant_id += 1;
        self.ants.push(Ant::new(id, self.color, at));
        id
    }
}

/// Outcome of an edge choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    Edge(EdgeId),
    /// No edge with positive attractiveness, or the ant stands on a vertex
    /// currently held by another color.
    Stuck,
}

/// The clustering output: color and streak of every live vertex, by vertex id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColorAssignment {
    entries: Vec<VertexColor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexColor {
    pub vertex: VertexId,
    pub color: Option<ColorId>,
    pub streak: u32,
}

impl ColorAssignment {
    pub fn from_graph(graph: &DynamicGraph) -> Self {
        let mut entries: Vec<VertexColor> = graph
            .vertices()
            .map(|v| VertexColor {
                vertex: v.id(),
                color: v.color(),
                streak: v.streak(),
            })
            .collect();
        entries.sort_unstable_by_key(|e| e.vertex);
        Self { entries }
    }

    /// Builds an assignment from arbitrary (vertex, color) pairs with zero streaks.
    pub fn from_colors(colors: impl IntoIterator<Item = (VertexId, Option<ColorId>)>) -> Self {
        Self::from_entries(colors.into_iter().map(|(vertex, color)| VertexColor {
            vertex,
            color,
            streak: 0,
        }))
    }

    pub fn from_entries(entries: impl IntoIterator<Item = VertexColor>) -> Self {
        let mut entries: Vec<VertexColor> = entries.into_iter().collect();
        entries.sort_by_key(|e| e.vertex);
        entries.dedup_by_key(|e| e.vertex);
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `None` if the vertex is absent; `Some(None)` if it is unassigned.
    pub fn get(&self, v: VertexId) -> Option<Option<ColorId>> {
        self.entry(v).map(|e| e.color)
    }

    pub fn entry(&self, v: VertexId) -> Option<&VertexColor> {
        self.entries
            .binary_search_by_key(&v, |e| e.vertex)
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &VertexColor> + '_ {
        self.entries.iter()
    }

    /// Applies `f` to every assigned color.
    pub fn map_colors(&self, f: impl Fn(ColorId) -> ColorId) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| VertexColor {
                    color: e.color.map(&f),
                    ..*e
                })
                .collect(),
        }
    }
}

#[inline]
fn pow(x: f64, exponent: f64) -> f64 {
    if exponent == 1.0 {
        x
    } else if exponent == 2.0 {
        x * x
    } else if exponent == 0.0 {
        1.0
    } else {
        x.powf(exponent)
    }
}

pub(crate) fn attractiveness_slot(edge: &Edge, color_slot: usize, params: &ColonyParams) -> f64 {
    let pheromone = edge.pheromone_by_slot();
    let own = pheromone[color_slot];
    let foreign: f64 = pheromone
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != color_slot)
        .map(|(_, &p)| p)
        .sum();
    pow(edge.weight(), params.beta) * pow(params.epsilon + own, params.alpha)
        / pow(params.epsilon + foreign, params.gamma)
}

/// How strongly an ant of color `c` is drawn to edge `e`.
pub fn edge_attractiveness(
    graph: &DynamicGraph,
    e: EdgeId,
    c: ColorId,
    params: &ColonyParams,
) -> Result<f64, GraphError> {
    let edge = graph.edge(e).ok_or(GraphError::UnknownId(ElementId::Edge(e)))?;
    let slot = graph.color_slot(c).ok_or(GraphError::UnknownId(ElementId::Color(c)))?;
    Ok(attractiveness_slot(edge, slot, params))
}

/// Where each color's ants may stand and land: the vertices it holds plus the
/// unassigned ones, as vertex slots in storage order.
#[derive(Debug, Clone, Default)]
struct Terrain {
    held: Vec<Vec<usize>>,
    free: Vec<usize>,
}

impl Terrain {
    fn survey(&mut self, graph: &DynamicGraph) {
        let colors = graph.colors();
        self.held.resize_with(colors.len(), Vec::new);
        self.held.iter_mut().for_each(Vec::clear);
        self.free.clear();
        for slot in (0..graph.slot_bound()).filter(|&s| graph.is_live_slot(s)) {
            match graph.vertex_at(slot).color().and_then(|c| graph.color_slot(c)) {
                Some(k) => self.held[k].push(slot),
                None => self.free.push(slot),
            }
        }
    }

    fn of(graph: &DynamicGraph) -> Self {
        let mut terrain = Self::default();
        terrain.survey(graph);
        terrain
    }

    /// A colony without territory roams freely, so it can win some back.
    fn hostile(&self, color_slot: usize) -> bool {
        !self.held[color_slot].is_empty()
    }

    /// Uniform landing vertex: friendly ground if there is any, else anywhere.
    fn landing(&self, graph: &DynamicGraph, color_slot: usize, rng: &mut SimRng) -> Option<usize> {
        let held = &self.held[color_slot];
        let friendly = held.len() + self.free.len();
        if friendly > 0 {
            let i = rng.random_range(0..friendly);
            return Some(if i < held.len() { held[i] } else { self.free[i - held.len()] });
        }
        let live = graph.live_slots();
        (!live.is_empty()).then(|| live[rng.random_range(0..live.len())])
    }
}

/// Fills `out` with (edge slot, attractiveness) for the ant's candidate edges.
/// Leaves it empty when the ant stands on a vertex held by another color and
/// its own colony holds territory elsewhere.
fn fill_candidates(
    graph: &DynamicGraph,
    ant: &Ant,
    here: usize,
    color_slot: usize,
    terrain: &Terrain,
    params: &ColonyParams,
    out: &mut Vec<(usize, f64)>,
) {
    out.clear();
    let vertex = graph.vertex_at(here);
    if terrain.hostile(color_slot) && vertex.color().is_some_and(|c| c != ant.color) {
        return;
    }
    let incident = vertex.incident_slots();
    for e in incident.clone() {
        let edge = graph.edge_at(e);
        let far = if edge.ends[0] == ant.location { edge.ends[1] } else { edge.ends[0] };
        if !ant.tabu.contains(&far) {
            out.push((e, attractiveness_slot(edge, color_slot, params)));
        }
    }
    if out.is_empty() {
        for e in incident {
            out.push((e, attractiveness_slot(graph.edge_at(e), color_slot, params)));
        }
    }
}

fn color_slot_of(graph: &DynamicGraph, ant: &Ant) -> Result<usize, GraphError> {
    graph
        .color_slot(ant.color)
        .ok_or(GraphError::UnknownId(ElementId::Color(ant.color)))
}

/// Selection probability of every candidate edge. Empty when the ant is stuck.
pub fn selection_probabilities(
    graph: &DynamicGraph,
    ant: &Ant,
    params: &ColonyParams,
) -> Result<Vec<(EdgeId, f64)>, GraphError> {
    let slot = color_slot_of(graph, ant)?;
    let mut candidates = Vec::new();
    let here = ant.locate(graph)?;
    fill_candidates(graph, ant, here, slot, &Terrain::of(graph), params, &mut candidates);
    let total: f64 = candidates.iter().map(|&(_, a)| a).sum();
    if total <= 0.0 {
        return Ok(Vec::new());
    }
    Ok(candidates
        .into_iter()
        .map(|(e, a)| (graph.edge_at(e).id(), a / total))
        .collect())
}

fn roulette(candidates: &[(usize, f64)], rng: &mut SimRng) -> Option<usize> {
    let total: f64 = candidates.iter().map(|&(_, a)| a).sum();
    if !(total > 0.0) {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for &(e, a) in candidates {
        if a <= 0.0 {
            continue;
        }
        acc += a;
        last = Some(e);
        if target < acc {
            return Some(e);
        }
    }
    // Rounding can leave target marginally above the running sum.
    last
}

/// Picks the edge the ant crosses next, proportionally to attractiveness.
pub fn choose_edge(
    graph: &DynamicGraph,
    ant: &Ant,
    params: &ColonyParams,
    rng: &mut SimRng,
) -> Result<Choice, GraphError> {
    let slot = color_slot_of(graph, ant)?;
    let mut candidates = Vec::new();
    let here = ant.locate(graph)?;
    fill_candidates(graph, ant, here, slot, &Terrain::of(graph), params, &mut candidates);
    Ok(match roulette(&candidates, rng) {
        Some(e) => Choice::Edge(graph.edge_at(e).id()),
        None => Choice::Stuck,
    })
}

fn move_with_scratch(
    graph: &mut DynamicGraph,
    ant: &mut Ant,
    params: &ColonyParams,
    rng: &mut SimRng,
    terrain: &Terrain,
    scratch: &mut Vec<(usize, f64)>,
) -> Result<Choice, ColonyError> {
    let color = color_slot_of(graph, ant)?;
    let here = ant.locate(graph)?;
    fill_candidates(graph, ant, here, color, terrain, params, scratch);
    match roulette(scratch, rng) {
        Some(e) => {
            let edge = graph.edge_at_mut(e);
            edge.pheromone_mut()[color] += params.q;
            let id = edge.id();
            let far = edge.far_slot(here);
            let far_id = graph.vertex_at(far).id();
            ant.visit(far_id, far, params.tau);
            Ok(Choice::Edge(id))
        }
        None => {
            let slot = terrain.landing(graph, color, rng).ok_or(ColonyError::EmptyGraph)?;
            ant.teleport(graph.vertex_at(slot).id(), slot);
            Ok(Choice::Stuck)
        }
    }
}

/// Moves one ant across its chosen edge and deposits pheromone there, or
/// teleports it to a random friendly vertex when it is stuck.
pub fn move_and_deposit(
    graph: &mut DynamicGraph,
    ant: &mut Ant,
    params: &ColonyParams,
    rng: &mut SimRng,
) -> Result<Choice, ColonyError> {
    move_with_scratch(graph, ant, params, rng, &Terrain::of(graph), &mut Vec::new())
}

/// Geometric decay of every pheromone value, with truncation below `phi_min`.
pub fn evaporate(graph: &mut DynamicGraph, params: &ColonyParams) {
    let keep = 1.0 - params.rho;
    for edge in graph.edges_mut() {
        for p in edge.pheromone_mut() {
            *p *= keep;
            if *p < params.phi_min {
                *p = 0.0;
            }
        }
    }
}

fn dominant_slot(graph: &DynamicGraph, vertex_slot: usize, sums: &mut Vec<f64>) -> Option<ColorId> {
    let vertex = graph.vertex_at(vertex_slot);
    let colors = graph.colors();
    sums.clear();
    sums.resize(colors.len(), 0.0);
    for e in vertex.incident_slots() {
        for (sum, &p) in sums.iter_mut().zip(graph.edge_at(e).pheromone_by_slot()) {
            *sum += p;
        }
    }
    let best = sums.iter().copied().fold(0.0, f64::max);
    if best <= 0.0 {
        return vertex.color();
    }
    if let Some(current) = vertex.color() {
        if let Some(slot) = graph.color_slot(current) {
            if sums[slot] == best {
                return Some(current);
            }
        }
    }
    sums.iter().position(|&s| s == best).map(|slot| colors[slot])
}

/// Color of the dominant incident pheromone; the current color when there is
/// no evidence at all.
pub fn dominant_color(graph: &DynamicGraph, v: VertexId) -> Result<Option<ColorId>, GraphError> {
    let slot = graph.slot_of(v)?;
    Ok(dominant_slot(graph, slot, &mut Vec::new()))
}

/// Per-simulation ant system state.
#[derive(Debug, Clone)]
pub struct ColonyEngine {
    params: ColonyParams,
    rng: SimRng,
    colonies: Vec<Colony>,
    scratch: Vec<(usize, f64)>,
    sums: Vec<f64>,
    terrain: Terrain,
}

impl ColonyEngine {
    pub fn new(params: ColonyParams, seed: u64) -> Result<Self, ColonyError> {
        params.validate()?;
        Ok(Self {
            params,
            rng: seeded_rng(seed),
            colonies: Vec::new(),
            scratch: Vec::new(),
            sums: Vec::new(),
            terrain: Terrain::default(),
        })
    }

    pub fn params(&self) -> &ColonyParams {
        &self.params
    }

    /// Colonies in color registration order.
    pub fn colonies(&self) -> &[Colony] {
        &self.colonies
    }

    pub fn ant_count(&self) -> usize {
        self.colonies.iter().map(|c| c.ants.len()).sum()
    }

    /// Places an extra ant of `color` at `at`, creating the colony if needed.
    pub fn spawn_ant(&mut self, graph: &DynamicGraph, color: ColorId, at: VertexId) -> Result<u64, ColonyError> {
        graph.slot_of(at)?;
        self.sync_colonies(graph);
        let colony = self
            .colonies
            .iter_mut()
            .find(|c| c.color == color)
            .ok_or(GraphError::UnknownId(ElementId::Color(color)))?;
        Ok(colony.spawn(at))
    }

    fn sync_colonies(&mut self, graph: &DynamicGraph) {
        let live = graph.colors();
        self.colonies.retain(|c| live.contains(&c.color));
        for (slot, &color) in live.iter().enumerate() {
            if self.colonies.get(slot).map(|c| c.color) != Some(color) {
                self.colonies.insert(slot, Colony::new(color));
            }
        }
        debug_assert!(self.colonies.iter().map(|c| c.color).eq(live.iter().copied()));
    }

    /// Resizes every colony to `ceil(eta * |V|)` and re-seats ants whose
    /// vertex has disappeared.
    pub fn manage_population(&mut self, graph: &DynamicGraph) {
        self.sync_colonies(graph);
        let live = graph.live_slots();
        let target = self.params.colony_size(live.len());
        let rng = &mut self.rng;
        for colony in &mut self.colonies {
            if live.is_empty() {
                colony.ants.clear();
                continue;
            }
            for ant in &mut colony.ants {
                if ant.locate(graph).is_err() {
                    let slot = live[rng.random_range(0..live.len())];
                    ant.teleport(graph.vertex_at(slot).id(), slot);
                }
            }
            let len = colony.ants.len();
            if len > target {
                let mut doomed = index::sample(rng, len, len - target).into_vec();
                doomed.sort_unstable();
                for i in doomed.into_iter().rev() {
                    colony.ants.remove(i);
                }
            }
            while colony.ants.len() < target {
                let slot = live[rng.random_range(0..live.len())];
                colony.spawn(graph.vertex_at(slot).id());
            }
        }
    }

    /// Runs one full step and returns the resulting assignment.
    pub fn step(&mut self, graph: &mut DynamicGraph) -> Result<ColorAssignment, ColonyError> {
        self.manage_population(graph);
        self.terrain.survey(graph);
        for colony in &mut self.colonies {
            for ant in &mut colony.ants {
                move_with_scratch(graph, ant, &self.params, &mut self.rng, &self.terrain, &mut self.scratch)?;
            }
        }
        evaporate(graph, &self.params);
        for slot in 0..graph.slot_bound() {
            if !graph.is_live_slot(slot) {
                continue;
            }
            let color = dominant_slot(graph, slot, &mut self.sums);
            graph.vertex_at_mut(slot).set_color(color);
        }
        Ok(ColorAssignment::from_graph(graph))
    }
}
