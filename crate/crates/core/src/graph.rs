//! Event-sourced dynamic weighted graph.
//!
//! Vertices are entities, edges are communication links. Every edge carries
//! one pheromone value per live color. Colors are kept in registration order;
//! a color's position in that order is its slot, and pheromone vectors are
//! indexed by slot.

use std::collections::{HashMap, HashSet};
use std::fmt;

use smallvec::{smallvec, SmallVec};
use thiserror::Error;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Identifier of an entity.
    VertexId
);
id_type!(
    /// Identifier of a communication link.
    EdgeId
);
id_type!(
    /// Identifier of a color: one pheromone channel, one colony, one resource.
    ColorId
);

/// Any identifier the graph knows about, used in error reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementId {
    Vertex(VertexId),
    Edge(EdgeId),
    Color(ColorId),
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementId::Vertex(v) => write!(f, "vertex {v}"),
            ElementId::Edge(e) => write!(f, "edge {e}"),
            ElementId::Color(c) => write!(f, "color {c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("unknown {0}")]
    UnknownId(ElementId),
    #[error("duplicate {0}")]
    DuplicateId(ElementId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge weight must be finite and non-negative, got {0}")]
    NegativeWeight(f64),
}

/// A change to the communication structure or to the set of resources.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphEvent {
    AddVertex(VertexId),
    RemoveVertex(VertexId),
    AddEdge(EdgeId, VertexId, VertexId, f64),
    RemoveEdge(EdgeId),
    SetWeight(EdgeId, f64),
    AddColor(ColorId),
    RemoveColor(ColorId),
    /// Step boundary. Does not change the graph.
    Tick,
}

#[derive(Debug, Clone)]
pub struct Vertex {
    id: VertexId,
    // Inline so a vertex's edge list sits next to it rather than somewhere
    // on the heap.
    incident: SmallVec<[u32; 16]>,
    color: Option<ColorId>,
    streak: u32,
    live_pos: usize,
}

impl Vertex {
    pub fn id(&self) -> VertexId {
        self.id
    }

    pub fn degree(&self) -> usize {
        self.incident.len()
    }

    pub fn color(&self) -> Option<ColorId> {
        self.color
    }

    /// Consecutive steps spent with the current color; 0 while unassigned.
    pub fn streak(&self) -> u32 {
        self.streak
    }

    pub(crate) fn incident_slots(&self) -> impl Iterator<Item = usize> + Clone + '_ {
        self.incident.iter().map(|&e| e as usize)
    }

    pub(crate) fn set_color(&mut self, color: Option<ColorId>) {
        match color {
            None => self.streak = 0,
            Some(c) if self.color == Some(c) => self.streak = self.streak.saturating_add(1),
            Some(_) => self.streak = 1,
        }
        self.color = color;
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    id: EdgeId,
    pub(crate) ends: [VertexId; 2],
    slots: [usize; 2],
    weight: f64,
    pheromone: SmallVec<[f64; 4]>,
}

impl Edge {
    pub fn id(&self) -> EdgeId {
        self.id
    }

    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.ends[0], self.ends[1])
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Pheromone per color slot, in color registration order.
    pub fn pheromone_by_slot(&self) -> &[f64] {
        &self.pheromone
    }

    pub(crate) fn pheromone_mut(&mut self) -> &mut [f64] {
        &mut self.pheromone
    }

    pub(crate) fn far_slot(&self, from: usize) -> usize {
        if self.slots[0] == from {
            self.slots[1]
        } else {
            self.slots[0]
        }
    }
}

/// The communication graph plus its per-color pheromone fields.
#[derive(Debug, Clone, Default)]
pub struct DynamicGraph {
    vertices: Vec<Option<Vertex>>,
    vertex_holes: usize,
    vertex_slot: HashMap<VertexId, usize>,
    live: Vec<usize>,
    edges: Vec<Option<Edge>>,
    edge_holes: usize,
    edge_slot: HashMap<EdgeId, usize>,
    pairs: HashMap<(VertexId, VertexId), EdgeId>,
    edge_count: usize,
    colors: Vec<ColorId>,
    retired_vertices: HashSet<VertexId>,
    retired_edges: HashSet<EdgeId>,
    retired_colors: HashSet<ColorId>,
}

fn pair_key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

fn check_weight(weight: f64) -> Result<(), GraphError> {
    if weight.is_finite() && weight >= 0.0 {
        Ok(())
    } else {
        Err(GraphError::NegativeWeight(weight))
    }
}

impl DynamicGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph by replaying `events` from the empty graph.
    pub fn replay<'a>(events: impl IntoIterator<Item = &'a GraphEvent>) -> Result<Self, GraphError> {
        let mut graph = Self::new();
        for event in events {
            graph.apply(event)?;
        }
        Ok(graph)
    }

    pub fn apply(&mut self, event: &GraphEvent) -> Result<(), GraphError> {
        match *event {
            GraphEvent::AddVertex(v) => self.add_vertex(v),
            GraphEvent::RemoveVertex(v) => self.remove_vertex(v),
            GraphEvent::AddEdge(e, u, v, w) => self.add_edge(e, u, v, w),
            GraphEvent::RemoveEdge(e) => self.remove_edge(e),
            GraphEvent::SetWeight(e, w) => self.set_weight(e, w),
            GraphEvent::AddColor(c) => self.add_color(c),
            GraphEvent::RemoveColor(c) => self.remove_color(c),
            GraphEvent::Tick => Ok(()),
        }
    }

    pub fn add_vertex(&mut self, id: VertexId) -> Result<(), GraphError> {
        if self.vertex_slot.contains_key(&id) || self.retired_vertices.contains(&id) {
            return Err(GraphError::DuplicateId(ElementId::Vertex(id)));
        }
        let vertex = Vertex {
            id,
            incident: SmallVec::new(),
            color: None,
            streak: 0,
            live_pos: self.live.len(),
        };
        self.vertices.push(Some(vertex));
        let slot = self.vertices.len() - 1;
        self.vertex_slot.insert(id, slot);
        self.live.push(slot);
        Ok(())
    }

    pub fn remove_vertex(&mut self, id: VertexId) -> Result<(), GraphError> {
        let slot = self.slot_of(id)?;
        let incident: Vec<usize> = self.vertex_at(slot).incident_slots().collect();
        for edge_slot in incident {
            self.detach_edge(edge_slot);
        }
        let vertex = self.vertices[slot].take().expect("live slot");
        self.live.swap_remove(vertex.live_pos);
        if let Some(&moved) = self.live.get(vertex.live_pos) {
            self.vertex_at_mut(moved).live_pos = vertex.live_pos;
        }
        self.vertex_slot.remove(&id);
        self.vertex_holes += 1;
        self.retired_vertices.insert(id);
        self.compact_if_sparse();
        Ok(())
    }

    pub fn add_edge(&mut self, id: EdgeId, u: VertexId, v: VertexId, weight: f64) -> Result<(), GraphError> {
        if self.edge_slot.contains_key(&id) || self.retired_edges.contains(&id) {
            return Err(GraphError::DuplicateId(ElementId::Edge(id)));
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        check_weight(weight)?;
        let su = self.slot_of(u)?;
        let sv = self.slot_of(v)?;
        let key = pair_key(u, v);
        if let Some(&existing) = self.pairs.get(&key) {
            return Err(GraphError::DuplicateId(ElementId::Edge(existing)));
        }
        let edge = Edge {
            id,
            ends: [u, v],
            slots: [su, sv],
            weight,
            pheromone: smallvec![0.0; self.colors.len()],
        };
        self.edges.push(Some(edge));
        let slot = self.edges.len() - 1;
        let packed = u32::try_from(slot).expect("fewer than 2^32 edge slots");
        self.vertex_at_mut(su).incident.push(packed);
        self.vertex_at_mut(sv).incident.push(packed);
        self.edge_slot.insert(id, slot);
        self.pairs.insert(key, id);
        self.edge_count += 1;
        Ok(())
    }

    pub fn remove_edge(&mut self, id: EdgeId) -> Result<(), GraphError> {
        let slot = *self
            .edge_slot
            .get(&id)
            .ok_or(GraphError::UnknownId(ElementId::Edge(id)))?;
        self.detach_edge(slot);
        self.compact_if_sparse();
        Ok(())
    }

    fn detach_edge(&mut self, slot: usize) {
        let edge = self.edges[slot].take().expect("live edge slot");
        for end in edge.slots {
            let incident = &mut self.vertex_at_mut(end).incident;
            let pos = incident.iter().position(|&s| s as usize == slot).expect("incidence is symmetric");
            incident.swap_remove(pos);
        }
        self.edge_slot.remove(&edge.id);
        self.pairs.remove(&pair_key(edge.ends[0], edge.ends[1]));
        self.edge_holes += 1;
        self.retired_edges.insert(edge.id);
        self.edge_count -= 1;
    }

    /// Slots are never reused, so additions land at the end of storage. Once
    /// holes make up a quarter of either store, both are rebuilt with tightly
    /// knit groups of vertices stored together, and each vertex's edges next
    /// to it. Incidence order is preserved.
    fn compact_if_sparse(&mut self) {
        let sparse = |holes: usize, len: usize| holes >= 64 && holes * 4 >= len;
        if sparse(self.vertex_holes, self.vertices.len()) || sparse(self.edge_holes, self.edges.len()) {
            self.relayout();
        }
    }

    /// A few rounds of label propagation: each vertex takes the label with
    /// the most incident weight, lowest label on ties.
    fn group_labels(&self) -> Vec<usize> {
        let mut label: Vec<usize> = (0..self.vertices.len()).collect();
        let mut votes: Vec<(usize, f64)> = Vec::new();
        for _ in 0..5 {
            for slot in 0..self.vertices.len() {
                let Some(vertex) = &self.vertices[slot] else { continue };
                votes.clear();
                votes.extend(vertex.incident_slots().map(|e| {
                    let edge = self.edge_at(e);
                    (label[edge.far_slot(slot)], edge.weight)
                }));
                votes.sort_unstable_by_key(|&(l, _)| l);
                let mut best = (label[slot], 0.0);
                let mut i = 0;
                while i < votes.len() {
                    let l = votes[i].0;
                    let mut w = 0.0;
                    while i < votes.len() && votes[i].0 == l {
                        w += votes[i].1;
                        i += 1;
                    }
                    if w > best.1 {
                        best = (l, w);
                    }
                }
                label[slot] = best.0;
            }
        }
        label
    }

    fn relayout(&mut self) {
        let label = self.group_labels();
        let mut order: Vec<usize> = (0..self.vertices.len()).filter(|&s| self.vertices[s].is_some()).collect();
        order.sort_by_key(|&s| (label[s], s));
        let mut vertex_map = vec![usize::MAX; self.vertices.len()];
        for (new, &old) in order.iter().enumerate() {
            vertex_map[old] = new;
        }
        let mut edge_map = vec![usize::MAX; self.edges.len()];
        let mut edges = Vec::with_capacity(self.edge_count);
        for &slot in &order {
            for e in self.vertex_at(slot).incident_slots() {
                if edge_map[e] == usize::MAX {
                    edge_map[e] = edges.len();
                    edges.push(e);
                }
            }
        }
        let mut old_edges = std::mem::take(&mut self.edges);
        self.edges = edges
            .iter()
            .map(|&e| {
                let mut edge = old_edges[e].take();
                if let Some(edge) = &mut edge {
                    edge.slots = edge.slots.map(|s| vertex_map[s]);
                    self.edge_slot.insert(edge.id, edge_map[e]);
                }
                edge
            })
            .collect();
        let mut old_vertices = std::mem::take(&mut self.vertices);
        self.vertices = order
            .iter()
            .map(|&v| {
                let mut vertex = old_vertices[v].take();
                if let Some(vertex) = &mut vertex {
                    vertex.incident = vertex.incident.iter().map(|&e| edge_map[e as usize] as u32).collect();
                    self.vertex_slot.insert(vertex.id, vertex_map[v]);
                }
                vertex
            })
            .collect();
        self.live.iter_mut().for_each(|s| *s = vertex_map[*s]);
        self.vertex_holes = 0;
        self.edge_holes = 0;
    }

    /// Upper bound on vertex slots; some below it may be empty.
    pub(crate) fn slot_bound(&self) -> usize {
        self.vertices.len()
    }

    /// Id of the vertex in `slot`, if the slot exists and is occupied.
    pub(crate) fn id_at(&self, slot: usize) -> Option<VertexId> {
        self.vertices.get(slot)?.as_ref().map(|v| v.id)
    }

    pub(crate) fn is_live_slot(&self, slot: usize) -> bool {
        self.vertices[slot].is_some()
    }

    pub fn set_weight(&mut self, id: EdgeId, weight: f64) -> Result<(), GraphError> {
        let slot = *self
            .edge_slot
            .get(&id)
            .ok_or(GraphError::UnknownId(ElementId::Edge(id)))?;
        check_weight(weight)?;
        self.edge_at_mut(slot).weight = weight;
        Ok(())
    }

    pub fn add_color(&mut self, id: ColorId) -> Result<(), GraphError> {
        if self.colors.contains(&id) || self.retired_colors.contains(&id) {
            return Err(GraphError::DuplicateId(ElementId::Color(id)));
        }
        self.colors.push(id);
        for edge in self.edges.iter_mut().flatten() {
            edge.pheromone.push(0.0);
        }
        Ok(())
    }

    pub fn remove_color(&mut self, id: ColorId) -> Result<(), GraphError> {
        let slot = self.color_slot(id).ok_or(GraphError::UnknownId(ElementId::Color(id)))?;
        self.colors.remove(slot);
        for edge in self.edges.iter_mut().flatten() {
            edge.pheromone.remove(slot);
        }
        for vertex in self.vertices.iter_mut().flatten() {
            if vertex.color == Some(id) {
                vertex.set_color(None);
            }
        }
        self.retired_colors.insert(id);
        Ok(())
    }

    /// Sum of color `c` pheromone over the edges incident to `v`.
    pub fn incident_pheromone(&self, v: VertexId, c: ColorId) -> Result<f64, GraphError> {
        let slot = self.slot_of(v)?;
        let color = self.color_slot(c).ok_or(GraphError::UnknownId(ElementId::Color(c)))?;
        Ok(self.incident_pheromone_slot(slot, color))
    }

    pub(crate) fn incident_pheromone_slot(&self, vertex_slot: usize, color_slot: usize) -> f64 {
        self.vertex_at(vertex_slot)
            .incident_slots()
            .map(|e| self.edge_at(e).pheromone[color_slot])
            .sum()
    }

    pub fn pheromone(&self, e: EdgeId, c: ColorId) -> Result<f64, GraphError> {
        let edge = self.edge(e).ok_or(GraphError::UnknownId(ElementId::Edge(e)))?;
        let color = self.color_slot(c).ok_or(GraphError::UnknownId(ElementId::Color(c)))?;
        Ok(edge.pheromone[color])
    }

    /// Adds `amount` of color `c` pheromone to edge `e`.
    pub fn deposit(&mut self, e: EdgeId, c: ColorId, amount: f64) -> Result<(), GraphError> {
        check_weight(amount)?;
        let slot = *self
            .edge_slot
            .get(&e)
            .ok_or(GraphError::UnknownId(ElementId::Edge(e)))?;
        let color = self.color_slot(c).ok_or(GraphError::UnknownId(ElementId::Color(c)))?;
        self.edge_at_mut(slot).pheromone[color] += amount;
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.live.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Live colors in registration order.
    pub fn colors(&self) -> &[ColorId] {
        &self.colors
    }

    pub fn color_slot(&self, c: ColorId) -> Option<usize> {
        self.colors.iter().position(|&k| k == c)
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertex_slot.contains_key(&v)
    }

    pub fn vertex(&self, v: VertexId) -> Option<&Vertex> {
        self.vertex_slot.get(&v).map(|&s| self.vertex_at(s))
    }

    pub fn edge(&self, e: EdgeId) -> Option<&Edge> {
        self.edge_slot.get(&e).map(|&s| self.edge_at(s))
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.pairs.get(&pair_key(u, v)).copied()
    }

    /// Edges incident to `v`, in insertion-dependent but deterministic order.
    pub fn incident_edges(&self, v: VertexId) -> Result<impl Iterator<Item = &Edge> + '_, GraphError> {
        let slot = self.slot_of(v)?;
        Ok(self.vertex_at(slot).incident_slots().map(|e| self.edge_at(e)))
    }

    /// Live vertices in storage order (deterministic for a given event log).
    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> + '_ {
        self.vertices.iter().flatten()
    }

    /// Live edges in storage order (deterministic for a given event log).
    pub fn edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().flatten()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges().map(|e| e.weight).sum()
    }

    pub(crate) fn slot_of(&self, v: VertexId) -> Result<usize, GraphError> {
        self.vertex_slot
            .get(&v)
            .copied()
            .ok_or(GraphError::UnknownId(ElementId::Vertex(v)))
    }

    pub(crate) fn live_slots(&self) -> &[usize] {
        &self.live
    }

    pub(crate) fn vertex_at(&self, slot: usize) -> &Vertex {
        self.vertices[slot].as_ref().expect("live vertex slot")
    }

    pub(crate) fn vertex_at_mut(&mut self, slot: usize) -> &mut Vertex {
        self.vertices[slot].as_mut().expect("live vertex slot")
    }

    pub(crate) fn edge_at(&self, slot: usize) -> &Edge {
        self.edges[slot].as_ref().expect("live edge slot")
    }

    pub(crate) fn edge_at_mut(&mut self, slot: usize) -> &mut Edge {
        self.edges[slot].as_mut().expect("live edge slot")
    }

    pub(crate) fn edges_mut(&mut self) -> impl Iterator<Item = &mut Edge> + '_ {
        self.edges.iter_mut().flatten()
    }

    #[cfg(test)]
    pub(crate) fn vertices_mut(&mut self) -> impl Iterator<Item = &mut Vertex> + '_ {
        self.vertices.iter_mut().flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(i: u64) -> VertexId {
        VertexId(i)
    }

    fn e(i: u64) -> EdgeId {
        EdgeId(i)
    }

    fn c(i: u64) -> ColorId {
        ColorId(i)
    }

    fn star(center: u64, leaves: &[u64]) -> DynamicGraph {
        let mut g = DynamicGraph::new();
        g.add_vertex(v(center)).unwrap();
        for (i, &leaf) in leaves.iter().enumerate() {
            g.add_vertex(v(leaf)).unwrap();
            g.add_edge(e(i as u64), v(center), v(leaf), 1.0).unwrap();
        }
        g
    }

    fn neighbourhood(g: &DynamicGraph, x: VertexId) -> Vec<(EdgeId, f64, Vec<f64>)> {
        g.incident_edges(x)
            .unwrap()
            .map(|edge| (edge.id(), edge.weight(), edge.pheromone_by_slot().to_vec()))
            .collect()
    }

    #[test]
    fn compaction_keeps_every_neighbourhood_intact() {
        let mut g = DynamicGraph::new();
        g.add_color(c(0)).unwrap();
        g.add_color(c(1)).unwrap();
        for i in 0..120 {
            g.add_vertex(v(i)).unwrap();
        }
        let mut next = 0;
        for i in 0..120u64 {
            for step in [1, 7, 30] {
                g.add_edge(e(next), v(i), v((i + step) % 120), 1.0 + next as f64).unwrap();
                g.deposit(e(next), c(next % 2), 0.5 * next as f64).unwrap();
                next += 1;
            }
        }
        let before_slots = g.edges.len();
        for k in (0..next).step_by(2) {
            let (a, b) = g.edge(e(k)).unwrap().endpoints();
            let others: Vec<VertexId> = (0..120).map(v).filter(|&x| x != a && x != b).collect();
            let expected: Vec<_> = others.iter().map(|&x| neighbourhood(&g, x)).collect();
            g.remove_edge(e(k)).unwrap();
            for (&x, want) in others.iter().zip(&expected) {
                assert_eq!(&neighbourhood(&g, x), want, "vertex {x} after removing edge {k}");
            }
        }
        assert!(g.edges.len() < before_slots, "storage was never compacted");
        for i in (0..120).step_by(3) {
            g.remove_vertex(v(i)).unwrap();
        }
        assert_eq!(g.vertex_count(), 80);
        assert!(g.vertices.len() < 120, "vertex storage was never compacted");
        assert_eq!(g.live_slots().len(), 80);
        for &slot in g.live_slots() {
            let id = g.vertex_at(slot).id();
            assert_eq!(g.slot_of(id).unwrap(), slot);
        }
        for edge in g.edges() {
            let (a, b) = edge.endpoints();
            assert_eq!([g.slot_of(a).unwrap(), g.slot_of(b).unwrap()], edge.slots);
            assert_eq!(g.edge(edge.id()).unwrap().id(), edge.id());
        }
    }

    #[test]
    fn add_vertex_to_empty_graph() {
        let mut g = DynamicGraph::new();
        g.apply(&GraphEvent::AddVertex(v(7))).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 0);
        let vertex = g.vertex(v(7)).unwrap();
        assert_eq!(vertex.degree(), 0);
        assert_eq!(vertex.color(), None);
        assert_eq!(vertex.streak(), 0);
    }

    #[test]
    fn remove_vertex_cascades_to_edges() {
        let mut g = star(0, &[1, 2, 3]);
        g.add_vertex(v(4)).unwrap();
        g.add_edge(e(10), v(1), v(4), 1.0).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (5, 4));
        g.apply(&GraphEvent::RemoveVertex(v(0))).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (4, 1));
        assert_eq!(g.vertex(v(1)).unwrap().degree(), 1);
        assert!(g.edge(e(0)).is_none());
    }

    #[test]
    fn remove_color_unassigns_and_wipes_pheromone() {
        let mut g = star(0, &[1, 2, 3, 4]);
        g.add_color(c(1)).unwrap();
        g.add_color(c(2)).unwrap();
        for i in 0..4 {
            g.deposit(e(i), c(1), 0.5).unwrap();
            g.deposit(e(i), c(2), 0.25).unwrap();
        }
        for vertex in g.vertices_mut().filter(|x| x.id != v(0)) {
            vertex.set_color(Some(c(1)));
        }
        g.remove_color(c(1)).unwrap();
        assert_eq!(g.colors(), &[c(2)]);
        assert!(g.vertices().all(|x| x.color().is_none() && x.streak() == 0));
        assert!(g.edges().all(|x| x.pheromone_by_slot() == [0.25]));
        assert!(matches!(g.pheromone(e(0), c(1)), Err(GraphError::UnknownId(_))));
    }

    #[test]
    fn new_edges_and_colors_start_at_zero_pheromone() {
        let mut g = star(0, &[1]);
        g.add_color(c(5)).unwrap();
        assert_eq!(g.pheromone(e(0), c(5)).unwrap(), 0.0);
        g.add_vertex(v(2)).unwrap();
        g.add_edge(e(1), v(1), v(2), 2.0).unwrap();
        assert_eq!(g.pheromone(e(1), c(5)).unwrap(), 0.0);
    }

    #[test]
    fn set_weight_replaces() {
        let mut g = star(0, &[1]);
        g.set_weight(e(0), 3.5).unwrap();
        g.set_weight(e(0), 0.5).unwrap();
        assert_eq!(g.edge(e(0)).unwrap().weight(), 0.5);
    }

    #[test]
    fn error_paths() {
        let mut g = star(0, &[1]);
        assert_eq!(g.add_vertex(v(0)), Err(GraphError::DuplicateId(ElementId::Vertex(v(0)))));
        assert_eq!(g.remove_vertex(v(9)), Err(GraphError::UnknownId(ElementId::Vertex(v(9)))));
        assert_eq!(g.add_edge(e(5), v(1), v(1), 1.0), Err(GraphError::SelfLoop(v(1))));
        assert_eq!(g.add_edge(e(5), v(0), v(9), 1.0), Err(GraphError::UnknownId(ElementId::Vertex(v(9)))));
        assert_eq!(g.add_edge(e(0), v(0), v(1), 1.0), Err(GraphError::DuplicateId(ElementId::Edge(e(0)))));
        // A second live edge between the same pair is rejected.
        assert_eq!(g.add_edge(e(5), v(1), v(0), 1.0), Err(GraphError::DuplicateId(ElementId::Edge(e(0)))));
        assert!(matches!(g.add_edge(e(5), v(0), v(1), -1.0), Err(GraphError::NegativeWeight(_))));
        assert!(matches!(g.set_weight(e(0), f64::NAN), Err(GraphError::NegativeWeight(_))));
        assert_eq!(g.set_weight(e(8), 1.0), Err(GraphError::UnknownId(ElementId::Edge(e(8)))));
        assert_eq!(g.remove_color(c(3)), Err(GraphError::UnknownId(ElementId::Color(c(3)))));
        g.add_color(c(3)).unwrap();
        assert_eq!(g.add_color(c(3)), Err(GraphError::DuplicateId(ElementId::Color(c(3)))));
    }

    #[test]
    fn removed_ids_are_not_reused() {
        let mut g = star(0, &[1]);
        g.remove_edge(e(0)).unwrap();
        assert_eq!(g.add_edge(e(0), v(0), v(1), 1.0), Err(GraphError::DuplicateId(ElementId::Edge(e(0)))));
        g.remove_vertex(v(1)).unwrap();
        assert_eq!(g.add_vertex(v(1)), Err(GraphError::DuplicateId(ElementId::Vertex(v(1)))));
        g.add_color(c(0)).unwrap();
        g.remove_color(c(0)).unwrap();
        assert_eq!(g.add_color(c(0)), Err(GraphError::DuplicateId(ElementId::Color(c(0)))));
    }

    #[test]
    fn incident_pheromone_sums() {
        let mut g = star(0, &[1, 2]);
        g.add_vertex(v(3)).unwrap();
        g.add_color(c(1)).unwrap();
        assert_eq!(g.incident_pheromone(v(0), c(1)).unwrap(), 0.0);
        g.deposit(e(0), c(1), 2.0).unwrap();
        g.deposit(e(1), c(1), 0.5).unwrap();
        assert_eq!(g.incident_pheromone(v(0), c(1)).unwrap(), 2.5);
        assert_eq!(g.incident_pheromone(v(3), c(1)).unwrap(), 0.0);
        assert!(g.incident_pheromone(v(9), c(1)).is_err());
        assert!(g.incident_pheromone(v(0), c(2)).is_err());
    }

    fn arb_event() -> impl Strategy<Value = GraphEvent> {
        let id = 0u64..8;
        prop_oneof![
            3 => id.clone().prop_map(|i| GraphEvent::AddVertex(VertexId(i))),
            1 => id.clone().prop_map(|i| GraphEvent::RemoveVertex(VertexId(i))),
            4 => (0u64..24, id.clone(), id.clone(), 0.0f64..3.0)
                .prop_map(|(e, u, v, w)| GraphEvent::AddEdge(EdgeId(e), VertexId(u), VertexId(v), w)),
            1 => (0u64..24).prop_map(|e| GraphEvent::RemoveEdge(EdgeId(e))),
            1 => (0u64..24, -1.0f64..3.0).prop_map(|(e, w)| GraphEvent::SetWeight(EdgeId(e), w)),
            1 => (0u64..4).prop_map(|i| GraphEvent::AddColor(ColorId(i))),
            1 => (0u64..4).prop_map(|i| GraphEvent::RemoveColor(ColorId(i))),
            1 => Just(GraphEvent::Tick),
        ]
    }

    fn apply_all(events: &[GraphEvent]) -> DynamicGraph {
        let mut g = DynamicGraph::new();
        for (i, event) in events.iter().enumerate() {
            if g.apply(event).is_ok() {
                if let GraphEvent::AddEdge(id, ..) = event {
                    let _ = g.deposit(*id, g.colors().first().copied().unwrap_or(ColorId(0)), i as f64 * 0.1);
                }
            }
        }
        g
    }

    fn snapshot(g: &DynamicGraph) -> Vec<String> {
        let mut lines: Vec<String> = g
            .vertices()
            .map(|x| format!("V {} {:?} {}", x.id(), x.color(), x.streak()))
            .chain(g.edges().map(|x| format!("E {} {:?} {} {:?}", x.id(), x.endpoints(), x.weight(), x.pheromone_by_slot())))
            .collect();
        lines.sort();
        lines
    }

    proptest! {
        #[test]
        fn incidence_is_symmetric_and_nonnegative(events in prop::collection::vec(arb_event(), 0..120)) {
            let g = apply_all(&events);
            let mut degree_sum = 0;
            for vertex in g.vertices() {
                degree_sum += vertex.degree();
                for edge in g.incident_edges(vertex.id()).unwrap() {
                    let (a, b) = edge.endpoints();
                    prop_assert!(a == vertex.id() || b == vertex.id());
                }
            }
            prop_assert_eq!(degree_sum, 2 * g.edge_count());
            prop_assert_eq!(g.edges().count(), g.edge_count());
            for edge in g.edges() {
                let (a, b) = edge.endpoints();
                prop_assert!(a != b);
                prop_assert!(g.contains_vertex(a) && g.contains_vertex(b));
                prop_assert!(edge.weight() >= 0.0);
                prop_assert_eq!(edge.pheromone_by_slot().len(), g.colors().len());
                prop_assert!(edge.pheromone_by_slot().iter().all(|&p| p >= 0.0));
                prop_assert!(g.incident_edges(a).unwrap().any(|x| x.id() == edge.id()));
                prop_assert!(g.incident_edges(b).unwrap().any(|x| x.id() == edge.id()));
            }
            for vertex in g.vertices() {
                if vertex.color().is_none() {
                    prop_assert_eq!(vertex.streak(), 0);
                }
            }
        }

        #[test]
        fn replay_is_deterministic(events in prop::collection::vec(arb_event(), 0..120)) {
            prop_assert_eq!(snapshot(&apply_all(&events)), snapshot(&apply_all(&events)));
        }
    }
}
