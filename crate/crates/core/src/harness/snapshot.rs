//! Plain-text colored graph snapshots.
//!
//! ```text
//! # step <n>
//! V <id> <color|UNASSIGNED>
//! E <id> <u> <v> <weight> <color|UNASSIGNED>
//! ```
//!
//! Vertices then edges, each sorted by id. The edge color is the one with the
//! most pheromone on it.

use std::fmt::Write as _;

use super::{field, syntax, tokens, HarnessError};
use crate::colony::ColorAssignment;
use crate::graph::{ColorId, DynamicGraph, EdgeId, VertexId};

const UNASSIGNED: &str = "UNASSIGNED";

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotEdge {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub weight: f64,
    pub dominant: Option<ColorId>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Snapshot {
    pub step: u64,
    pub vertices: Vec<(VertexId, Option<ColorId>)>,
    pub edges: Vec<SnapshotEdge>,
}

/// Color with the most pheromone on the edge; earliest registered on ties,
/// `None` when the edge carries none.
fn dominant_pheromone(graph: &DynamicGraph, pheromone: &[f64]) -> Option<ColorId> {
    let mut best: Option<(usize, f64)> = None;
    for (slot, &p) in pheromone.iter().enumerate() {
        if p > 0.0 && best.is_none_or(|(_, b)| p > b) {
            best = Some((slot, p));
        }
    }
    best.map(|(slot, _)| graph.colors()[slot])
}

impl Snapshot {
    pub fn capture(step: u64, graph: &DynamicGraph) -> Self {
        let mut vertices: Vec<_> = graph.vertices().map(|v| (v.id(), v.color())).collect();
        vertices.sort_unstable_by_key(|&(id, _)| id);
        let mut edges: Vec<_> = graph
            .edges()
            .map(|e| {
                let (u, v) = e.endpoints();
                SnapshotEdge {
                    id: e.id(),
                    u,
                    v,
                    weight: e.weight(),
                    dominant: dominant_pheromone(graph, e.pheromone_by_slot()),
                }
            })
            .collect();
        edges.sort_unstable_by_key(|e| e.id);
        Self { step, vertices, edges }
    }

    pub fn assignment(&self) -> ColorAssignment {
        ColorAssignment::from_colors(self.vertices.iter().copied())
    }

    pub fn render(&self) -> String {
        let color = |c: Option<ColorId>| c.map_or(UNASSIGNED.to_string(), |c| c.to_string());
        let mut out = format!("# step {}\n", self.step);
        for &(v, c) in &self.vertices {
            let _ = writeln!(out, "V {v} {}", color(c));
        }
        for e in &self.edges {
            let _ = writeln!(out, "E {} {} {} {} {}", e.id, e.u, e.v, e.weight, color(e.dominant));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut lines = text.lines().enumerate();
        let step = match lines.next() {
            Some((_, header)) => match header.strip_prefix("# step ") {
                Some(n) => field(1, "step", n.trim())?,
                None => return Err(syntax(1, "expected `# step <n>` header")),
            },
            None => return Err(syntax(1, "empty snapshot")),
        };
        let mut snapshot = Snapshot {
            step,
            ..Snapshot::default()
        };
        let color = |line: usize, text: &str| -> Result<Option<ColorId>, HarnessError> {
            if text == UNASSIGNED {
                Ok(None)
            } else {
                field(line, "color id", text).map(|c| Some(ColorId(c)))
            }
        };
        for (i, raw) in lines {
            let line = i + 1;
            let Some(t) = tokens(raw) else { continue };
            match (t[0], t.len()) {
                ("V", 3) => {
                    if !snapshot.edges.is_empty() {
                        return Err(syntax(line, "vertex after edges"));
                    }
                    snapshot
                        .vertices
                        .push((VertexId(field(line, "vertex id", t[1])?), color(line, t[2])?));
                }
                ("E", 6) => snapshot.edges.push(SnapshotEdge {
                    id: EdgeId(field(line, "edge id", t[1])?),
                    u: VertexId(field(line, "vertex id", t[2])?),
                    v: VertexId(field(line, "vertex id", t[3])?),
                    weight: field(line, "weight", t[4])?,
                    dominant: color(line, t[5])?,
                }),
                _ => return Err(syntax(line, format!("unrecognized snapshot line `{}`", raw.trim()))),
            }
        }
        let sorted_v = snapshot.vertices.windows(2).all(|w| w[0].0 < w[1].0);
        let sorted_e = snapshot.edges.windows(2).all(|w| w[0].id < w[1].id);
        if !(sorted_v && sorted_e) {
            return Err(HarnessError::Mismatch("snapshot ids must be strictly increasing".into()));
        }
        Ok(snapshot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colony::{ColonyEngine, ColonyParams};
    use crate::graph::GraphEvent;

    #[test]
    fn empty_graph() {
        let s = Snapshot::capture(3, &DynamicGraph::new());
        assert_eq!(s.render(), "# step 3\n");
        assert_eq!(Snapshot::parse("# step 3\n").unwrap(), s);
    }

    #[test]
    fn colored_vertex_line() {
        let mut g = DynamicGraph::new();
        g.add_vertex(VertexId(2)).unwrap();
        g.add_vertex(VertexId(1)).unwrap();
        g.add_color(ColorId(7)).unwrap();
        g.add_edge(EdgeId(0), VertexId(1), VertexId(2), 0.5).unwrap();
        g.deposit(EdgeId(0), ColorId(7), 1.0).unwrap();
        let mut engine = ColonyEngine::new(ColonyParams { eta: 1e-9, ..ColonyParams::default() }, 0).unwrap();
        engine.step(&mut g).unwrap();
        let text = Snapshot::capture(1, &g).render();
        assert_eq!(text, "# step 1\nV 1 7\nV 2 7\nE 0 1 2 0.5 7\n");
    }

    #[test]
    fn unassigned_and_ties() {
        let mut g = DynamicGraph::new();
        for i in 0..3 {
            g.add_vertex(VertexId(i)).unwrap();
        }
        g.add_color(ColorId(5)).unwrap();
        g.add_color(ColorId(1)).unwrap();
        g.add_edge(EdgeId(4), VertexId(0), VertexId(1), 1.0).unwrap();
        g.add_edge(EdgeId(3), VertexId(1), VertexId(2), 2.0).unwrap();
        g.deposit(EdgeId(4), ColorId(5), 0.3).unwrap();
        g.deposit(EdgeId(4), ColorId(1), 0.3).unwrap();
        let s = Snapshot::capture(0, &g);
        assert_eq!(
            s.render(),
            "# step 0\nV 0 UNASSIGNED\nV 1 UNASSIGNED\nV 2 UNASSIGNED\nE 3 1 2 2 UNASSIGNED\nE 4 0 1 1 5\n"
        );
        assert_eq!(Snapshot::parse(&s.render()).unwrap(), s);
    }

    #[test]
    fn stable_bytes_and_round_trip() {
        let events = [
            GraphEvent::AddColor(ColorId(0)),
            GraphEvent::AddColor(ColorId(1)),
            GraphEvent::AddVertex(VertexId(10)),
            GraphEvent::AddVertex(VertexId(11)),
            GraphEvent::AddVertex(VertexId(12)),
            GraphEvent::AddEdge(EdgeId(1), VertexId(10), VertexId(11), 0.1),
            GraphEvent::AddEdge(EdgeId(0), VertexId(11), VertexId(12), 1.0 / 3.0),
        ];
        let mut g = DynamicGraph::replay(&events).unwrap();
        let mut engine = ColonyEngine::new(ColonyParams::default(), 4).unwrap();
        for _ in 0..5 {
            engine.step(&mut g).unwrap();
        }
        let s = Snapshot::capture(5, &g);
        assert_eq!(s.render(), Snapshot::capture(5, &g).render());
        let back = Snapshot::parse(&s.render()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.edges[0].weight, 1.0 / 3.0);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Snapshot::parse("").is_err());
        assert!(Snapshot::parse("V 1 0").is_err());
        assert!(Snapshot::parse("# step 1\nV 1").is_err());
        assert!(Snapshot::parse("# step 1\nV 1 red").is_err());
        assert!(Snapshot::parse("# step 1\nV 2 0\nV 1 0").is_err());
        assert!(Snapshot::parse("# step 1\nE 0 1 2 1 0\nV 1 0").is_err());
    }
}
