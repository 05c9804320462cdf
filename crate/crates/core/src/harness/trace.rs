//! Line-oriented event traces and the ground-truth sidecar.
//!
//! ```text
//! AV v | RV v | AE e u v w | RE e | CE e w | AC c | RC c | ST
//! ```
//!
//! One directive per line, whitespace separated, `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{field, syntax, tokens, HarnessError};
use crate::graph::{ColorId, EdgeId, GraphEvent, VertexId};
use crate::workloads::Label;

/// An event with the 1-based line it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLine {
    pub line: usize,
    pub event: GraphEvent,
}

pub fn parse_trace(text: &str) -> Result<Vec<GraphEvent>, HarnessError> {
    Ok(parse_trace_lines(text)?.into_iter().map(|l| l.event).collect())
}

pub fn parse_trace_lines(text: &str) -> Result<Vec<TraceLine>, HarnessError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(t) = tokens(raw) else { continue };
        let arity = |n: usize| {
            if t.len() == n + 1 {
                Ok(())
            } else {
                Err(syntax(line, format!("`{}` takes {n} argument(s), got {}", t[0], t.len() - 1)))
            }
        };
        let v = |k: usize| field(line, "vertex id", t[k]).map(VertexId);
        let e = |k: usize| field(line, "edge id", t[k]).map(EdgeId);
        let c = |k: usize| field(line, "color id", t[k]).map(ColorId);
        let w = |k: usize| field::<f64>(line, "weight", t[k]);
        let event = match t[0] {
            "AV" => arity(1).and_then(|_| Ok(GraphEvent::AddVertex(v(1)?)))?,
            "RV" => arity(1).and_then(|_| Ok(GraphEvent::RemoveVertex(v(1)?)))?,
            "AE" => arity(4).and_then(|_| Ok(GraphEvent::AddEdge(e(1)?, v(2)?, v(3)?, w(4)?)))?,
            "RE" => arity(1).and_then(|_| Ok(GraphEvent::RemoveEdge(e(1)?)))?,
            "CE" => arity(2).and_then(|_| Ok(GraphEvent::SetWeight(e(1)?, w(2)?)))?,
            "AC" => arity(1).and_then(|_| Ok(GraphEvent::AddColor(c(1)?)))?,
            "RC" => arity(1).and_then(|_| Ok(GraphEvent::RemoveColor(c(1)?)))?,
            "ST" => arity(0).map(|_| GraphEvent::Tick)?,
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        };
        out.push(TraceLine { line, event });
    }
    Ok(out)
}

pub fn format_event(event: &GraphEvent) -> String {
    match *event {
        GraphEvent::AddVertex(v) => format!("AV {v}"),
        GraphEvent::RemoveVertex(v) => format!("RV {v}"),
        GraphEvent::AddEdge(e, u, v, w) => format!("AE {e} {u} {v} {w}"),
        GraphEvent::RemoveEdge(e) => format!("RE {e}"),
        GraphEvent::SetWeight(e, w) => format!("CE {e} {w}"),
        GraphEvent::AddColor(c) => format!("AC {c}"),
        GraphEvent::RemoveColor(c) => format!("RC {c}"),
        GraphEvent::Tick => "ST".to_string(),
    }
}

/// One directive per line. Weights print in shortest round-trip form.
pub fn write_trace(events: &[GraphEvent]) -> String {
    let mut out = String::new();
    for event in events {
        out.push_str(&format_event(event));
        out.push('\n');
    }
    out
}

pub fn write_truth(truth: &BTreeMap<VertexId, Label>) -> String {
    let mut out = String::new();
    for (v, label) in truth {
        let _ = writeln!(out, "{v} {label}");
    }
    out
}

pub fn parse_truth(text: &str) -> Result<BTreeMap<VertexId, Label>, HarnessError> {
    let mut truth = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(t) = tokens(raw) else { continue };
        if t.len() != 2 {
            return Err(syntax(line, "expected `<vertex-id> <label>`"));
        }
        let v = VertexId(field(line, "vertex id", t[0])?);
        if truth.insert(v, field(line, "label", t[1])?).is_some() {
            return Err(syntax(line, format!("vertex {v} listed twice")));
        }
    }
    Ok(truth)
}
