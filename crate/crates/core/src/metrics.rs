//! Objective measures: communication cut, load balance, stability, and the
//! weighted tradeoff between them. Also an exhaustive optimum for small graphs.

use thiserror::Error;

use crate::colony::ColorAssignment;
use crate::graph::{ColorId, DynamicGraph, VertexId};

/// Largest vertex count the exhaustive search accepts.
pub const BRUTE_FORCE_MAX_VERTICES: usize = 12;

pub const DEFAULT_LAMBDA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("exhaustive search limited to {BRUTE_FORCE_MAX_VERTICES} vertices, graph has {0}")]
    TooLarge(usize),
    #[error("at least one color is required")]
    NoColors,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub step: u64,
    pub cut_ratio: f64,
    pub balance: f64,
    pub stability: f64,
    pub score: f64,
}

impl MetricsRecord {
    pub fn compute(
        step: u64,
        graph: &DynamicGraph,
        assignment: &ColorAssignment,
        previous: &ColorAssignment,
        lambda: f64,
    ) -> Self {
        let cut_ratio = cut_ratio(graph, assignment);
        let balance = balance(assignment, graph.colors());
        Self {
            step,
            cut_ratio,
            balance,
            stability: stability(assignment, previous),
            score: score(cut_ratio, balance, lambda),
        }
    }
}

/// Fraction of total edge weight joining differently colored endpoints.
/// Unassigned endpoints count as different from everything.
pub fn cut_ratio(graph: &DynamicGraph, assignment: &ColorAssignment) -> f64 {
    // Dense lookup when ids are compact enough, binary search otherwise.
    let entries: Vec<_> = assignment.iter().collect();
    let top = entries.last().map_or(0, |e| e.vertex.0 as usize + 1);
    let dense: Option<Vec<Option<ColorId>>> = (top <= 4 * entries.len() + 1024).then(|| {
        let mut table = vec![None; top];
        for e in &entries {
            table[e.vertex.0 as usize] = e.color;
        }
        table
    });
    let color_of = |v: VertexId| match &dense {
        Some(table) => table.get(v.0 as usize).copied().flatten(),
        None => assignment.get(v).flatten(),
    };
    let mut total = 0.0;
    let mut cut = 0.0;
    for edge in graph.edges() {
        let (u, v) = edge.endpoints();
        total += edge.weight();
        let same = match (color_of(u), color_of(v)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        };
        if !same {
            cut += edge.weight();
        }
    }
    if total > 0.0 {
        cut / total
    } else {
        0.0
    }
}

/// Ideal per-color load over the heaviest color's load; 1 is perfect balance.
pub fn balance(assignment: &ColorAssignment, live_colors: &[ColorId]) -> f64 {
    if live_colors.is_empty() {
        return 0.0;
    }
    let mut counts = vec![0usize; live_colors.len()];
    for entry in assignment.iter() {
        if let Some(slot) = entry.color.and_then(|c| live_colors.iter().position(|&k| k == c)) {
            counts[slot] += 1;
        }
    }
    let assigned: usize = counts.iter().sum();
    let heaviest = counts.iter().copied().max().unwrap_or(0);
    if assigned == 0 {
        return 0.0;
    }
    (assigned as f64 / live_colors.len() as f64) / heaviest as f64
}

/// Fraction of vertices present in both assignments whose color is unchanged.
pub fn stability(current: &ColorAssignment, previous: &ColorAssignment) -> f64 {
    let mut common = 0usize;
    let mut same = 0usize;
    let mut before = previous.iter().peekable();
    for entry in current.iter() {
        while before.next_if(|b| b.vertex < entry.vertex).is_some() {}
        if let Some(b) = before.next_if(|b| b.vertex == entry.vertex) {
            common += 1;
            if b.color == entry.color {
                same += 1;
            }
        }
    }
    if common == 0 {
        1.0
    } else {
        same as f64 / common as f64
    }
}

/// Weighted tradeoff between low cut and good balance. Higher is better.
pub fn score(cut_ratio: f64, balance: f64, lambda: f64) -> f64 {
    lambda * (1.0 - cut_ratio) + (1.0 - lambda) * balance
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub score: f64,
    pub cut_ratio: f64,
    pub balance: f64,
    /// Colors are `ColorId(0)..ColorId(k)`.
    pub assignment: ColorAssignment,
}

/// Enumerates every assignment of `k` colors to the vertices and returns the
/// best score with the lexicographically smallest witness (vertices by id).
pub fn brute_force_optimum(graph: &DynamicGraph, k: usize, lambda: f64) -> Result<Optimum, MetricsError> {
    if k == 0 {
        return Err(MetricsError::NoColors);
    }
    let n = graph.vertex_count();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(MetricsError::TooLarge(n));
    }
    let mut ids: Vec<VertexId> = graph.vertices().map(|v| v.id()).collect();
    ids.sort_unstable();
    let index_of = |v: VertexId| ids.binary_search(&v).expect("endpoint is live");
    let edges: Vec<(usize, usize, f64)> = graph
        .edges()
        .map(|e| {
            let (u, v) = e.endpoints();
            (index_of(u), index_of(v), e.weight())
        })
        .collect();
    let total: f64 = edges.iter().map(|e| e.2).sum();

    let mut digits = vec![0usize; n];
    let mut counts = vec![0usize; k];
    let mut best: Option<(f64, f64, f64, Vec<usize>)> = None;
    loop {
        let mut cut = 0.0;
        for &(u, v, w) in &edges {
            if digits[u] != digits[v] {
                cut += w;
            }
        }
        let cut = if total > 0.0 { cut / total } else { 0.0 };
        counts.iter_mut().for_each(|c| *c = 0);
        for &d in &digits {
            counts[d] += 1;
        }
        let heaviest = counts.iter().copied().max().unwrap_or(0);
        let bal = if n == 0 { 0.0 } else { (n as f64 / k as f64) / heaviest as f64 };
        let s = score(cut, bal, lambda);
        if best.as_ref().is_none_or(|b| s > b.0) {
            best = Some((s, cut, bal, digits.clone()));
        }
        // Odometer increment, last vertex least significant.
        let mut i = n;
        loop {
            if i == 0 {
                let (score, cut_ratio, balance, digits) = best.expect("at least one assignment");
                return Ok(Optimum {
                    score,
                    cut_ratio,
                    balance,
                    assignment: ColorAssignment::from_colors(
                        ids.iter().zip(digits).map(|(&v, d)| (v, Some(ColorId(d as u64)))),
                    ),
                });
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < k {
                break;
            }
            digits[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeId;
    use proptest::prelude::*;

    fn two_triangles_with_bridge() -> DynamicGraph {
        let mut g = DynamicGraph::new();
        for i in 0..6 {
            g.add_vertex(VertexId(i)).unwrap();
        }
        let pairs = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)];
        for (i, &(u, v)) in pairs.iter().enumerate() {
            g.add_edge(EdgeId(i as u64), VertexId(u), VertexId(v), 1.0).unwrap();
        }
        g
    }

    fn assign(colors: &[Option<u64>]) -> ColorAssignment {
        ColorAssignment::from_colors(
            colors
                .iter()
                .enumerate()
                .map(|(i, c)| (VertexId(i as u64), c.map(ColorId))),
        )
    }

    #[test]
    fn cut_ratio_examples() {
        let g = two_triangles_with_bridge();
        let split = assign(&[Some(0), Some(0), Some(0), Some(1), Some(1), Some(1)]);
        assert!((cut_ratio(&g, &split) - 1.0 / 7.0).abs() < 1e-15);
        let mono = assign(&[Some(4); 6]);
        assert_eq!(cut_ratio(&g, &mono), 0.0);

        let mut edge = DynamicGraph::new();
        edge.add_vertex(VertexId(0)).unwrap();
        edge.add_vertex(VertexId(1)).unwrap();
        edge.add_edge(EdgeId(0), VertexId(0), VertexId(1), 2.0).unwrap();
        assert_eq!(cut_ratio(&edge, &assign(&[Some(0), Some(1)])), 1.0);
        // Unassigned never matches, not even another unassigned vertex.
        assert_eq!(cut_ratio(&edge, &assign(&[None, None])), 1.0);
        assert_eq!(cut_ratio(&DynamicGraph::new(), &assign(&[])), 0.0);
    }

    #[test]
    fn balance_examples() {
        let colors = [ColorId(0), ColorId(1)];
        let even = assign(&[Some(0), Some(0), Some(0), Some(0), Some(0), Some(1), Some(1), Some(1), Some(1), Some(1)]);
        assert_eq!(balance(&even, &colors), 1.0);
        let skewed = assign(&[Some(0), Some(0), Some(0), Some(0), Some(0), Some(0), Some(0), Some(0), Some(1), Some(1)]);
        assert_eq!(balance(&skewed, &colors), 0.625);
        let three = [ColorId(0), ColorId(1), ColorId(2)];
        assert!((balance(&assign(&[Some(0); 6]), &three) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(balance(&assign(&[None, None]), &colors), 0.0);
        // Unassigned vertices do not count towards the load.
        assert_eq!(balance(&assign(&[Some(0), Some(1), None]), &colors), 1.0);
    }

    #[test]
    fn stability_examples() {
        let before = assign(&[Some(0); 10]);
        let mut after: Vec<Option<u64>> = vec![Some(0); 10];
        after[3] = Some(1);
        assert!((stability(&assign(&after), &before) - 0.9).abs() < 1e-15);
        assert_eq!(stability(&before, &before), 1.0);
        let disjoint = ColorAssignment::from_colors([(VertexId(100), Some(ColorId(0)))]);
        assert_eq!(stability(&disjoint, &before), 1.0);
    }

    #[test]
    fn score_examples() {
        assert_eq!(score(0.0, 1.0, 0.5), 1.0);
        assert_eq!(score(1.0, 0.0, 0.5), 0.0);
        assert!((score(1.0 / 7.0, 1.0, 0.5) - 0.928_571_428_571).abs() < 1e-9);
    }

    #[test]
    fn brute_force_single_edge() {
        let mut g = DynamicGraph::new();
        g.add_vertex(VertexId(0)).unwrap();
        g.add_vertex(VertexId(1)).unwrap();
        g.add_edge(EdgeId(0), VertexId(0), VertexId(1), 1.0).unwrap();

        let best = brute_force_optimum(&g, 2, 1.0).unwrap();
        assert_eq!(best.score, 1.0);
        assert_eq!(best.assignment, assign(&[Some(0), Some(0)]));

        let best = brute_force_optimum(&g, 2, 0.0).unwrap();
        assert_eq!(best.score, 1.0);
        assert_eq!(best.assignment, assign(&[Some(0), Some(1)]));
    }

    /// Independent enumeration: every subset mask for two colors, scored
    /// from scratch without the odometer.
    fn two_color_oracle(g: &DynamicGraph, lambda: f64) -> f64 {
        let n = g.vertex_count();
        let mut ids: Vec<VertexId> = g.vertices().map(|v| v.id()).collect();
        ids.sort();
        (0u32..(1 << n))
            .map(|mask| {
                let a = ColorAssignment::from_colors(
                    ids.iter()
                        .enumerate()
                        .map(|(i, &v)| (v, Some(ColorId(((mask >> i) & 1) as u64)))),
                );
                score(cut_ratio(g, &a), balance(&a, &[ColorId(0), ColorId(1)]), lambda)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn brute_force_two_triangles() {
        let g = two_triangles_with_bridge();
        let best = brute_force_optimum(&g, 2, 0.5).unwrap();
        let expected = 0.5 * (6.0 / 7.0) + 0.5;
        assert!((best.score - expected).abs() < 1e-12);
        assert!((two_color_oracle(&g, 0.5) - expected).abs() < 1e-12);
        assert_eq!(best.assignment, assign(&[Some(0), Some(0), Some(0), Some(1), Some(1), Some(1)]));
    }

    #[test]
    fn brute_force_guards() {
        let mut g = DynamicGraph::new();
        for i in 0..13 {
            g.add_vertex(VertexId(i)).unwrap();
        }
        assert_eq!(brute_force_optimum(&g, 2, 0.5), Err(MetricsError::TooLarge(13)));
        assert_eq!(brute_force_optimum(&DynamicGraph::new(), 0, 0.5), Err(MetricsError::NoColors));
    }

    fn arb_graph() -> impl Strategy<Value = (DynamicGraph, Vec<u64>)> {
        (2usize..8)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    prop::collection::vec((0..n as u64, 0..n as u64, 0.1f64..3.0), 0..20),
                    prop::collection::vec(0u64..3, n),
                )
            })
            .prop_map(|(n, edges, colors)| {
                let mut g = DynamicGraph::new();
                for i in 0..n as u64 {
                    g.add_vertex(VertexId(i)).unwrap();
                }
                for (i, (u, v, w)) in edges.into_iter().enumerate() {
                    let _ = g.add_edge(EdgeId(i as u64), VertexId(u), VertexId(v), w);
                }
                (g, colors)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn metrics_ignore_color_labels((g, colors) in arb_graph(), lambda in 0.0f64..=1.0) {
            let live = [ColorId(0), ColorId(1), ColorId(2)];
            let a = ColorAssignment::from_colors(colors.iter().enumerate().map(|(i, &c)| (VertexId(i as u64), Some(ColorId(c)))));
            let perm = |c: ColorId| ColorId([2, 0, 1][c.0 as usize]);
            let b = a.map_colors(perm);
            prop_assert_eq!(cut_ratio(&g, &a), cut_ratio(&g, &b));
            prop_assert_eq!(balance(&a, &live), balance(&b, &live));
            let c1 = cut_ratio(&g, &a);
            prop_assert_eq!(score(c1, balance(&a, &live), lambda), score(c1, balance(&b, &live), lambda));
            prop_assert!((0.0..=1.0).contains(&c1));
        }

        #[test]
        fn merging_colors_never_increases_cut((g, colors) in arb_graph()) {
            let a = ColorAssignment::from_colors(colors.iter().enumerate().map(|(i, &c)| (VertexId(i as u64), Some(ColorId(c)))));
            let merged = a.map_colors(|c| if c == ColorId(1) { ColorId(0) } else { c });
            prop_assert!(cut_ratio(&g, &merged) <= cut_ratio(&g, &a));
        }

        #[test]
        fn brute_force_dominates_any_assignment((g, colors) in arb_graph()) {
            let live = [ColorId(0), ColorId(1), ColorId(2)];
            let a = ColorAssignment::from_colors(colors.iter().enumerate().map(|(i, &c)| (VertexId(i as u64), Some(ColorId(c)))));
            let best = brute_force_optimum(&g, 3, 0.5).unwrap();
            prop_assert!(best.score >= score(cut_ratio(&g, &a), balance(&a, &live), 0.5));
        }
    }
}
