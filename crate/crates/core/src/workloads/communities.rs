use super::{bernoulli_indices, check_probability, check_weight, Label, Workload, WorkloadError};
use crate::colony::seeded_rng;
use crate::graph::{EdgeId, GraphEvent, VertexId};

/// Planted-partition graph: `k` communities of `n_per_community` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunitySpec {
    pub n_per_community: usize,
    pub k: usize,
    pub w_in: f64,
    pub w_out: f64,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl Default for CommunitySpec {
    fn default() -> Self {
        Self {
            n_per_community: 8,
            k: 2,
            w_in: 1.0,
            w_out: 0.1,
            p_in: 0.8,
            p_out: 0.05,
            seed: 0,
        }
    }
}

impl CommunitySpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        check_probability("p_in", self.p_in)?;
        check_probability("p_out", self.p_out)?;
        check_weight("w_in", self.w_in)?;
        check_weight("w_out", self.w_out)?;
        Ok(())
    }

    /// Vertex ids are `0..k*n`; community `c` owns `c*n..(c+1)*n`.
    pub fn vertex(&self, community: usize, index: usize) -> VertexId {
        VertexId((community * self.n_per_community + index) as u64)
    }
}

/// All vertices, then sampled intra- and inter-community edges, then one tick.
pub fn gen_communities(spec: &CommunitySpec) -> Result<Workload, WorkloadError> {
    spec.validate()?;
    let n = spec.n_per_community;
    let mut rng = seeded_rng(spec.seed);
    let mut workload = Workload::default();
    for c in 0..spec.k {
        for i in 0..n {
            let v = spec.vertex(c, i);
            workload.events.push(GraphEvent::AddVertex(v));
            workload.truth.insert(v, c as Label);
        }
    }
    let mut next_edge = 0u64;
    let mut edge = |events: &mut Vec<GraphEvent>, u: VertexId, v: VertexId, w: f64| {
        events.push(GraphEvent::AddEdge(EdgeId(next_edge), u, v, w));
        next_edge += 1;
    };
    for c in 0..spec.k {
        for a in 0..n {
            let mut hits = Vec::new();
            bernoulli_indices((n - a - 1) as u64, spec.p_in, &mut rng, |j| hits.push(j as usize));
            for j in hits {
                edge(&mut workload.events, spec.vertex(c, a), spec.vertex(c, a + 1 + j), spec.w_in);
            }
        }
    }
    for c1 in 0..spec.k {
        for c2 in c1 + 1..spec.k {
            for a in 0..n {
                let mut hits = Vec::new();
                bernoulli_indices(n as u64, spec.p_out, &mut rng, |j| hits.push(j as usize));
                for j in hits {
                    edge(&mut workload.events, spec.vertex(c1, a), spec.vertex(c2, j), spec.w_out);
                }
            }
        }
    }
    workload.events.push(GraphEvent::Tick);
    Ok(workload)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DynamicGraph;

    fn count(events: &[GraphEvent]) -> (usize, usize, usize) {
        let vertices = events.iter().filter(|e| matches!(e, GraphEvent::AddVertex(_))).count();
        let edges = events.iter().filter(|e| matches!(e, GraphEvent::AddEdge(..))).count();
        let ticks = events.iter().filter(|e| matches!(e, GraphEvent::Tick)).count();
        (vertices, edges, ticks)
    }

    #[test]
    fn two_disjoint_triangles() {
        let spec = CommunitySpec {
            n_per_community: 3,
            k: 2,
            p_in: 1.0,
            p_out: 0.0,
            ..CommunitySpec::default()
        };
        let w = gen_communities(&spec).unwrap();
        assert_eq!(count(&w.events), (6, 6, 1));
        assert_eq!(w.events.last(), Some(&GraphEvent::Tick));
        let g = DynamicGraph::replay(&w.events).unwrap();
        for e in g.edges() {
            let (u, v) = e.endpoints();
            assert_eq!(w.truth[&u], w.truth[&v]);
        }
        assert_eq!(w.truth.values().filter(|&&l| l == 1).count(), 3);
    }

    #[test]
    fn no_probability_no_edges() {
        let spec = CommunitySpec {
            p_in: 0.0,
            p_out: 0.0,
            ..CommunitySpec::default()
        };
        assert_eq!(count(&gen_communities(&spec).unwrap().events), (16, 0, 1));
    }

    #[test]
    fn single_community_has_constant_truth() {
        let spec = CommunitySpec {
            k: 1,
            n_per_community: 5,
            ..CommunitySpec::default()
        };
        let w = gen_communities(&spec).unwrap();
        assert!(w.truth.values().all(|&l| l == 0));
        assert_eq!(w.truth.len(), 5);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = CommunitySpec {
            n_per_community: 20,
            k: 3,
            seed: 9,
            ..CommunitySpec::default()
        };
        assert_eq!(gen_communities(&spec).unwrap(), gen_communities(&spec).unwrap());
        let other = CommunitySpec { seed: 10, ..spec.clone() };
        assert_ne!(gen_communities(&spec).unwrap().events, gen_communities(&other).unwrap().events);
    }

    #[test]
    fn rejects_bad_spec() {
        let spec = CommunitySpec {
            p_in: 1.5,
            ..CommunitySpec::default()
        };
        assert!(matches!(gen_communities(&spec), Err(WorkloadError::InvalidSpec(_))));
        let spec = CommunitySpec {
            w_out: -1.0,
            ..CommunitySpec::default()
        };
        assert!(gen_communities(&spec).is_err());
    }
}
