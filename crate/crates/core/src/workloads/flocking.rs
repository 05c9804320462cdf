//! Boids in a toroidal square, observed as a proximity graph.

use std::collections::BTreeMap;

use rand::Rng;

use super::{Label, Workload, WorkloadError};
use crate::colony::{seeded_rng, SimRng};
use crate::graph::{EdgeId, GraphEvent, VertexId};

#[derive(Debug, Clone, PartialEq)]
pub struct FlockSpec {
    pub n_agents: usize,
    /// Side of the square world.
    pub world: f64,
    /// Agents closer than this communicate.
    pub comm_radius: f64,
    /// Agents closer than this influence each other's steering.
    pub perception: f64,
    /// Agents start uniformly in a centered square of side `spread * world`.
    pub spread: f64,
    pub min_speed: f64,
    pub max_speed: f64,
    pub cohesion: f64,
    pub alignment: f64,
    pub separation: f64,
    pub separation_radius: f64,
    /// Random steering added each tick, per component.
    pub noise: f64,
    pub predator_count: usize,
    pub predator_speed: f64,
    pub flee_radius: f64,
    pub flee: f64,
    /// Number of ticks emitted.
    pub duration: usize,
    pub seed: u64,
}

impl Default for FlockSpec {
    fn default() -> Self {
        Self {
            n_agents: 200,
            world: 100.0,
            comm_radius: 5.0,
            perception: 10.0,
            spread: 1.0,
            min_speed: 0.2,
            max_speed: 1.0,
            cohesion: 0.01,
            alignment: 0.05,
            separation: 0.05,
            separation_radius: 1.5,
            noise: 0.05,
            predator_count: 1,
            predator_speed: 1.5,
            flee_radius: 8.0,
            flee: 0.5,
            duration: 500,
            seed: 0,
        }
    }
}

impl FlockSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let bad = |m: &str| Err(WorkloadError::InvalidSpec(m.to_string()));
        if self.n_agents == 0 {
            return bad("n_agents must be >= 1");
        }
        if !(self.world.is_finite() && self.world > 0.0) {
            return bad("world size must be positive");
        }
        if !(self.comm_radius > 0.0 && self.comm_radius < self.world) {
            return bad("comm_radius must be in (0, world)");
        }
        if !(self.min_speed >= 0.0 && self.max_speed >= self.min_speed) {
            return bad("speeds must satisfy 0 <= min_speed <= max_speed");
        }
        if !(0.0..=1.0).contains(&self.spread) {
            return bad("spread must be in [0, 1]");
        }
        Ok(())
    }
}

type Vec2 = [f64; 2];

fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

fn scale(a: Vec2, k: f64) -> Vec2 {
    [a[0] * k, a[1] * k]
}

fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

/// Live boids state.
#[derive(Debug, Clone)]
pub struct Flock {
    spec: FlockSpec,
    rng: SimRng,
    position: Vec<Vec2>,
    velocity: Vec<Vec2>,
    predator_position: Vec<Vec2>,
    predator_velocity: Vec<Vec2>,
}

impl Flock {
    pub fn new(spec: FlockSpec) -> Result<Self, WorkloadError> {
        spec.validate()?;
        let mut rng = seeded_rng(spec.seed);
        let side = spec.spread * spec.world;
        let offset = (spec.world - side) / 2.0;
        let mut position = Vec::with_capacity(spec.n_agents);
        let mut velocity = Vec::with_capacity(spec.n_agents);
        for _ in 0..spec.n_agents {
            position.push([offset + rng.random::<f64>() * side, offset + rng.random::<f64>() * side]);
            let heading = rng.random::<f64>() * std::f64::consts::TAU;
            let speed = spec.min_speed + rng.random::<f64>() * (spec.max_speed - spec.min_speed);
            velocity.push([heading.cos() * speed, heading.sin() * speed]);
        }
        let mut predator_position = Vec::new();
        let mut predator_velocity = Vec::new();
        for _ in 0..spec.predator_count {
            predator_position.push([rng.random::<f64>() * spec.world, rng.random::<f64>() * spec.world]);
            let heading = rng.random::<f64>() * std::f64::consts::TAU;
            predator_velocity.push([heading.cos() * spec.predator_speed, heading.sin() * spec.predator_speed]);
        }
        Ok(Self {
            spec,
            rng,
            position,
            velocity,
            predator_position,
            predator_velocity,
        })
    }

    pub fn spec(&self) -> &FlockSpec {
        &self.spec
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.position
    }

    pub fn predators(&self) -> &[Vec2] {
        &self.predator_position
    }

    /// Overrides the initial predator state.
    pub fn set_predator(&mut self, index: usize, position: Vec2, velocity: Vec2) {
        self.predator_position[index] = position;
        self.predator_velocity[index] = velocity;
    }

    /// Shortest displacement from `a` to `b` on the torus.
    pub fn displacement(&self, a: Vec2, b: Vec2) -> Vec2 {
        let w = self.spec.world;
        let wrap = |d: f64| d - w * (d / w).round();
        [wrap(b[0] - a[0]), wrap(b[1] - a[1])]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        norm(self.displacement(self.position[i], self.position[j]))
    }

    /// Communication weight between agents `i` and `j`, if in range.
    pub fn link(&self, i: usize, j: usize) -> Option<f64> {
        let d = self.distance(i, j);
        (d < self.spec.comm_radius).then(|| 1.0 - d / self.spec.comm_radius)
    }

    /// Advances every agent and predator by one tick.
    pub fn advance(&mut self) {
        let s = &self.spec;
        let n = self.position.len();
        let mut steer = vec![[0.0, 0.0]; n];
        for (i, steer_i) in steer.iter_mut().enumerate() {
            let mut center = [0.0, 0.0];
            let mut heading = [0.0, 0.0];
            let mut push = [0.0, 0.0];
            let mut seen = 0usize;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = self.displacement(self.position[i], self.position[j]);
                let dist = norm(d);
                if dist < s.perception {
                    center = add(center, d);
                    heading = add(heading, self.velocity[j]);
                    seen += 1;
                }
                if dist < s.separation_radius && dist > 0.0 {
                    push = add(push, scale(d, -1.0 / (dist * dist)));
                }
            }
            let mut force = scale(push, s.separation);
            if seen > 0 {
                let k = 1.0 / seen as f64;
                force = add(force, scale(center, s.cohesion * k));
                let align = add(scale(heading, k), scale(self.velocity[i], -1.0));
                force = add(force, scale(align, s.alignment));
            }
            for &p in &self.predator_position {
                let d = self.displacement(self.position[i], p);
                let dist = norm(d);
                if dist < s.flee_radius && dist > 0.0 {
                    force = add(force, scale(d, -s.flee / dist));
                }
            }
            *steer_i = force;
        }
        let w = s.world;
        for i in 0..n {
            let jitter = [
                (self.rng.random::<f64>() - 0.5) * 2.0 * s.noise,
                (self.rng.random::<f64>() - 0.5) * 2.0 * s.noise,
            ];
            let mut v = add(add(self.velocity[i], steer[i]), jitter);
            let speed = norm(v);
            if speed > s.max_speed {
                v = scale(v, s.max_speed / speed);
            } else if speed < s.min_speed && speed > 0.0 {
                v = scale(v, s.min_speed / speed);
            }
            self.velocity[i] = v;
            let p = add(self.position[i], v);
            self.position[i] = [p[0].rem_euclid(w), p[1].rem_euclid(w)];
        }
        for (p, v) in self.predator_position.iter_mut().zip(&self.predator_velocity) {
            let next = add(*p, *v);
            *p = [next[0].rem_euclid(w), next[1].rem_euclid(w)];
        }
    }

    /// Brute-force proximity graph: (i, j) with i < j mapped to weight.
    pub fn proximity(&self) -> BTreeMap<(usize, usize), f64> {
        let n = self.position.len();
        let mut out = BTreeMap::new();
        for i in 0..n {
            for j in i + 1..n {
                if let Some(w) = self.link(i, j) {
                    out.insert((i, j), w);
                }
            }
        }
        out
    }
}

/// Emits the proximity graph of a running flock as per-tick deltas.
///
/// Agent `i` is vertex `i`. Ground truth is the connected component of each
/// agent in the final proximity graph.
pub fn gen_flocking(spec: &FlockSpec) -> Result<Workload, WorkloadError> {
    let mut flock = Flock::new(spec.clone())?;
    Ok(emit_flock(&mut flock, spec.duration))
}

pub(crate) fn emit_flock(flock: &mut Flock, duration: usize) -> Workload {
    let n = flock.positions().len();
    let mut events: Vec<GraphEvent> = (0..n as u64).map(|i| GraphEvent::AddVertex(VertexId(i))).collect();
    let mut live: BTreeMap<(usize, usize), (EdgeId, f64)> = BTreeMap::new();
    let mut next_edge = 0u64;
    for tick in 0..duration {
        if tick > 0 {
            flock.advance();
        }
        let now = flock.proximity();
        let gone: Vec<(usize, usize)> = live.keys().filter(|k| !now.contains_key(k)).copied().collect();
        for key in gone {
            let (e, _) = live.remove(&key).expect("live edge");
            events.push(GraphEvent::RemoveEdge(e));
        }
        for (&(i, j), &w) in &now {
            match live.get_mut(&(i, j)) {
                Some((e, old)) => {
                    if *old != w {
                        *old = w;
                        events.push(GraphEvent::SetWeight(*e, w));
                    }
                }
                None => {
                    let e = EdgeId(next_edge);
                    next_edge += 1;
                    live.insert((i, j), (e, w));
                    events.push(GraphEvent::AddEdge(e, VertexId(i as u64), VertexId(j as u64), w));
                }
            }
        }
        events.push(GraphEvent::Tick);
    }
    Workload {
        events,
        truth: components(n, live.keys().copied()),
    }
}

fn components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> BTreeMap<VertexId, Label> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut labels: BTreeMap<usize, Label> = BTreeMap::new();
    (0..n)
        .map(|i| {
            let root = find(&mut parent, i);
            let next = labels.len() as Label;
            (VertexId(i as u64), *labels.entry(root).or_insert(next))
        })
        .collect()
}
