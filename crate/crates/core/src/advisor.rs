//! Turns the evolving coloring into migration advice.
//!
//! Every live color is bound to one computing resource. A vertex is advised
//! to migrate once it has held a new color for at least `h` consecutive
//! steps. Advice is assumed to be followed: the placement is updated as soon
//! as a move is emitted.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::colony::ColorAssignment;
use crate::graph::{ColorId, VertexId};

pub const DEFAULT_HYSTERESIS: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResourceId(pub u64);

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}

impl std::str::FromStr for ResourceId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('R')
            .and_then(|n| n.parse().ok())
            .map(ResourceId)
            .ok_or_else(|| format!("invalid resource id `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdvisorError {
    #[error("advice requested while no color is live")]
    NoLiveResources,
    #[error("hysteresis must be at least 1")]
    InvalidHysteresis,
}

/// Color to resource bijection. Resource ids are never reused.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Binding {
    pairs: Vec<(ColorId, ResourceId)>,
    next: u64,
}

impl Binding {
    pub fn resource(&self, c: ColorId) -> Option<ResourceId> {
        self.pairs.iter().find(|p| p.0 == c).map(|p| p.1)
    }

    pub fn contains_resource(&self, r: ResourceId) -> bool {
        self.pairs.iter().any(|p| p.1 == r)
    }

    /// Pairs in color registration order.
    pub fn pairs(&self) -> &[(ColorId, ResourceId)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Keeps existing pairs, binds new colors to fresh resources and releases
/// the resources of colors that are gone.
pub fn bind_resources(colors: &[ColorId], previous: &Binding) -> Binding {
    let mut next = previous.next;
    let pairs = colors
        .iter()
        .map(|&c| match previous.resource(c) {
            Some(r) => (c, r),
            None => {
                next += 1;
                (c, ResourceId(next))
            }
        })
        .collect();
    Binding { pairs, next }
}

/// Current resource of every placed vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    resources: BTreeMap<VertexId, ResourceId>,
    hysteresis: u32,
}

impl Placement {
    pub fn new(hysteresis: u32) -> Result<Self, AdvisorError> {
        if hysteresis == 0 {
            return Err(AdvisorError::InvalidHysteresis);
        }
        Ok(Self {
            resources: BTreeMap::new(),
            hysteresis,
        })
    }

    pub fn hysteresis(&self) -> u32 {
        self.hysteresis
    }

    pub fn get(&self, v: VertexId) -> Option<ResourceId> {
        self.resources.get(&v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, ResourceId)> + '_ {
        self.resources.iter().map(|(&v, &r)| (v, r))
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    fn loads(&self, binding: &Binding) -> BTreeMap<ResourceId, usize> {
        let mut loads: BTreeMap<ResourceId, usize> = binding.pairs.iter().map(|p| (p.1, 0)).collect();
        for r in self.resources.values() {
            if let Some(n) = loads.get_mut(r) {
                *n += 1;
            }
        }
        loads
    }
}

fn least_loaded(loads: &BTreeMap<ResourceId, usize>) -> ResourceId {
    // BTreeMap iteration is ascending, min_by_key keeps the first minimum.
    *loads.iter().min_by_key(|(_, &n)| n).expect("at least one resource").0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub vertex: VertexId,
    pub from: ResourceId,
    pub to: ResourceId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MigrationAdvice {
    pub step: u64,
    /// Discretionary migrations driven by the clustering.
    pub moves: Vec<Move>,
    /// Forced re-homing of vertices whose resource disappeared. Kept apart
    /// from `moves` because it ignores hysteresis.
    pub evacuations: Vec<Move>,
}

/// Stateful advisor: resource binding plus placement.
#[derive(Debug, Clone)]
pub struct Advisor {
    binding: Binding,
    placement: Placement,
}

impl Advisor {
    pub fn new(hysteresis: u32) -> Result<Self, AdvisorError> {
        Ok(Self {
            binding: Binding::default(),
            placement: Placement::new(hysteresis)?,
        })
    }

    pub fn binding(&self) -> &Binding {
        &self.binding
    }

    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    /// Rebinds resources to `live_colors` and updates the placement from
    /// `assignment`, returning the moves it implies.
    pub fn advise(
        &mut self,
        step: u64,
        assignment: &ColorAssignment,
        live_colors: &[ColorId],
    ) -> Result<MigrationAdvice, AdvisorError> {
        if live_colors.is_empty() {
            return Err(AdvisorError::NoLiveResources);
        }
        self.binding = bind_resources(live_colors, &self.binding);
        let binding = &self.binding;
        let placement = &mut self.placement;
        placement.resources.retain(|&v, _| assignment.get(v).is_some());

        let mut advice = MigrationAdvice {
            step,
            ..MigrationAdvice::default()
        };
        let mut loads = placement.loads(binding);

        let stranded: Vec<(VertexId, ResourceId)> = placement
            .resources
            .iter()
            .filter(|(_, &r)| !binding.contains_resource(r))
            .map(|(&v, &r)| (v, r))
            .collect();
        for (vertex, from) in stranded {
            let to = assignment
                .get(vertex)
                .flatten()
                .and_then(|c| binding.resource(c))
                .unwrap_or_else(|| least_loaded(&loads));
            placement.resources.insert(vertex, to);
            *loads.get_mut(&to).expect("bound resource") += 1;
            advice.evacuations.push(Move { vertex, from, to });
        }

        for entry in assignment.iter() {
            let target = entry.color.and_then(|c| binding.resource(c));
            match (placement.resources.get(&entry.vertex).copied(), target) {
                (Some(from), Some(to)) if from != to && entry.streak >= placement.hysteresis => {
                    placement.resources.insert(entry.vertex, to);
                    *loads.get_mut(&from).expect("bound resource") -= 1;
                    *loads.get_mut(&to).expect("bound resource") += 1;
                    advice.moves.push(Move {
                        vertex: entry.vertex,
                        from,
                        to,
                    });
                }
                (Some(_), _) => {}
                (None, target) => {
                    let to = target.unwrap_or_else(|| least_loaded(&loads));
                    placement.resources.insert(entry.vertex, to);
                    *loads.get_mut(&to).expect("bound resource") += 1;
                }
            }
        }
        Ok(advice)
    }
}
