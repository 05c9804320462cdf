//! Colored ant colonies clustering a dynamic communication graph.
//!
//! Each color is a computing resource. Ants of a color deposit pheromone of
//! that color on the edges they cross; a vertex takes the color that
//! dominates its incident edges. The [`advisor`] turns the evolving coloring
//! into migration advice, [`metrics`] scores it, [`workloads`] generates
//! dynamic graphs with known structure, and [`harness`] runs it all from
//! trace files.

pub mod advisor;
pub mod colony;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod workloads;
