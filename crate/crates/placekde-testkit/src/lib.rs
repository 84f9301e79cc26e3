//! Reference implementations and data generators for the placekde test
//! suites.
//!
//! The oracles here recompute results along deliberately different routes
//! (atan2 instead of arcsin, depth-first instead of breadth-first cluster
//! expansion, a rank-sum counting table instead of bitmask enumeration) so
//! that agreement with the main crate is evidence, not tautology. They
//! work on plain tuples; tests convert at the boundary.

pub mod dbscan;
pub mod geojson;
pub mod kde;
pub mod scenario;
pub mod sphere;
pub mod wilcoxon;
