//! Place-category classification from coordinates.
//!
//! The core model is a per-category kernel density estimate over labeled
//! training places on a sphere: a probe location is scored against each
//! category's density and takes the best-scoring label. Around that sit
//! density-based spatial clustering for region gating, location inference
//! from WiFi and GPS logs, stratified cross-validation with signed-rank
//! significance tests, score fusion with an external classifier, and a
//! GeoJSON grid exporter for map overlays.
//!
//! Modules:
//!
//! * [`geo`]: coordinates and great-circle distance.
//! * [`cluster`]: DBSCAN and region lookup.
//! * [`density`]: kernels, bandwidths, and the density estimator.
//! * [`classify`]: the per-category classifier, baselines, and fusion.
//! * [`ingest`]: visit/WiFi/GPS ingestion and CSV formats.
//! * [`eval`]: stratified k-fold evaluation, reports, and the
//!   Wilcoxon signed-rank test.
//! * [`grid`]: map-grid annotation and GeoJSON export.

pub mod classify;
pub mod cluster;
pub mod density;
mod error;
pub mod eval;
pub mod geo;
pub mod grid;
pub mod ingest;

pub use error::{Error, Result};
