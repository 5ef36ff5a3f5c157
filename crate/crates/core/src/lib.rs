//! Polarization analysis of user–page interaction networks.
//!
//! Interaction records are turned into bipartite user–page graphs and their
//! weighted page projections; communities are found with four detection
//! algorithms and compared with page labels; per-user polarization,
//! selective-exposure curves, quarterly growth and cohesion are computed on
//! top. A seeded generator produces planted-polarization corpora.

pub mod calendar;
pub mod community;
pub mod compare;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod synth;
pub mod temporal;
pub mod validation;

pub use error::{Error, Result};
