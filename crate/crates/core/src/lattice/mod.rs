//! Lattice geometry, counter-based random streams and the exponential weight
//! field that every experiment is built on.

pub mod rng;
mod site;
mod weights;

pub use rng::{CounterKey, Lane, RngStream};
pub use site::{LatticeBox, Site};
pub use weights::{
    sample_weights, site_ordinal, StreamWeights, WeightField, WeightSource, MAX_FIELD_SITES,
};
