pub mod error;
pub mod experiment;
pub mod growth;
pub mod interface;
pub mod lattice;
pub mod scalar;
pub mod shape;
pub mod stats;
pub mod tasep;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type WeightField64 = lattice::WeightField<f64>;
pub type WeightField32 = lattice::WeightField<f32>;
pub type GrowthTable64 = growth::GrowthTable<f64>;
pub type GrowthTable32 = growth::GrowthTable<f32>;
pub type CompetitionPath64 = growth::CompetitionPath<f64>;
