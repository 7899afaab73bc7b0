pub mod bounds;
pub mod channel;
pub mod codebook;
pub mod detector;
pub mod dmpa;
pub mod error;
pub mod graph;
pub mod harness;
pub mod model;
pub mod mpa;
pub mod spectral;
