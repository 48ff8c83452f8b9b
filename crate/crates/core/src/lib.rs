pub mod domains;
pub mod error;
pub mod fv;
pub mod geometry;
pub mod quadrature;
pub mod types;

pub use error::{Error, Result};
pub mod par;
pub mod rng;
pub mod sparse;
pub mod stats;
pub mod graph;
pub mod operator;
pub mod channel;
pub mod spde;
pub mod reflected;
pub mod experiments;
