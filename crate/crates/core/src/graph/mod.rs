//! The identification graph, its measure, averaging/lifting and noise.

mod noise;
mod quad;
mod rescale;
mod skeleton;

pub use noise::{Decay, LiftedNoise, NoiseModel, DEFAULT_TRACE_BOUND, ORTHO_TOL};
pub use quad::{weighted_dot, ChannelField, GraphFunction, GraphNode, QuadGrid};
pub use rescale::{rescale_j, rescale_j_grid};
pub use skeleton::{build_graph, Edge, GraphSkeleton, Vertex};
