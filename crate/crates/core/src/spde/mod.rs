//! Stochastic time stepping shared by the channel and graph equations, the graph
//! SPDE and its coupled comparison with the channel SPDE.

mod compare;
mod em;
mod graph;

pub use compare::{compare_channel_graph, CompareConfig, CompareRow};
pub use em::{semi_implicit_em, step_count, BrownianLog, Drift, EmProblem, NoiseSource, SOLVE_TOL};
pub use graph::{discrete_ou_variance, solve_graph_spde, stochastic_convolution_cov, GraphSpdeState};
