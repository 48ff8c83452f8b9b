//! Finite volumes for `L_ε = ½ div(σ_ε ∇·)` on a staircase approximation of `G`.

mod grid;
mod operator;
mod solve;

pub use grid::{build_channel_grid, AreaReport, Cell, CellGroup, ChannelGrid, FaceDir, GridFace, MIN_CELLS_ACROSS};
pub use operator::{assemble_leps, induced_graph_operator, ChannelOperator};
pub use solve::{solve_channel_pde, solve_channel_spde};

use crate::graph::{GraphFunction, LiftedNoise, NoiseModel};

/// Cross-section averages of a cell field on the (column, edge) groups.
pub fn wedge_field(grid: &ChannelGrid, u: &[f64]) -> GraphFunction {
    GraphFunction::new(grid.wedge(u))
}

/// Lifts a group function to the cells.
pub fn vee_field(grid: &ChannelGrid, f: &GraphFunction) -> Vec<f64> {
    grid.vee(&f.values)
}

/// Lifts a noise model defined on the groups of `grid` to the cells.
pub fn lift_noise(grid: &ChannelGrid, model: NoiseModel) -> LiftedNoise {
    LiftedNoise::new(model, |f| grid.vee(&f.values), grid.areas())
}
