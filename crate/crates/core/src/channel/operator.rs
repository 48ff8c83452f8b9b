use serde::{Deserialize, Serialize};

use super::grid::{ChannelGrid, FaceDir};
use crate::error::{Error, Result};
use crate::fv::FvOperator;
use crate::operator::{DiscreteGraphOperator, NodeKind, OpNode};
use crate::sparse::Csr;

/// `L_ε = ½ div(σ_ε ∇·)` on the active cells with zero co-normal flux.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelOperator {
    eps: f64,
    fv: FvOperator,
    min_dx: f64,
}

/// Horizontal faces carry `½ T`, vertical faces `½ T ε⁻²`; boundary faces are omitted.
pub fn assemble_leps(grid: &ChannelGrid, eps: f64) -> Result<ChannelOperator> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    let inv = 1.0 / eps;
    let inv_eps2 = inv * inv;
    let links: Vec<(usize, usize, f64)> = grid
        .faces()
        .iter()
        .map(|f| {
            let w = 0.5 * f.trans;
            let w = match f.dir {
                FaceDir::Horizontal => w,
                FaceDir::Vertical => w * inv_eps2,
            };
            (f.a, f.b, w)
        })
        .collect();
    Ok(ChannelOperator { eps, fv: FvOperator::new(grid.areas(), &links)?, min_dx: grid.min_dx() })
}

impl ChannelOperator {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n(&self) -> usize {
        self.fv.n()
    }

    pub fn fv(&self) -> &FvOperator {
        &self.fv
    }

    /// Cell areas as used by the operator.
    pub fn mass(&self) -> &[f64] {
        self.fv.mass()
    }

    pub fn generator(&self) -> &Csr {
        self.fv.generator()
    }

    pub fn stiffness(&self) -> &Csr {
        self.fv.stiffness()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.fv.apply(u)
    }

    pub fn min_dx(&self) -> f64 {
        self.min_dx
    }

    /// Area-weighted total `Σ m_i u_i`.
    pub fn total_mass(&self, u: &[f64]) -> f64 {
        self.mass().iter().zip(u).map(|(m, v)| m * v).sum()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.fv.norm(u)
    }
}

/// Graph operator on the (column, edge) groups of `grid`: group areas as masses and
/// the summed horizontal conductances between groups as links.
///
/// This is the limit of `L_ε` on fields constant across each group, so it is the
/// graph operator against which the channel solution converges as `ε → 0`.
pub fn induced_graph_operator(grid: &ChannelGrid) -> Result<DiscreteGraphOperator> {
    let groups = grid.groups();
    let nodes: Vec<OpNode> = groups.iter().map(|g| OpNode { kind: NodeKind::Cell { edge: g.edge }, x: g.x }).collect();
    let cells = grid.cells();
    let links: Vec<(usize, usize, f64)> = grid
        .faces()
        .iter()
        .filter(|f| f.dir == FaceDir::Horizontal)
        .map(|f| (cells[f.a].group, cells[f.b].group, 0.5 * f.trans))
        .collect();
    let n_edges = groups.iter().map(|g| g.edge + 1).max().unwrap_or(0);
    let edge_nodes = (0..n_edges).map(|k| grid.edge_groups(k).to_vec()).collect();
    DiscreteGraphOperator::from_parts(nodes, grid.group_areas(), &links, edge_nodes, Vec::new(), grid.min_dx())
}
