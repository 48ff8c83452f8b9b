//! The discrete graph generator, its semigroup, spectrum and Markov chain.

mod assemble;
mod ctmc;
mod semigroup;
mod spectrum;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use assemble::{assemble_generator, DiscreteGraphOperator, GraphMesh, NodeKind, OpNode};
pub use ctmc::{sample_graph_diffusion, CtmcSampler};
pub use semigroup::{
    apply_semigroup, default_cn_dt, solve_graph_pde, SemigroupMethod, ThetaStepper, Trajectory, DENSE_LIMIT,
};
pub use spectrum::{eigen_decompose, Spectrum, EIGEN_LIMIT};

use crate::error::Result;

/// `‖νᵀL‖_∞ / ‖ν‖_∞` with `ν = diag(W)`.
pub fn stationary_check(op: &DiscreteGraphOperator) -> f64 {
    op.fv().stationary_residual()
}

/// Flux imbalance `Σ ± l_k f'_k` seen by the vertex row: `2 (W L f)_v`.
pub fn vertex_flux_residual(op: &DiscreteGraphOperator, f: &[f64], vertex: usize) -> Option<f64> {
    let v = op.vertex_node(vertex)?;
    Some(2.0 * op.stiffness().row(v).map(|(j, s)| s * f[j]).sum::<f64>())
}

/// JSON container for external inspection of an assembled operator.
///
/// `generator` holds the triplets `(i, j, L_ij)`; `mass` is the diagonal of `W`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDump {
    pub format: String,
    pub n: usize,
    pub nodes: Vec<OpNode>,
    pub mass: Vec<f64>,
    pub generator: Vec<(usize, usize, f64)>,
}

pub const DUMP_FORMAT: &str = "chgraph-operator/1";

impl OperatorDump {
    pub fn new(op: &DiscreteGraphOperator) -> Self {
        Self {
            format: DUMP_FORMAT.into(),
            n: op.n(),
            nodes: op.nodes().to_vec(),
            mass: op.mass().to_vec(),
            generator: op.generator().triplets(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("operator dump serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests;
