use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphFunction, GraphSkeleton};
use crate::fv::FvOperator;
use crate::sparse::Csr;
use crate::types::{End, GraphPoint};

/// What an unknown of the discrete operator represents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeKind {
    Cell { edge: usize },
    Vertex { vertex: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpNode {
    #[serde(flatten)]
    pub kind: NodeKind,
    pub x: f64,
}

impl OpNode {
    pub fn edge(&self) -> Option<usize> {
        match self.kind {
            NodeKind::Cell { edge } => Some(edge),
            NodeKind::Vertex { .. } => None,
        }
    }
}

/// Cells per edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphMesh {
    pub cells: Vec<usize>,
}

impl GraphMesh {
    pub fn uniform(g: &GraphSkeleton, n: usize) -> Self {
        Self { cells: vec![n; g.n_edges()] }
    }

    /// About `h` per cell on every edge, at least 4 cells.
    pub fn with_spacing(g: &GraphSkeleton, h: f64) -> Self {
        Self {
            cells: g.edges.iter().map(|e| ((e.length() / h).round() as usize).max(4)).collect(),
        }
    }
}

/// Finite-volume generator `L` of the graph diffusion with diagonal mass `W`.
///
/// `L_ij = c_ij / m_i` for a symmetric conductance `c`, so `W L` is symmetric and
/// `ν = diag(W)` is invariant (see [`FvOperator`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteGraphOperator {
    nodes: Vec<OpNode>,
    fv: FvOperator,
    /// Node indices of the cells of each edge, in increasing `x`.
    edge_nodes: Vec<Vec<usize>>,
    vertex_nodes: Vec<Option<usize>>,
    min_cell: f64,
}

impl DiscreteGraphOperator {
    /// Builds the operator from unknowns, masses and symmetric links `(i, j, c_ij)`, `i ≠ j`.
    pub fn from_parts(
        nodes: Vec<OpNode>,
        mass: Vec<f64>,
        links: &[(usize, usize, f64)],
        edge_nodes: Vec<Vec<usize>>,
        vertex_nodes: Vec<Option<usize>>,
        min_cell: f64,
    ) -> Result<Self> {
        if mass.len() != nodes.len() {
            return Err(Error::Operator("one mass per unknown is required".into()));
        }
        let fv = FvOperator::new(mass, links)?;
        Ok(Self { nodes, fv, edge_nodes, vertex_nodes, min_cell })
    }

    pub fn fv(&self) -> &FvOperator {
        &self.fv
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[OpNode] {
        &self.nodes
    }

    /// The discrete invariant measure `ν = diag(W)`.
    pub fn mass(&self) -> &[f64] {
        self.fv.mass()
    }

    pub fn generator(&self) -> &Csr {
        self.fv.generator()
    }

    pub fn stiffness(&self) -> &Csr {
        self.fv.stiffness()
    }

    pub fn edge_nodes(&self, k: usize) -> &[usize] {
        &self.edge_nodes[k]
    }

    pub fn n_edges(&self) -> usize {
        self.edge_nodes.len()
    }

    pub fn vertex_node(&self, v: usize) -> Option<usize> {
        self.vertex_nodes.get(v).copied().flatten()
    }

    /// Smallest cell length.
    pub fn min_cell(&self) -> f64 {
        self.min_cell
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.fv.apply(f)
    }

    /// `⟨f, g⟩_W`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.fv.inner(f, g)
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.fv.norm(f)
    }

    /// Samples `f(edge, x)` at the unknowns; vertices use their first incident edge.
    pub fn sample(&self, g: &GraphSkeleton, f: impl Fn(usize, f64) -> f64) -> GraphFunction {
        GraphFunction::new(
            self.nodes
                .iter()
                .map(|n| match n.kind {
                    NodeKind::Cell { edge } => f(edge, n.x),
                    NodeKind::Vertex { vertex } => f(g.vertices[vertex].incident[0].0, n.x),
                })
                .collect(),
        )
    }

    /// The unknown closest to a graph point.
    pub fn locate(&self, p: GraphPoint) -> Result<usize> {
        match p {
            GraphPoint::Vertex(v) => self
                .vertex_node(v)
                .or_else(|| {
                    // layouts without vertex unknowns: nearest cell at that x
                    self.nodes
                        .iter()
                        .enumerate()
                        .filter(|(_, n)| n.edge().is_some())
                        .min_by(|a, b| a.1.x.total_cmp(&b.1.x))
                        .map(|(i, _)| i)
                })
                .ok_or_else(|| Error::Operator(format!("no unknown for vertex {v}"))),
            GraphPoint::Edge { edge, x } => {
                let cells = self
                    .edge_nodes
                    .get(edge)
                    .ok_or_else(|| Error::Operator(format!("no edge {edge}")))?;
                cells
                    .iter()
                    .copied()
                    .min_by(|&a, &b| (self.nodes[a].x - x).abs().total_cmp(&(self.nodes[b].x - x).abs()))
                    .ok_or_else(|| Error::Operator(format!("edge {edge} has no cells")))
            }
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.fv.row_sums()
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.fv.symmetry_defect()
    }

    /// Copy with entry `(i, j)` of `L` replaced (negative controls in tests).
    pub fn with_entry(&self, i: usize, j: usize, v: f64) -> Result<Self> {
        Ok(Self { fv: self.fv.with_entry(i, j, v)?, ..self.clone() })
    }
}

/// Finite-volume assembly of `L̄_k f = (1/(2 l_k)) (l_k f')'` with Kirchhoff gluing.
///
/// Every edge is cut into equal cells whose centres are unknowns; every vertex has
/// one shared unknown at its abscissa. Neighbouring unknowns are linked through a
/// face at their midpoint with conductance `½ l(face) / distance`, so `l` is never
/// evaluated at an edge end and degenerate exterior caps need no special row.
/// Masses are `l` at the middle of each dual segment times its length: interior
/// cells get `Δ`, the first and last cell `3Δ/4`, and a vertex `Δ/4` per incident edge.
pub fn assemble_generator(g: &GraphSkeleton, mesh: &GraphMesh) -> Result<DiscreteGraphOperator> {
    if mesh.cells.len() != g.n_edges() {
        return Err(Error::Operator("one cell count per edge is required".into()));
    }
    if let Some(&n) = mesh.cells.iter().find(|&&n| n < 4) {
        return Err(Error::Operator(format!("at least 4 cells per edge are required, got {n}")));
    }
    let mut nodes = Vec::new();
    let mut mass = Vec::new();
    let mut vertex_nodes = vec![None; g.n_vertices()];
    for (v, vert) in g.vertices.iter().enumerate() {
        vertex_nodes[v] = Some(nodes.len());
        nodes.push(OpNode { kind: NodeKind::Vertex { vertex: v }, x: vert.x });
        mass.push(0.0);
    }
    let mut links = Vec::new();
    let mut edge_nodes = Vec::with_capacity(g.n_edges());
    let mut min_cell = f64::INFINITY;
    for (k, e) in g.edges.iter().enumerate() {
        let n = mesh.cells[k];
        let d = e.length() / n as f64;
        min_cell = min_cell.min(d);
        let first = nodes.len();
        let ids: Vec<usize> = (first..first + n).collect();
        for i in 0..n {
            let x = e.x_lo + (i as f64 + 0.5) * d;
            nodes.push(OpNode { kind: NodeKind::Cell { edge: k }, x });
            let (lo, hi) = (
                if i == 0 { e.x_lo + d / 4.0 } else { e.x_lo + i as f64 * d },
                if i == n - 1 { e.x_hi - d / 4.0 } else { e.x_lo + (i + 1) as f64 * d },
            );
            mass.push(e.width((lo + hi) / 2.0) * (hi - lo));
        }
        let weight = |xf: f64, dist: f64| -> Result<f64> {
            let l = e.width(xf);
            if !(l > 0.0) {
                return Err(Error::Operator(format!("edge {} has non-positive face width {l} at x = {xf}", e.id)));
            }
            Ok(0.5 * l / dist)
        };
        let vlo = vertex_nodes[e.vertex(End::Lo)].unwrap();
        let vhi = vertex_nodes[e.vertex(End::Hi)].unwrap();
        mass[vlo] += e.width(e.x_lo + d / 8.0) * d / 4.0;
        mass[vhi] += e.width(e.x_hi - d / 8.0) * d / 4.0;
        links.push((vlo, ids[0], weight(e.x_lo + d / 4.0, d / 2.0)?));
        for i in 0..n - 1 {
            links.push((ids[i], ids[i + 1], weight(e.x_lo + (i + 1) as f64 * d, d)?));
        }
        links.push((ids[n - 1], vhi, weight(e.x_hi - d / 4.0, d / 2.0)?));
        edge_nodes.push(ids);
    }
    DiscreteGraphOperator::from_parts(nodes, mass, &links, edge_nodes, vertex_nodes, min_cell)
}
