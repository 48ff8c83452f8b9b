//! Quadrature grids on which `H = L²(G)` and `H̄ = L²(Γ, ν)` are represented.
//!
//! Each edge carries composite-Simpson nodes in `x` (its two end nodes are the
//! one-sided limits at the vertices); each `x` node carries the 16 Gauss–Legendre
//! nodes of its cross-section. A channel field is the vector of values at all
//! `(x, y)` nodes, a graph function the vector of values at all `x` nodes.

use serde::{Deserialize, Serialize};

use super::skeleton::GraphSkeleton;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_16, simpson_weights, GL_NODES};
use crate::types::Point;

/// Values of an element of `H̄` on a grid of graph nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFunction {
    pub values: Vec<f64>,
}

/// Values of an element of `H` on a grid of channel nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelField {
    pub values: Vec<f64>,
}

impl GraphFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl ChannelField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Weighted inner product `Σ w_i a_i b_i`.
pub fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub edge: usize,
    pub x: f64,
    /// Cross-section bottom and width in the (possibly thin) channel.
    pub y_lo: f64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadGrid {
    /// Vertical scale: 1 for `G`, `ε` for `G_ε`.
    pub eps: f64,
    nodes: Vec<GraphNode>,
    edge_offsets: Vec<usize>,
    /// Simpson weight times unscaled width: the `ν`-weights of `H̄`.
    nu_weights: Vec<f64>,
    /// Weights of the channel nodes (Simpson × Gauss–Legendre × cross-section width).
    area_weights: Vec<f64>,
    /// Gauss–Legendre weights normalized to sum to one.
    gl_avg: [f64; GL_NODES],
}

impl QuadGrid {
    /// Grid on `G` with `n_x` (even) Simpson intervals per edge.
    pub fn new(g: &GraphSkeleton, n_x: usize) -> Result<Self> {
        Self::thin(g, n_x, 1.0)
    }

    /// Grid on the thin channel `G_ε`; nodes match those of [`QuadGrid::new`] under `y ↦ εy`.
    pub fn thin(g: &GraphSkeleton, n_x: usize, eps: f64) -> Result<Self> {
        if n_x < 2 || !n_x.is_multiple_of(2) {
            return Err(Error::Config(format!("Simpson needs an even interval count, got {n_x}")));
        }
        if !(eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {eps}")));
        }
        let gl = gauss_legendre_16();
        let mut gl_avg = [0.0; GL_NODES];
        for (a, w) in gl_avg.iter_mut().zip(gl.weights.iter()) {
            *a = w / 2.0;
        }
        let mut nodes = Vec::new();
        let mut edge_offsets = vec![0];
        let mut nu_weights = Vec::new();
        let mut area_weights = Vec::new();
        for (k, e) in g.edges.iter().enumerate() {
            let h = e.length() / n_x as f64;
            let sw = simpson_weights(n_x, h);
            for (i, s) in sw.iter().enumerate() {
                let x = if i == n_x { e.x_hi } else { e.x_lo + i as f64 * h };
                let l = e.width(x).max(0.0);
                nodes.push(GraphNode { edge: k, x, y_lo: eps * e.lower.value(x), width: eps * l });
                nu_weights.push(s * l);
                for a in &gl_avg {
                    area_weights.push(s * eps * l * a);
                }
            }
            edge_offsets.push(nodes.len());
        }
        Ok(Self { eps, nodes, edge_offsets, nu_weights, area_weights, gl_avg })
    }

    pub fn n_graph(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_channel(&self) -> usize {
        self.nodes.len() * GL_NODES
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn edge_range(&self, k: usize) -> std::ops::Range<usize> {
        self.edge_offsets[k]..self.edge_offsets[k + 1]
    }

    pub fn nu_weights(&self) -> &[f64] {
        &self.nu_weights
    }

    pub fn area_weights(&self) -> &[f64] {
        &self.area_weights
    }

    /// The channel point of node `(i, q)`.
    pub fn channel_point(&self, i: usize, q: usize) -> Point {
        let n = &self.nodes[i];
        let t = gauss_legendre_16().nodes[q];
        Point::new(n.x, n.y_lo + n.width * (1.0 + t) / 2.0)
    }

    pub fn sample_graph(&self, f: impl Fn(usize, f64) -> f64) -> GraphFunction {
        GraphFunction::new(self.nodes.iter().map(|n| f(n.edge, n.x)).collect())
    }

    pub fn sample_channel(&self, u: impl Fn(Point) -> f64) -> ChannelField {
        let mut v = Vec::with_capacity(self.n_channel());
        for i in 0..self.nodes.len() {
            for q in 0..GL_NODES {
                v.push(u(self.channel_point(i, q)));
            }
        }
        ChannelField::new(v)
    }

    /// Cross-section averages `u∧`; edge end nodes hold the one-sided limits.
    pub fn wedge(&self, u: &ChannelField) -> GraphFunction {
        assert_eq!(u.len(), self.n_channel(), "channel field does not match the grid");
        GraphFunction::new(
            u.values
                .chunks_exact(GL_NODES)
                .map(|c| {
                    // Averaging the deviation from the first value keeps
                    // cross-section constants bit-exact.
                    let r = c[0];
                    r + c.iter().zip(&self.gl_avg).map(|(u, a)| (u - r) * a).sum::<f64>()
                })
                .collect(),
        )
    }

    /// The lift `f∨ = f ∘ Π`.
    pub fn vee(&self, f: &GraphFunction) -> ChannelField {
        assert_eq!(f.len(), self.n_graph(), "graph function does not match the grid");
        ChannelField::new(f.values.iter().flat_map(|&v| [v; GL_NODES]).collect())
    }

    /// `u = u₁ + u₂` with `u₁ = (u∧)∨ ∈ K₁` and `u₂ ∈ K₂`.
    pub fn split(&self, u: &ChannelField) -> (ChannelField, ChannelField) {
        let u1 = self.vee(&self.wedge(u));
        let u2 = ChannelField::new(u.values.iter().zip(&u1.values).map(|(a, b)| a - b).collect());
        (u1, u2)
    }

    pub fn inner_graph(&self, f: &GraphFunction, g: &GraphFunction) -> f64 {
        weighted_dot(&self.nu_weights, &f.values, &g.values)
    }

    pub fn inner_channel(&self, u: &ChannelField, v: &ChannelField) -> f64 {
        weighted_dot(&self.area_weights, &u.values, &v.values)
    }

    pub fn norm_graph(&self, f: &GraphFunction) -> f64 {
        self.inner_graph(f, f).sqrt()
    }

    /// `|u|_H` (on `G_ε` when the grid is thin).
    pub fn norm_channel(&self, u: &ChannelField) -> f64 {
        self.inner_channel(u, u).sqrt()
    }

    /// `A∨ u = (A u∧)∨` for an operator `A` on graph functions.
    pub fn lift_operator(&self, a: impl Fn(&GraphFunction) -> GraphFunction, u: &ChannelField) -> ChannelField {
        self.vee(&a(&self.wedge(u)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains;
    use crate::graph::build_graph;
    use proptest::prelude::*;

    fn single() -> (GraphSkeleton, QuadGrid) {
        let g = build_graph(&domains::single_strip()).unwrap();
        let q = QuadGrid::new(&g, 64).unwrap();
        (g, q)
    }

    #[test]
    fn wedge_of_constant() {
        let (_, q) = single();
        let f = q.wedge(&q.sample_channel(|_| 2.5));
        assert!(f.values.iter().all(|&v| (v - 2.5).abs() < 1e-14));
    }

    #[test]
    fn wedge_of_y_is_half_width() {
        let (g, q) = single();
        let f = q.wedge(&q.sample_channel(|p| p.y));
        for (n, v) in q.nodes().iter().zip(&f.values) {
            assert!((v - g.edges[0].width(n.x) / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn indicator_above_half_vanishes_on_lower_fork_branch() {
        let g = build_graph(&domains::fork()).unwrap();
        let q = QuadGrid::new(&g, 8).unwrap();
        let f = q.wedge(&q.sample_channel(|p| if p.y > 0.5 { 1.0 } else { 0.0 }));
        assert!(f.values[q.edge_range(1)].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn centered_y_lies_in_k2() {
        let (g, q) = single();
        let e = g.edges[0].clone();
        let (u1, u2) = q.split(&q.sample_channel(|p| p.y - e.width(p.x) / 2.0));
        assert!(u1.values.iter().all(|v| v.abs() < 1e-13));
        assert!(q.norm_channel(&u2) > 1.0);
    }

    #[test]
    fn measure_by_quadrature() {
        let (g, q) = single();
        let one = q.sample_graph(|_, _| 1.0);
        assert!((q.inner_graph(&one, &one) - g.total_measure()).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn vee_is_an_isometric_right_inverse(vals in proptest::collection::vec(-3.0f64..3.0, 51)) {
            let g = build_graph(&domains::fork()).unwrap();
            let q = QuadGrid::new(&g, 16).unwrap();
            let f = GraphFunction::new(vals);
            let back = q.wedge(&q.vee(&f));
            for (a, b) in back.values.iter().zip(&f.values) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
            prop_assert!((q.norm_channel(&q.vee(&f)) - q.norm_graph(&f)).abs() < 1e-10);
        }
    }
}
