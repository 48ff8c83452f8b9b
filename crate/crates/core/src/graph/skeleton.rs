use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Profile, StripComplex, VertexKind};
use crate::quadrature::adaptive_simpson;
use crate::types::{End, GraphPoint};

/// One edge `I_k = [x_lo, x_hi]` with width `l_k = upper − lower`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub lower: Profile,
    pub upper: Profile,
    pub v_lo: usize,
    pub v_hi: usize,
}

impl Edge {
    pub fn width(&self, x: f64) -> f64 {
        self.upper.value(x) - self.lower.value(x)
    }

    pub fn width_d1(&self, x: f64) -> f64 {
        self.upper.d1(x) - self.lower.d1(x)
    }

    pub fn length(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn vertex(&self, end: End) -> usize {
        match end {
            End::Lo => self.v_lo,
            End::Hi => self.v_hi,
        }
    }

    pub fn end_x(&self, end: End) -> f64 {
        match end {
            End::Lo => self.x_lo,
            End::Hi => self.x_hi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub x: f64,
    pub kind: VertexKind,
    pub incident: Vec<(usize, End)>,
}

/// The identification graph `Γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSkeleton {
    pub edges: Vec<Edge>,
    pub vertices: Vec<Vertex>,
    /// All-pairs shortest path lengths between vertices.
    vertex_dist: Vec<Vec<f64>>,
}

/// One edge per strip, one vertex per glued group and per exterior end.
pub fn build_graph(sc: &StripComplex) -> Result<GraphSkeleton> {
    let edges: Vec<Edge> = sc
        .strips()
        .iter()
        .enumerate()
        .map(|(k, s)| Edge {
            id: s.id,
            x_lo: s.x_lo,
            x_hi: s.x_hi,
            lower: s.lower.clone(),
            upper: s.upper.clone(),
            v_lo: sc.end_vertex(k, End::Lo),
            v_hi: sc.end_vertex(k, End::Hi),
        })
        .collect();
    let vertices: Vec<Vertex> = sc
        .vertices()
        .iter()
        .map(|v| Vertex { x: v.x, kind: v.kind, incident: v.ends.clone() })
        .collect();

    let nv = vertices.len();
    let mut d = vec![vec![f64::INFINITY; nv]; nv];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in &edges {
        let len = e.length();
        let (a, b) = (e.v_lo, e.v_hi);
        d[a][b] = d[a][b].min(len);
        d[b][a] = d[b][a].min(len);
    }
    for k in 0..nv {
        for i in 0..nv {
            for j in 0..nv {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    if d[0].iter().any(|v| v.is_infinite()) {
        return Err(Error::Graph("the domain is disconnected".into()));
    }
    Ok(GraphSkeleton { edges, vertices, vertex_dist: d })
}

impl GraphSkeleton {
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    fn check(&self, p: GraphPoint) -> Result<()> {
        match p {
            GraphPoint::Vertex(v) if v < self.vertices.len() => Ok(()),
            GraphPoint::Edge { edge, x } if edge < self.edges.len() => {
                let e = &self.edges[edge];
                if x >= e.x_lo && x <= e.x_hi {
                    Ok(())
                } else {
                    Err(Error::Graph(format!("x = {x} is outside edge {edge}")))
                }
            }
            _ => Err(Error::Graph(format!("{p:?} is not a point of the graph"))),
        }
    }

    /// `(vertex, distance to it)` exits available from a point.
    fn exits(&self, p: GraphPoint) -> Vec<(usize, f64)> {
        match p {
            GraphPoint::Vertex(v) => vec![(v, 0.0)],
            GraphPoint::Edge { edge, x } => {
                let e = &self.edges[edge];
                vec![(e.v_lo, x - e.x_lo), (e.v_hi, e.x_hi - x)]
            }
        }
    }

    /// Geodesic distance on `Γ`.
    pub fn distance(&self, p: GraphPoint, q: GraphPoint) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        let mut best = f64::INFINITY;
        if let (GraphPoint::Edge { edge: a, x: xa }, GraphPoint::Edge { edge: b, x: xb }) = (p, q) {
            if a == b {
                best = (xa - xb).abs();
            }
        }
        for (u, du) in self.exits(p) {
            for (v, dv) in self.exits(q) {
                best = best.min(du + self.vertex_dist[u][v] + dv);
            }
        }
        Ok(best)
    }

    /// `ν` of a union of edge intervals `(edge, a, b)`.
    pub fn measure_nu(&self, region: &[(usize, f64, f64)]) -> f64 {
        region
            .iter()
            .map(|&(k, a, b)| {
                let e = &self.edges[k];
                let (a, b) = (a.max(e.x_lo), b.min(e.x_hi));
                if b <= a {
                    0.0
                } else {
                    adaptive_simpson(&|x| e.width(x), a, b, 1e-10)
                }
            })
            .sum()
    }

    /// `ν(Γ)`.
    pub fn total_measure(&self) -> f64 {
        let all: Vec<_> = self.edges.iter().enumerate().map(|(k, e)| (k, e.x_lo, e.x_hi)).collect();
        self.measure_nu(&all)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains;
    use crate::geometry::StripComplex;
    use std::f64::consts::PI;

    #[test]
    fn single_strip_graph() {
        let g = build_graph(&domains::single_strip()).unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.n_vertices(), 2);
        assert!((g.total_measure() - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn fork_graph() {
        let g = build_graph(&domains::fork()).unwrap();
        assert_eq!(g.n_edges(), 3);
        let interior: Vec<_> = g.vertices.iter().filter(|v| v.kind == VertexKind::Interior).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].incident.len(), 3);
        assert_eq!(g.vertices.iter().filter(|v| v.kind == VertexKind::Exterior).count(), 3);
    }

    #[test]
    fn disjoint_strips_are_rejected() {
        let sc = StripComplex::build(&domains::disjoint_spec()).unwrap();
        assert!(matches!(build_graph(&sc), Err(Error::Graph(_))));
    }

    #[test]
    fn distances() {
        let g = build_graph(&domains::fork()).unwrap();
        let d = |p, q| g.distance(p, q).unwrap();
        assert!((d(GraphPoint::on_edge(0, 0.2), GraphPoint::on_edge(0, 0.7)) - 0.5).abs() < 1e-15);
        assert!((d(GraphPoint::on_edge(0, 0.5), GraphPoint::on_edge(1, 1.5)) - 1.0).abs() < 1e-15);
        assert_eq!(d(GraphPoint::on_edge(2, 1.3), GraphPoint::on_edge(2, 1.3)), 0.0);
        // B to C goes back through the vertex
        assert!((d(GraphPoint::on_edge(1, 1.5), GraphPoint::on_edge(2, 1.5)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn measure_of_regions() {
        let g = build_graph(&domains::fork()).unwrap();
        assert_eq!(g.measure_nu(&[]), 0.0);
        assert!((g.measure_nu(&[(1, 1.0, 1.5), (0, 0.0, 0.5)]) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn measure_matches_area_by_2d_quadrature() {
        let sc = domains::tapered_fork();
        let g = build_graph(&sc).unwrap();
        let (x0, x1, y0, y1) = sc.bounds();
        let n = 800;
        let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
        let mut count = 0usize;
        for i in 0..n {
            for j in 0..n {
                let p = crate::types::Point::new(x0 + (i as f64 + 0.5) * hx, y0 + (j as f64 + 0.5) * hy);
                count += sc.contains(p) as usize;
            }
        }
        let area = count as f64 * hx * hy;
        assert!((area - g.total_measure()).abs() < 5e-3, "{area} vs {}", g.total_measure());
    }
}
