//! The rescaling isometries between `H_{ε₁} = L²(G_{ε₁})` and `H_{ε₂}`.

use super::quad::{ChannelField, QuadGrid};
use crate::error::{Error, Result};
use crate::types::Point;

/// `J_{ε₂,ε₁} u (x, y) = √(ε₁/ε₂) u(x, ε₁ y / ε₂)` for a field given as a function on `G_{ε₁}`.
pub fn rescale_j(u: impl Fn(Point) -> f64, eps1: f64, eps2: f64) -> impl Fn(Point) -> f64 {
    let c = (eps1 / eps2).sqrt();
    move |p: Point| c * u(Point::new(p.x, eps1 * p.y / eps2))
}

/// `J_{ε₂,ε₁}` on matched quadrature grids: a field on `from` (scale `ε₁`) becomes one on `to` (scale `ε₂`).
pub fn rescale_j_grid(u: &ChannelField, from: &QuadGrid, to: &QuadGrid) -> Result<ChannelField> {
    if from.n_channel() != to.n_channel() || from.nodes().iter().zip(to.nodes()).any(|(a, b)| a.x != b.x) {
        return Err(Error::Config("rescaling needs matched grids".into()));
    }
    if u.len() != from.n_channel() {
        return Err(Error::Config("field does not match the source grid".into()));
    }
    let c = (from.eps / to.eps).sqrt();
    Ok(ChannelField::new(u.values.iter().map(|v| c * v).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains;
    use crate::graph::build_graph;

    #[test]
    fn j_is_an_isometry_on_matched_grids() {
        let g = build_graph(&domains::single_strip()).unwrap();
        let (e1, e2) = (0.3, 0.05);
        let q1 = QuadGrid::thin(&g, 32, e1).unwrap();
        let q2 = QuadGrid::thin(&g, 32, e2).unwrap();
        let u = q1.sample_channel(|p| (p.x * 1.3).cos() + p.y * p.y / (e1 * e1));
        let v = rescale_j_grid(&u, &q1, &q2).unwrap();
        assert!((q1.norm_channel(&u) - q2.norm_channel(&v)).abs() < 1e-10);
        // and the matched grid values agree with the functional form
        let f = rescale_j(|p: Point| (p.x * 1.3).cos() + p.y * p.y / (e1 * e1), e1, e2);
        let w = q2.sample_channel(f);
        for (a, b) in v.values.iter().zip(&w.values) {
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn composition_and_inverse() {
        let u = |p: Point| p.x.sin() * (1.0 + p.y);
        let p = Point::new(0.4, 0.7);
        let j = rescale_j(rescale_j(u, 0.5, 0.2), 0.2, 0.5);
        assert!((j(p) - u(p)).abs() < 1e-15);
        let chain = rescale_j(rescale_j(u, 0.5, 0.2), 0.2, 0.1);
        let direct = rescale_j(u, 0.5, 0.1);
        assert!((chain(p) - direct(p)).abs() < 1e-14);
        assert_eq!(rescale_j(u, 0.3, 0.3)(p), u(p));
    }
}
