use serde::{Deserialize, Serialize};

/// A point of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Which end of a strip (or edge) is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum End {
    /// The left end, `x = x_lo`.
    Lo,
    /// The right end, `x = x_hi`.
    Hi,
}

/// A location on the graph: either the interior of an edge or a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GraphPoint {
    Edge { edge: usize, x: f64 },
    Vertex(usize),
}

impl GraphPoint {
    pub fn on_edge(edge: usize, x: f64) -> Self {
        GraphPoint::Edge { edge, x }
    }
}
