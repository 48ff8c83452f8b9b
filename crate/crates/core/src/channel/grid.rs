use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::StripComplex;
use crate::types::Point;

/// Minimum number of cells across a strip.
pub const MIN_CELLS_ACROSS: f64 = 4.0;

/// An active staircase cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
    pub edge: usize,
    pub center: Point,
    pub area: f64,
    /// Index of the (column, edge) group the cell belongs to.
    pub group: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceDir {
    /// Shared side at constant `x` (flux in `x`).
    Horizontal,
    /// Shared side at constant `y` (flux in `y`).
    Vertical,
}

/// An open face between two active cells, with transmissibility
/// `face length / centre distance`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFace {
    pub a: usize,
    pub b: usize,
    pub dir: FaceDir,
    pub trans: f64,
}

/// Cells of one cross-section component within one column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellGroup {
    pub col: usize,
    pub edge: usize,
    pub x: f64,
    pub cells: Vec<usize>,
    pub area: f64,
}

/// Staircase approximation of `G`: a cell is active iff its centre lies in `Ḡ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelGrid {
    h: f64,
    /// Column boundaries; strip ends are always among them.
    x_edges: Vec<f64>,
    y_min: f64,
    h_y: f64,
    n_rows: usize,
    cells: Vec<Cell>,
    faces: Vec<GridFace>,
    groups: Vec<CellGroup>,
    edge_groups: Vec<Vec<usize>>,
    exact_area: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub grid_area: f64,
    pub exact_area: f64,
    pub relative_error: f64,
}

/// Builds the staircase grid with cells of size about `h`.
pub fn build_channel_grid(sc: &StripComplex, h: f64) -> Result<ChannelGrid> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("cell size must be positive, got {h}")));
    }
    let (_, _, y_min, y_max) = sc.bounds();

    let mut breaks: Vec<f64> = sc.strips().iter().flat_map(|s| [s.x_lo, s.x_hi]).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    let mut x_edges = vec![breaks[0]];
    for w in breaks.windows(2) {
        let n = ((w[1] - w[0]) / h).round().max(1.0) as usize;
        for i in 1..n {
            x_edges.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
        }
        x_edges.push(w[1]);
    }
    let n_rows = ((y_max - y_min) / h).round().max(1.0) as usize;
    let h_y = (y_max - y_min) / n_rows as f64;

    check_resolution(sc, h_y)?;

    let n_cols = x_edges.len() - 1;
    let mut index = vec![vec![None; n_rows]; n_cols];
    let mut cells = Vec::new();
    let mut groups: Vec<CellGroup> = Vec::new();
    let mut edge_groups = vec![Vec::new(); sc.strips().len()];
    for col in 0..n_cols {
        let (xa, xb) = (x_edges[col], x_edges[col + 1]);
        let xc = 0.5 * (xa + xb);
        let first_group = groups.len();
        for row in 0..n_rows {
            let center = Point::new(xc, y_min + (row as f64 + 0.5) * h_y);
            let Some(edge) = sc.locate(center) else { continue };
            let g = match groups[first_group..].iter().position(|g| g.edge == edge) {
                Some(p) => first_group + p,
                None => {
                    edge_groups[edge].push(groups.len());
                    groups.push(CellGroup { col, edge, x: xc, cells: Vec::new(), area: 0.0 });
                    groups.len() - 1
                }
            };
            let area = (xb - xa) * h_y;
            index[col][row] = Some(cells.len());
            groups[g].cells.push(cells.len());
            groups[g].area += area;
            cells.push(Cell { col, row, edge, center, area, group: g });
        }
        // Every strip covering this column must be represented.
        for (k, s) in sc.strips().iter().enumerate() {
            if s.x_lo < xc && xc < s.x_hi && !groups[first_group..].iter().any(|g| g.edge == k) {
                return Err(Error::UnderResolved(format!(
                    "strip {} has no active cell at x = {xc} (width {})",
                    s.id,
                    s.width(xc)
                )));
            }
        }
    }

    let mut faces = Vec::new();
    for col in 0..n_cols {
        let dx = x_edges[col + 1] - x_edges[col];
        for row in 0..n_rows {
            let Some(a) = index[col][row] else { continue };
            if col + 1 < n_cols {
                if let Some(b) = index[col + 1][row] {
                    let mid = Point::new(x_edges[col + 1], cells[a].center.y);
                    if sc.contains(mid) {
                        let dist = 0.5 * (dx + (x_edges[col + 2] - x_edges[col + 1]));
                        faces.push(GridFace { a, b, dir: FaceDir::Horizontal, trans: h_y / dist });
                    }
                }
            }
            if row + 1 < n_rows {
                if let Some(b) = index[col][row + 1] {
                    let mid = Point::new(cells[a].center.x, y_min + (row + 1) as f64 * h_y);
                    if cells[a].edge == cells[b].edge && sc.contains(mid) {
                        faces.push(GridFace { a, b, dir: FaceDir::Vertical, trans: dx / h_y });
                    }
                }
            }
        }
    }

    Ok(ChannelGrid { h, x_edges, y_min, h_y, n_rows, cells, faces, groups, edge_groups, exact_area: sc.area() })
}

/// Rejects strips narrower than [`MIN_CELLS_ACROSS`] rows away from tapering ends.
fn check_resolution(sc: &StripComplex, h_y: f64) -> Result<()> {
    let need = MIN_CELLS_ACROSS * h_y;
    for s in sc.strips() {
        let capped = s.width(s.x_lo) < need || s.width(s.x_hi) < need;
        if capped {
            continue;
        }
        let n = sc.spec().samples_per_strip.max(64);
        for i in 1..n {
            let x = s.x_lo + s.length() * i as f64 / n as f64;
            let w = s.width(x);
            if w < need {
                return Err(Error::UnderResolved(format!(
                    "strip {} is {w} wide at x = {x}, below {MIN_CELLS_ACROSS} cells of height {h_y}",
                    s.id
                )));
            }
        }
    }
    Ok(())
}

impl ChannelGrid {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn h_y(&self) -> f64 {
        self.h_y
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_cols(&self) -> usize {
        self.x_edges.len() - 1
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn faces(&self) -> &[GridFace] {
        &self.faces
    }

    pub fn groups(&self) -> &[CellGroup] {
        &self.groups
    }

    /// Group indices of edge `k`, in increasing `x`.
    pub fn edge_groups(&self, k: usize) -> &[usize] {
        &self.edge_groups[k]
    }

    pub fn x_edges(&self) -> &[f64] {
        &self.x_edges
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn areas(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.area).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    pub fn area_report(&self) -> AreaReport {
        let grid_area = self.total_area();
        AreaReport {
            grid_area,
            exact_area: self.exact_area,
            relative_error: (grid_area - self.exact_area).abs() / self.exact_area,
        }
    }

    /// Smallest column width.
    pub fn min_dx(&self) -> f64 {
        self.x_edges.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Index of the active cell containing `p`, if any.
    pub fn cell_at(&self, p: Point) -> Option<usize> {
        let col = self.x_edges.partition_point(|&x| x <= p.x).checked_sub(1)?;
        if col >= self.n_cols() {
            return None;
        }
        let r = ((p.y - self.y_min) / self.h_y).floor();
        if r < 0.0 || r >= self.n_rows as f64 {
            return None;
        }
        let row = r as usize;
        self.groups
            .iter()
            .filter(|g| g.col == col)
            .flat_map(|g| g.cells.iter().copied())
            .find(|&c| self.cells[c].row == row)
    }

    /// Samples `u` at cell centres.
    pub fn sample(&self, u: impl Fn(Point) -> f64) -> Vec<f64> {
        self.cells.iter().map(|c| u(c.center)).collect()
    }

    /// `∫ u v` with cell areas.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        crate::graph::weighted_dot(&self.areas(), u, v)
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// Group areas, the mass of the induced graph layout.
    pub fn group_areas(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.area).collect()
    }

    /// Cross-section averages per group (`u∧`).
    ///
    /// The average is taken around the first cell value so that constant fields map
    /// to the same constant bit for bit.
    pub fn wedge(&self, u: &[f64]) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| {
                let r = u[g.cells[0]];
                let s: f64 = g.cells.iter().map(|&c| self.cells[c].area * (u[c] - r)).sum();
                r + s / g.area
            })
            .collect()
    }

    /// Lift of a group function to the cells (`f∨`).
    pub fn vee(&self, f: &[f64]) -> Vec<f64> {
        self.cells.iter().map(|c| f[c.group]).collect()
    }
}
