use serde::{Deserialize, Serialize};

use super::profile::Profile;
use super::spec::{DomainSpec, StripSpec};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::types::{End, GraphPoint, Point};

/// Containment tolerance at the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

const MATCH_TOL: f64 = 1e-9;

/// One smooth strip `{x_lo ≤ x ≤ x_hi, lower(x) ≤ y ≤ upper(x)}`; becomes one graph edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub id: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub lower: Profile,
    pub upper: Profile,
}

impl Strip {
    pub fn width(&self, x: f64) -> f64 {
        self.upper.value(x) - self.lower.value(x)
    }

    pub fn width_d1(&self, x: f64) -> f64 {
        self.upper.d1(x) - self.lower.d1(x)
    }

    pub fn section(&self, x: f64) -> (f64, f64) {
        (self.lower.value(x), self.upper.value(x))
    }

    pub fn length(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn end_x(&self, end: End) -> f64 {
        match end {
            End::Lo => self.x_lo,
            End::Hi => self.x_hi,
        }
    }

    pub fn clamp_x(&self, x: f64) -> f64 {
        x.clamp(self.x_lo, self.x_hi)
    }

    fn covers_x(&self, x: f64, tol: f64) -> bool {
        x >= self.x_lo - tol && x <= self.x_hi + tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexKind {
    Interior,
    Exterior,
}

/// A vertex of the identification graph together with the strip ends glued there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexInfo {
    pub x: f64,
    pub kind: VertexKind,
    pub ends: Vec<(usize, End)>,
}

/// A vertical piece of `∂G` at a vertex abscissa; its inward normal is `(inward, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub x: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub inward: f64,
    pub strip: usize,
    pub end: End,
    pub vertex: usize,
}

/// One connected component of a cross-section.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossSection {
    pub edge: usize,
    pub y_lo: f64,
    pub y_hi: f64,
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Lower,
    Upper,
}

/// Which piece of the boundary a point sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Face {
    Lower,
    Upper,
    Wall(End),
}

/// A boundary point with its unit inward normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub strip: usize,
    pub face: Face,
    pub position: Point,
    pub normal: Point,
}

/// The domain `G` as a complex of glued strips. Immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripComplex {
    strips: Vec<Strip>,
    vertices: Vec<VertexInfo>,
    /// `end_vertex[s] = [vertex at x_lo, vertex at x_hi]`.
    end_vertex: Vec<[usize; 2]>,
    walls: Vec<Wall>,
    vertex_xs: Vec<f64>,
    spec: DomainSpec,
}

/// Inward unit normal of a curve face with slope `slope`.
pub fn curve_normal(side: Side, slope: f64) -> Point {
    let c = 1.0 / (1.0 + slope * slope).sqrt();
    match side {
        Side::Lower => Point::new(-slope * c, c),
        Side::Upper => Point::new(slope * c, -c),
    }
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.1.min(b.1) - a.0.max(b.0)
}

/// `interval` minus the union of `cuts`, keeping pieces longer than `tol`.
fn subtract(interval: (f64, f64), cuts: &[(f64, f64)], tol: f64) -> Vec<(f64, f64)> {
    let mut cuts: Vec<_> = cuts.to_vec();
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut cursor = interval.0;
    for (lo, hi) in cuts {
        if hi <= cursor {
            continue;
        }
        if lo >= interval.1 {
            break;
        }
        if lo - cursor > tol {
            out.push((cursor, lo.min(interval.1)));
        }
        cursor = cursor.max(hi);
    }
    if interval.1 - cursor > tol {
        out.push((cursor, interval.1));
    }
    out
}

fn domain_err(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn x_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOL * (1.0 + a.abs().max(b.abs()))
}

impl StripComplex {
    /// Validates a domain description and builds the complex.
    pub fn build(spec: &DomainSpec) -> Result<Self> {
        if spec.strips.is_empty() {
            return Err(domain_err("no strips"));
        }
        let samples = spec.samples_per_strip.max(8);
        let strips: Vec<Strip> = spec.strips.iter().map(strip_from_spec).collect();
        let mut seen = std::collections::HashSet::new();
        for s in &strips {
            if !seen.insert(s.id) {
                return Err(domain_err(format!("duplicate strip id {}", s.id)));
            }
        }
        for s in &strips {
            validate_strip(s, samples)?;
        }
        check_overlaps(&strips, samples)?;

        let index_of = |id: usize| -> Result<usize> {
            strips
                .iter()
                .position(|s| s.id == id)
                .ok_or_else(|| domain_err(format!("vertex references unknown strip {id}")))
        };

        let mut end_vertex = vec![[usize::MAX; 2]; strips.len()];
        let mut vertices = Vec::new();
        let mut walls = Vec::new();

        for vs in &spec.vertices {
            let vid = vertices.len();
            if vs.left.is_empty() || vs.right.is_empty() {
                return Err(domain_err(format!(
                    "vertex at x = {} must glue strips from both sides",
                    vs.x
                )));
            }
            let mut ends = Vec::new();
            for &id in &vs.left {
                let k = index_of(id)?;
                if !x_match(strips[k].x_hi, vs.x) {
                    return Err(domain_err(format!(
                        "strip {id} does not end at vertex x = {}",
                        vs.x
                    )));
                }
                ends.push((k, End::Hi));
            }
            for &id in &vs.right {
                let k = index_of(id)?;
                if !x_match(strips[k].x_lo, vs.x) {
                    return Err(domain_err(format!(
                        "strip {id} does not start at vertex x = {}",
                        vs.x
                    )));
                }
                ends.push((k, End::Lo));
            }
            for &(k, end) in &ends {
                let slot = &mut end_vertex[k][end as usize];
                if *slot != usize::MAX {
                    return Err(domain_err(format!(
                        "end of strip {} is glued at two vertices",
                        strips[k].id
                    )));
                }
                *slot = vid;
                if strips[k].width(vs.x) <= 0.0 {
                    return Err(domain_err(format!(
                        "strip {} degenerates at the interior vertex x = {}",
                        strips[k].id, vs.x
                    )));
                }
            }
            let group_walls = vertex_walls(&strips, &ends, vs.x, vid)?;
            walls.extend(group_walls);
            vertices.push(VertexInfo {
                x: vs.x,
                kind: VertexKind::Interior,
                ends,
            });
        }

        // Remaining ends are exterior.
        for k in 0..strips.len() {
            for end in [End::Lo, End::Hi] {
                if end_vertex[k][end as usize] != usize::MAX {
                    continue;
                }
                let x = strips[k].end_x(end);
                let (lo, hi) = strips[k].section(x);
                // An exterior end may not silently touch another strip.
                for (j, other) in strips.iter().enumerate() {
                    if j == k || !other.covers_x(x, MATCH_TOL) {
                        continue;
                    }
                    let xo = other.clamp_x(x);
                    if overlap((lo, hi), other.section(xo)) >= 0.0 && hi - lo > BOUNDARY_TOL {
                        return Err(domain_err(format!(
                            "strips {} and {} touch at x = {x} without a vertex",
                            strips[k].id, other.id
                        )));
                    }
                }
                let vid = vertices.len();
                end_vertex[k][end as usize] = vid;
                if hi - lo > BOUNDARY_TOL {
                    walls.push(Wall {
                        x,
                        y_lo: lo,
                        y_hi: hi,
                        inward: if end == End::Lo { 1.0 } else { -1.0 },
                        strip: k,
                        end,
                        vertex: vid,
                    });
                }
                vertices.push(VertexInfo {
                    x,
                    kind: VertexKind::Exterior,
                    ends: vec![(k, end)],
                });
            }
        }

        let mut vertex_xs: Vec<f64> = vertices.iter().map(|v| v.x).collect();
        vertex_xs.sort_by(f64::total_cmp);
        vertex_xs.dedup_by(|a, b| x_match(*a, *b));

        Ok(Self {
            strips,
            vertices,
            end_vertex,
            walls,
            vertex_xs,
            spec: spec.clone(),
        })
    }

    pub fn strips(&self) -> &[Strip] {
        &self.strips
    }

    pub fn strip(&self, k: usize) -> &Strip {
        &self.strips[k]
    }

    pub fn vertices(&self) -> &[VertexInfo] {
        &self.vertices
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn vertex_xs(&self) -> &[f64] {
        &self.vertex_xs
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    /// Vertex index at the given end of strip `k`.
    pub fn end_vertex(&self, k: usize, end: End) -> usize {
        self.end_vertex[k][end as usize]
    }

    /// `(x_min, x_max, y_min, y_max)` of the closed domain, sampled.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for s in &self.strips {
            b.0 = b.0.min(s.x_lo);
            b.1 = b.1.max(s.x_hi);
            let n = self.spec.samples_per_strip.max(8);
            for i in 0..=n {
                let x = s.x_lo + s.length() * i as f64 / n as f64;
                let (lo, hi) = s.section(x);
                b.2 = b.2.min(lo);
                b.3 = b.3.max(hi);
            }
        }
        b
    }

    /// Lebesgue measure of `G` (equal to `ν(Γ)`).
    pub fn area(&self) -> f64 {
        self.strips
            .iter()
            .map(|s| adaptive_simpson(&|x| s.width(x), s.x_lo, s.x_hi, 1e-12))
            .sum()
    }

    pub fn cross_section(&self, x: f64) -> Vec<CrossSection> {
        self.strips
            .iter()
            .enumerate()
            .filter(|(_, s)| s.covers_x(x, 0.0))
            .map(|(k, s)| {
                let (y_lo, y_hi) = s.section(x);
                CrossSection {
                    edge: k,
                    y_lo,
                    y_hi,
                    length: y_hi - y_lo,
                }
            })
            .collect()
    }

    /// Index of a strip whose closed region contains `p`, if any.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let mut fallback = None;
        for (k, s) in self.strips.iter().enumerate() {
            if !s.covers_x(p.x, BOUNDARY_TOL) {
                continue;
            }
            let (lo, hi) = s.section(s.clamp_x(p.x));
            if p.y >= lo - BOUNDARY_TOL && p.y <= hi + BOUNDARY_TOL {
                if p.x > s.x_lo && p.x < s.x_hi {
                    return Some(k);
                }
                fallback.get_or_insert(k);
            }
        }
        fallback
    }

    pub fn contains(&self, p: Point) -> bool {
        self.locate(p).is_some()
    }

    /// The identification map `Π`.
    pub fn project_to_graph(&self, p: Point) -> Result<GraphPoint> {
        let k = self
            .locate(p)
            .ok_or(Error::OutsideDomain { x: p.x, y: p.y })?;
        let s = &self.strips[k];
        if x_match(p.x, s.x_lo) || p.x < s.x_lo {
            return Ok(GraphPoint::Vertex(self.end_vertex(k, End::Lo)));
        }
        if x_match(p.x, s.x_hi) || p.x > s.x_hi {
            return Ok(GraphPoint::Vertex(self.end_vertex(k, End::Hi)));
        }
        Ok(GraphPoint::Edge { edge: k, x: p.x })
    }

    /// Inward unit normal on the lower or upper curve of strip `k` at abscissa `x`.
    pub fn boundary_normal(&self, k: usize, side: Side, x: f64) -> Result<BoundaryPoint> {
        let s = self
            .strips
            .get(k)
            .ok_or_else(|| domain_err(format!("no strip with index {k}")))?;
        if !s.covers_x(x, MATCH_TOL) {
            return Err(domain_err(format!("x = {x} outside strip {}", s.id)));
        }
        let x = s.clamp_x(x);
        let prof = match side {
            Side::Lower => &s.lower,
            Side::Upper => &s.upper,
        };
        Ok(BoundaryPoint {
            strip: k,
            face: match side {
                Side::Lower => Face::Lower,
                Side::Upper => Face::Upper,
            },
            position: Point::new(x, prof.value(x)),
            normal: curve_normal(side, prof.d1(x)),
        })
    }

    /// Inward normal on the vertical end face of strip `k` at height `y`.
    ///
    /// Fails when `(x_end, y)` lies on a transparent interface between glued strips.
    pub fn wall_normal(&self, k: usize, end: End, y: f64) -> Result<BoundaryPoint> {
        let s = &self.strips[k];
        let x = s.end_x(end);
        let wall = self
            .walls
            .iter()
            .find(|w| w.strip == k && w.end == end && y >= w.y_lo - BOUNDARY_TOL && y <= w.y_hi + BOUNDARY_TOL)
            .ok_or(Error::InteriorInterface { strip: k, coord: y })?;
        Ok(BoundaryPoint {
            strip: k,
            face: Face::Wall(end),
            position: Point::new(x, y),
            normal: Point::new(wall.inward, 0.0),
        })
    }

    /// The thin channel `G_ε = {(x, εy) : (x, y) ∈ G}`.
    pub fn scaled(&self, eps: f64) -> Result<Self> {
        let mut spec = self.spec.clone();
        for s in &mut spec.strips {
            s.h_lo = s.h_lo.scaled(eps);
            s.h_hi = s.h_hi.scaled(eps);
        }
        Self::build(&spec)
    }
}

fn strip_from_spec(s: &StripSpec) -> Strip {
    Strip {
        id: s.id,
        x_lo: s.x_lo,
        x_hi: s.x_hi,
        lower: s.h_lo.clone(),
        upper: s.h_hi.clone(),
    }
}

fn validate_strip(s: &Strip, samples: usize) -> Result<()> {
    if !(s.x_lo.is_finite() && s.x_hi.is_finite() && s.x_lo < s.x_hi) {
        return Err(domain_err(format!("strip {} has an empty x-range", s.id)));
    }
    if !s.lower.is_finite() || !s.upper.is_finite() {
        return Err(domain_err(format!("strip {} has non-finite coefficients", s.id)));
    }
    for i in 0..=samples {
        let x = s.x_lo + s.length() * i as f64 / samples as f64;
        let l = s.width(x);
        let vals = [
            s.lower.value(x),
            s.upper.value(x),
            s.lower.d1(x),
            s.upper.d1(x),
            s.lower.d2(x),
            s.upper.d2(x),
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(domain_err(format!("strip {} is not finite at x = {x}", s.id)));
        }
        let interior = i > 0 && i < samples;
        if (interior && l <= 0.0) || l < -BOUNDARY_TOL {
            return Err(domain_err(format!(
                "strip {} has non-positive width {l} at x = {x}",
                s.id
            )));
        }
    }
    Ok(())
}

fn check_overlaps(strips: &[Strip], samples: usize) -> Result<()> {
    for (i, a) in strips.iter().enumerate() {
        for b in &strips[i + 1..] {
            let lo = a.x_lo.max(b.x_lo);
            let hi = a.x_hi.min(b.x_hi);
            if hi <= lo {
                continue;
            }
            let mut order = 0i8;
            for j in 1..samples {
                let x = lo + (hi - lo) * j as f64 / samples as f64;
                let (sa, sb) = (a.section(x), b.section(x));
                let this = if sa.1 < sb.0 {
                    1
                } else if sb.1 < sa.0 {
                    -1
                } else {
                    return Err(domain_err(format!(
                        "strips {} and {} overlap at x = {x}",
                        a.id, b.id
                    )));
                };
                if order != 0 && this != order {
                    return Err(domain_err(format!(
                        "strips {} and {} cross each other",
                        a.id, b.id
                    )));
                }
                order = this;
            }
        }
    }
    Ok(())
}

/// Validates one glued vertex and returns its vertical boundary pieces.
fn vertex_walls(strips: &[Strip], ends: &[(usize, End)], x: f64, vid: usize) -> Result<Vec<Wall>> {
    let sections: Vec<(usize, End, (f64, f64))> = ends
        .iter()
        .map(|&(k, e)| (k, e, strips[k].section(strips[k].end_x(e))))
        .collect();
    let left: Vec<_> = sections.iter().filter(|s| s.1 == End::Hi).collect();
    let right: Vec<_> = sections.iter().filter(|s| s.1 == End::Lo).collect();

    // The union of the glued sections must be connected (one component of C(x)).
    let n = sections.len();
    let mut reach = vec![false; n];
    reach[0] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            if !reach[i] {
                continue;
            }
            for j in 0..n {
                if !reach[j]
                    && sections[i].1 != sections[j].1
                    && overlap(sections[i].2, sections[j].2) > BOUNDARY_TOL
                {
                    reach[j] = true;
                    changed = true;
                }
            }
        }
    }
    if reach.iter().any(|r| !r) {
        return Err(domain_err(format!(
            "strip ends glued at x = {x} do not form one connected cross-section"
        )));
    }

    let mut walls = Vec::new();
    let right_secs: Vec<(f64, f64)> = right.iter().map(|s| s.2).collect();
    let left_secs: Vec<(f64, f64)> = left.iter().map(|s| s.2).collect();
    for s in &left {
        for (lo, hi) in subtract(s.2, &right_secs, BOUNDARY_TOL) {
            walls.push(Wall { x, y_lo: lo, y_hi: hi, inward: -1.0, strip: s.0, end: End::Hi, vertex: vid });
        }
    }
    for s in &right {
        for (lo, hi) in subtract(s.2, &left_secs, BOUNDARY_TOL) {
            walls.push(Wall { x, y_lo: lo, y_hi: hi, inward: 1.0, strip: s.0, end: End::Lo, vertex: vid });
        }
    }
    if walls.windows(2).any(|w| w[0].inward != w[1].inward) {
        return Err(domain_err(format!(
            "boundary normals at the vertex x = {x} have first components of both signs"
        )));
    }
    Ok(walls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn single_strip_has_two_exterior_ends() {
        let sc = domains::single_strip();
        assert_eq!(sc.strips().len(), 1);
        assert_eq!(sc.vertices().len(), 2);
        assert!(sc.vertices().iter().all(|v| v.kind == VertexKind::Exterior));
    }

    #[test]
    fn fork_has_one_interior_vertex_of_degree_three() {
        let sc = domains::fork();
        let interior: Vec<_> = sc
            .vertices()
            .iter()
            .filter(|v| v.kind == VertexKind::Interior)
            .collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].ends.len(), 3);
        // the notch wall of A between 0.4 and 0.6
        let w: Vec<_> = sc.walls().iter().filter(|w| w.vertex == 0).collect();
        assert_eq!(w.len(), 1);
        assert!((w[0].y_lo - 0.4).abs() < 1e-15 && (w[0].y_hi - 0.6).abs() < 1e-15);
        assert_eq!(w[0].inward, -1.0);
    }

    #[test]
    fn zero_width_strip_is_rejected() {
        let spec = DomainSpec {
            strips: vec![StripSpec {
                id: 0,
                x_lo: 0.0,
                x_hi: 1.0,
                h_lo: Profile::constant(0.5),
                h_hi: Profile::constant(0.5),
            }],
            vertices: vec![],
            samples_per_strip: 1000,
        };
        assert!(matches!(StripComplex::build(&spec), Err(Error::Domain(_))));
    }

    #[test]
    fn overlapping_strips_are_rejected() {
        let mut spec = domains::fork_spec();
        spec.strips[2].h_lo = Profile::constant(0.3);
        assert!(StripComplex::build(&spec).is_err());
    }

    #[test]
    fn mixed_normal_signs_at_a_vertex_are_rejected() {
        // A = [0,1]×[0,1] glued to B = [1,2]×[0.5,1.5]: walls face both ways.
        let spec = DomainSpec {
            strips: vec![
                StripSpec { id: 0, x_lo: 0.0, x_hi: 1.0, h_lo: Profile::constant(0.0), h_hi: Profile::constant(1.0) },
                StripSpec { id: 1, x_lo: 1.0, x_hi: 2.0, h_lo: Profile::constant(0.5), h_hi: Profile::constant(1.5) },
            ],
            vertices: vec![super::super::spec::VertexSpec { x: 1.0, left: vec![0], right: vec![1] }],
            samples_per_strip: 100,
        };
        let err = StripComplex::build(&spec).unwrap_err();
        assert!(err.to_string().contains("both signs"), "{err}");
    }

    #[test]
    fn cross_sections() {
        let sc = domains::single_strip();
        let c = sc.cross_section(FRAC_PI_2);
        assert_eq!(c.len(), 1);
        assert!((c[0].y_lo).abs() < 1e-15 && (c[0].length - 3.0).abs() < 1e-15);

        let fork = domains::fork();
        let c = fork.cross_section(1.5);
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|s| (s.length - 0.4).abs() < 1e-15));
        let c = fork.cross_section(0.5);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].length, 1.0);
        assert!(fork.cross_section(5.0).is_empty());
    }

    #[test]
    fn containment() {
        let sc = domains::single_strip();
        assert!(sc.contains(Point::new(FRAC_PI_2, 1.5)));
        assert!(!sc.contains(Point::new(FRAC_PI_2, 3.1)));
        assert!(sc.contains(Point::new(FRAC_PI_2, 3.0 + 5e-13)));
        let fork = domains::fork();
        assert!(!fork.contains(Point::new(1.5, 0.5)));
        assert!(fork.contains(Point::new(1.0, 0.5)));
    }

    #[test]
    fn normals() {
        let sq = domains::unit_square();
        let bp = sq.boundary_normal(0, Side::Lower, 0.3).unwrap();
        assert_eq!(bp.normal, Point::new(0.0, 1.0));

        let sc = domains::single_strip();
        let bp = sc.boundary_normal(0, Side::Upper, 0.0).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((bp.normal.x - r).abs() < 1e-15 && (bp.normal.y + r).abs() < 1e-15);

        // slope -1 on the lower side: inward normal (1, 1)/√2, verified by containment
        let spec = DomainSpec {
            strips: vec![StripSpec {
                id: 0,
                x_lo: 0.0,
                x_hi: 1.0,
                h_lo: Profile::linear(0.0, -1.0),
                h_hi: Profile::constant(2.0),
            }],
            vertices: vec![],
            samples_per_strip: 100,
        };
        let sc = StripComplex::build(&spec).unwrap();
        let bp = sc.boundary_normal(0, Side::Lower, 0.5).unwrap();
        assert!((bp.normal.x - r).abs() < 1e-15 && (bp.normal.y - r).abs() < 1e-15);
        let t = 1e-6;
        assert!(sc.contains(Point::new(bp.position.x + t * bp.normal.x, bp.position.y + t * bp.normal.y)));
        assert!(!sc.contains(Point::new(bp.position.x - t * bp.normal.x, bp.position.y - t * bp.normal.y)));
    }

    #[test]
    fn interior_interface_has_no_normal() {
        let fork = domains::fork();
        assert!(matches!(
            fork.wall_normal(0, End::Hi, 0.2),
            Err(Error::InteriorInterface { .. })
        ));
        let bp = fork.wall_normal(0, End::Hi, 0.5).unwrap();
        assert_eq!(bp.normal, Point::new(-1.0, 0.0));
    }

    #[test]
    fn projection() {
        let sc = domains::single_strip();
        assert_eq!(sc.project_to_graph(Point::new(1.0, 0.7)).unwrap(), GraphPoint::on_edge(0, 1.0));
        let fork = domains::fork();
        assert_eq!(fork.project_to_graph(Point::new(1.5, 0.2)).unwrap(), GraphPoint::on_edge(1, 1.5));
        assert_eq!(fork.project_to_graph(Point::new(1.0, 0.5)).unwrap(), GraphPoint::Vertex(0));
        assert!(fork.project_to_graph(Point::new(1.5, 0.5)).is_err());
        assert!(sc.project_to_graph(Point::new(PI, 3.5)).is_err());
    }

    #[test]
    fn spec_round_trips_bit_exactly() {
        let spec = domains::single_strip_spec();
        let json = spec.to_json();
        assert_eq!(DomainSpec::from_json(&json).unwrap(), spec);
        let toml = spec.to_toml().unwrap();
        assert_eq!(DomainSpec::from_toml(&toml).unwrap(), spec);
    }
}
