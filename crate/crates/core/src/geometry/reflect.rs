//! Oblique reflection along `σ_ε ν` with `σ_ε = diag(1, ε⁻²)`.

use serde::{Deserialize, Serialize};

use super::complex::{curve_normal, BoundaryPoint, Face, Side, StripComplex, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::types::Point;

/// Maximum number of successive pushes before giving up.
pub const MAX_PUSHES: usize = 8;

/// Result of pushing an outside point back into `Ḡ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reflection {
    pub point: Point,
    /// The boundary point hit by the last push.
    pub boundary: Option<BoundaryPoint>,
    /// Total multiplier `Σ d ≥ 0` (the local time increment).
    pub dphi: f64,
    pub pushes: usize,
}

#[derive(Clone, Copy, Debug)]
enum Candidate {
    Curve { strip: usize, side: Side },
    Wall { idx: usize },
}

impl StripComplex {
    /// Projects `p` back into the closed domain along `σ_ε ν`.
    ///
    /// A point already inside is returned unchanged with `dphi = 0`.
    pub fn reflect(&self, p: Point, eps: f64) -> Result<Reflection> {
        let inv_eps2 = (1.0 / eps) * (1.0 / eps);
        let mut cur = p;
        let mut dphi = 0.0;
        let mut boundary = None;
        for pushes in 0..=MAX_PUSHES {
            if self.contains(cur) {
                return Ok(Reflection { point: cur, boundary, dphi, pushes });
            }
            if pushes == MAX_PUSHES {
                break;
            }
            let cand = self
                .violated_face(cur)
                .ok_or(Error::ReflectionFailed(pushes))?;
            let (next, bp, d) = match cand {
                Candidate::Curve { strip, side } => self
                    .push_curve(strip, side, cur, inv_eps2)
                    .ok_or(Error::ReflectionFailed(pushes))?,
                Candidate::Wall { idx } => {
                    let w = &self.walls()[idx];
                    let d = (cur.x - w.x).abs();
                    let q = Point::new(w.x, cur.y);
                    let bp = BoundaryPoint {
                        strip: w.strip,
                        face: Face::Wall(w.end),
                        position: q,
                        normal: Point::new(w.inward, 0.0),
                    };
                    (q, bp, d)
                }
            };
            cur = next;
            dphi += d;
            boundary = Some(bp);
        }
        Err(Error::ReflectionFailed(MAX_PUSHES))
    }

    /// The nearest boundary face that `p` lies beyond.
    fn violated_face(&self, p: Point) -> Option<Candidate> {
        let mut best: Option<(f64, Candidate)> = None;
        fn offer(best: &mut Option<(f64, Candidate)>, d: f64, c: Candidate) {
            if best.is_none_or(|(bd, _)| d < bd) {
                *best = Some((d, c));
            }
        }
        for (k, s) in self.strips().iter().enumerate() {
            let xc = s.clamp_x(p.x);
            let (lo, hi) = s.section(xc);
            let (side, gap, slope) = if p.y < lo {
                (Side::Lower, lo - p.y, s.lower.d1(xc))
            } else if p.y > hi {
                (Side::Upper, p.y - hi, s.upper.d1(xc))
            } else {
                continue;
            };
            let d = if xc == p.x {
                gap * curve_normal(side, slope).y.abs()
            } else {
                (p.x - xc).hypot(gap)
            };
            offer(&mut best, d, Candidate::Curve { strip: k, side });
        }
        let mut any_wall = false;
        for (idx, w) in self.walls().iter().enumerate() {
            if (p.x - w.x) * w.inward < 0.0
                && p.y >= w.y_lo - BOUNDARY_TOL
                && p.y <= w.y_hi + BOUNDARY_TOL
            {
                offer(&mut best, (p.x - w.x).abs(), Candidate::Wall { idx });
                any_wall = true;
            }
        }
        if best.is_none() && !any_wall {
            for (idx, w) in self.walls().iter().enumerate() {
                if (p.x - w.x) * w.inward < 0.0 {
                    let dy = (w.y_lo - p.y).max(p.y - w.y_hi).max(0.0);
                    offer(&mut best, (p.x - w.x).hypot(dy), Candidate::Wall { idx });
                }
            }
        }
        best.map(|(_, c)| c)
    }

    /// Solves `p + d σ_ε ν(x_b) = (x_b, h(x_b))` for `d ≥ 0` and `x_b`.
    fn push_curve(&self, k: usize, side: Side, p: Point, inv_eps2: f64) -> Option<(Point, BoundaryPoint, f64)> {
        let s = self.strip(k);
        let prof = match side {
            Side::Lower => &s.lower,
            Side::Upper => &s.upper,
        };
        let mut xb = s.clamp_x(p.x);
        let mut out = None;
        for _ in 0..60 {
            let nu = curve_normal(side, prof.d1(xb));
            let mut d = ((prof.value(xb) - p.y) / (inv_eps2 * nu.y)).max(0.0);
            for _ in 0..50 {
                let xs = p.x + nu.x * d;
                let g = p.y + inv_eps2 * nu.y * d - prof.value(xs);
                let dg = inv_eps2 * nu.y - prof.d1(xs) * nu.x;
                if dg == 0.0 || !dg.is_finite() {
                    return None;
                }
                let step = g / dg;
                d -= step;
                if step.abs() <= 1e-16 * (1.0 + d.abs()) {
                    break;
                }
            }
            if !d.is_finite() {
                return None;
            }
            let xn = p.x + nu.x * d;
            if xn < s.x_lo || xn > s.x_hi {
                // The push leaves the strip's x-range: aim for the corner height
                // and let a wall push (or the neighbouring strip) finish the job.
                let xe = s.clamp_x(xn);
                let nu = curve_normal(side, prof.d1(xe));
                let d = ((prof.value(xe) - p.y) / (inv_eps2 * nu.y)).max(0.0);
                let q = Point::new(p.x + nu.x * d, prof.value(xe));
                let face = match side {
                    Side::Lower => Face::Lower,
                    Side::Upper => Face::Upper,
                };
                let bp = BoundaryPoint { strip: k, face, position: Point::new(xe, prof.value(xe)), normal: nu };
                return Some((q, bp, d));
            }
            let done = (xn - xb).abs() <= 1e-15 * (1.0 + xb.abs());
            xb = xn;
            out = Some((nu, d.max(0.0)));
            if done {
                break;
            }
        }
        let (nu, d) = out?;
        // Land exactly on the curve so containment holds up to rounding.
        let q = Point::new(xb, prof.value(xb));
        let face = match side {
            Side::Lower => Face::Lower,
            Side::Upper => Face::Upper,
        };
        Some((q, BoundaryPoint { strip: k, face, position: q, normal: nu }, d))
    }

    /// Reflection performed in `G_ε` (normal direction) and mapped back by `y ↦ y/ε`.
    ///
    /// Agrees with [`StripComplex::reflect`] to first order in the overshoot.
    pub fn reflect_via_thin_channel(&self, thin: &StripComplex, p: Point, eps: f64) -> Result<Reflection> {
        let r = thin.reflect(Point::new(p.x, eps * p.y), 1.0)?;
        Ok(Reflection {
            point: Point::new(r.point.x, r.point.y / eps),
            boundary: r.boundary,
            dphi: r.dphi,
            pushes: r.pushes,
        })
    }
}
