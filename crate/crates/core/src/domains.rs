//! Built-in example domains.

use std::f64::consts::PI;

use crate::geometry::{DomainSpec, Profile, StripComplex, StripSpec, VertexSpec, DEFAULT_SAMPLES_PER_STRIP};

fn strip(id: usize, x_lo: f64, x_hi: f64, h_lo: Profile, h_hi: Profile) -> StripSpec {
    StripSpec { id, x_lo, x_hi, h_lo, h_hi }
}

fn rect(id: usize, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> StripSpec {
    strip(id, x_lo, x_hi, Profile::constant(y_lo), Profile::constant(y_hi))
}

fn build(spec: DomainSpec) -> StripComplex {
    StripComplex::build(&spec).expect("built-in domain is valid")
}

/// `{0 ≤ x ≤ 2π, 0 ≤ y ≤ 2 + sin x}`.
pub fn single_strip_spec() -> DomainSpec {
    DomainSpec {
        strips: vec![strip(
            0,
            0.0,
            2.0 * PI,
            Profile::constant(0.0),
            Profile::constant(2.0).with_sine(1.0, 1.0, 0.0),
        )],
        vertices: vec![],
        samples_per_strip: DEFAULT_SAMPLES_PER_STRIP,
    }
}

pub fn single_strip() -> StripComplex {
    build(single_strip_spec())
}

/// `A = [0,1]×[0,1]` splitting at `x = 1` into `B = [1,2]×[0,0.4]` and `C = [1,2]×[0.6,1]`.
pub fn fork_spec() -> DomainSpec {
    DomainSpec {
        strips: vec![
            rect(0, 0.0, 1.0, 0.0, 1.0),
            rect(1, 1.0, 2.0, 0.0, 0.4),
            rect(2, 1.0, 2.0, 0.6, 1.0),
        ],
        vertices: vec![VertexSpec { x: 1.0, left: vec![0], right: vec![1, 2] }],
        samples_per_strip: DEFAULT_SAMPLES_PER_STRIP,
    }
}

pub fn fork() -> StripComplex {
    build(fork_spec())
}

/// A fork whose three strips have linearly varying widths.
pub fn tapered_fork_spec() -> DomainSpec {
    DomainSpec {
        strips: vec![
            strip(0, 0.0, 1.0, Profile::constant(0.0), Profile::linear(1.2, -0.2)),
            strip(1, 1.0, 2.0, Profile::constant(0.0), Profile::linear(0.2, 0.2)),
            strip(2, 1.0, 2.0, Profile::linear(0.5, 0.1), Profile::linear(0.7, 0.3)),
        ],
        vertices: vec![VertexSpec { x: 1.0, left: vec![0], right: vec![1, 2] }],
        samples_per_strip: DEFAULT_SAMPLES_PER_STRIP,
    }
}

pub fn tapered_fork() -> StripComplex {
    build(tapered_fork_spec())
}

pub fn unit_square_spec() -> DomainSpec {
    DomainSpec {
        strips: vec![rect(0, 0.0, 1.0, 0.0, 1.0)],
        vertices: vec![],
        samples_per_strip: DEFAULT_SAMPLES_PER_STRIP,
    }
}

pub fn unit_square() -> StripComplex {
    build(unit_square_spec())
}

/// `[0, len] × [0, width]`.
pub fn rectangle_spec(len: f64, width: f64) -> DomainSpec {
    DomainSpec {
        strips: vec![rect(0, 0.0, len, 0.0, width)],
        vertices: vec![],
        samples_per_strip: DEFAULT_SAMPLES_PER_STRIP,
    }
}

pub fn rectangle(len: f64, width: f64) -> StripComplex {
    build(rectangle_spec(len, width))
}

/// Two unit squares glued along `x = 1` (a degree-two vertex).
pub fn chain_spec() -> DomainSpec {
    DomainSpec {
        strips: vec![rect(0, 0.0, 1.0, 0.0, 1.0), rect(1, 1.0, 2.0, 0.0, 1.0)],
        vertices: vec![VertexSpec { x: 1.0, left: vec![0], right: vec![1] }],
        samples_per_strip: DEFAULT_SAMPLES_PER_STRIP,
    }
}

/// Two squares that never touch; the graph is disconnected.
pub fn disjoint_spec() -> DomainSpec {
    DomainSpec {
        strips: vec![rect(0, 0.0, 1.0, 0.0, 1.0), rect(1, 2.0, 3.0, 0.0, 1.0)],
        vertices: vec![],
        samples_per_strip: DEFAULT_SAMPLES_PER_STRIP,
    }
}

/// Looks up a built-in domain by name.
pub fn by_name(name: &str) -> Option<DomainSpec> {
    Some(match name {
        "single-strip" => single_strip_spec(),
        "fork" => fork_spec(),
        "tapered-fork" => tapered_fork_spec(),
        "unit-square" => unit_square_spec(),
        "chain" => chain_spec(),
        "disjoint" => disjoint_spec(),
        _ => return None,
    })
}

pub const NAMES: [&str; 6] = ["single-strip", "fork", "tapered-fork", "unit-square", "chain", "disjoint"];
