//! Strip-complex domains, boundary normals and oblique reflection.

mod complex;
mod profile;
mod reflect;
mod spec;

pub use complex::{
    curve_normal, BoundaryPoint, CrossSection, Face, Side, Strip, StripComplex, VertexInfo,
    VertexKind, Wall, BOUNDARY_TOL,
};
pub use profile::{Profile, SineTerm};
pub use reflect::{Reflection, MAX_PUSHES};
pub use spec::{DomainSpec, StripSpec, VertexSpec, DEFAULT_SAMPLES_PER_STRIP};
