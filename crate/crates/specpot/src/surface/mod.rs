//! Combinatorial surfaces with marked points and order-2 orbifold points:
//! puzzle-piece assembly, tagged triangulations, weighted quivers,
//! potentials, flips and popped potentials.

pub mod build;
pub mod flip;
pub mod map;
pub mod pieces;
pub mod pops;

pub use build::{
    build_quiver, build_sp, build_unreduced_potential, build_unreduced_quiver, ScalarChoice,
    TaggedTriangulation, UnreducedQuiver,
};
pub use flip::{flip, FlipOutcome};
pub use map::{Dart, Edge, EdgeKind, Face, FaceShape, Point, PointKind, SurfaceMap};
pub use pieces::{assemble, MatchSpec, PieceKind, PieceSpec, SurfaceSpec};
pub use pops::{popped_orbifold, popped_self_folded, sf_enclosed_puncture};

use crate::error::SurfaceError;
use crate::scalars::parse_rational;

/// Loads a tagged triangulation and scalar choice from a surface spec.
pub fn from_spec(spec: &SurfaceSpec) -> Result<(TaggedTriangulation, ScalarChoice), SurfaceError> {
    let map = assemble(spec)?;
    let mut notched = Vec::new();
    for (p, tag) in &spec.tags {
        map.point_ix(p)?;
        match tag.as_str() {
            "notched" => notched.push(p.clone()),
            "plain" => {}
            other => {
                return Err(SurfaceError::BadGluing(format!("unknown tag {other} at {p}")));
            }
        }
    }
    let mut x = ScalarChoice::ones(&map);
    for (p, val) in &spec.scalars {
        map.point_ix(p)?;
        let r = parse_rational(val).map_err(|e| SurfaceError::BadGluing(e.to_string()))?;
        x.x.insert(p.clone(), r);
    }
    Ok((TaggedTriangulation { map, notched }, x))
}
