//! Popped potentials: the vertex-swap pop at a self-folded pair and the
//! Galois-twist pop at an orbifold point.

use crate::error::SurfaceError;
use crate::pathalg::{apply_endo, normalize_raw, AlgebraElement, Endomorphism};
use crate::sp::SpeciesWithPotential;

use super::build::{build_sp, ScalarChoice, TaggedTriangulation};
use super::map::{FaceShape, SurfaceMap};

/// Transport of a potential along the quiver automorphism that swaps a folded
/// side with its enclosing loop (the parallel arrow copies trade places).
pub fn swap_transport(
    sp: &SpeciesWithPotential,
    i: &str,
    j: &str,
) -> Result<SpeciesWithPotential, SurfaceError> {
    let q = &sp.quiver;
    let vi = q.vertex_ix(i)?;
    let vj = q.vertex_ix(j)?;
    // swapped quiver: same vertex set, arrows with endpoints i<->j exchanged
    let swap = |v: usize| if v == vi { vj } else if v == vj { vi } else { v };
    // arrow bijection: match (tail, head, label) profiles after the swap
    let mut target: Vec<Option<usize>> = vec![None; q.arrows.len()];
    let mut used = vec![false; q.arrows.len()];
    for (ix, a) in q.arrows.iter().enumerate() {
        let want = (swap(a.tail), swap(a.head), a.label.clone());
        let cand = q
            .arrows
            .iter()
            .enumerate()
            .find(|(jx, b)| !used[*jx] && (b.tail, b.head, b.label.clone()) == want)
            .map(|(jx, _)| jx)
            .ok_or_else(|| {
                SurfaceError::BadGluing(format!("no swap partner for arrow {}", a.id))
            })?;
        used[cand] = true;
        target[ix] = Some(cand);
    }
    let mut pot = AlgebraElement::zero_trunc(sp.potential.trunc);
    for (p, c) in &sp.potential.terms {
        let arrows: Vec<usize> = p.arrows.iter().map(|&a| target[a].unwrap()).collect();
        let vpow: Vec<u32> = (0..=p.len()).map(|s| p.bit(s) as u32).collect();
        let base = if p.is_empty() { swap(p.base) } else { 0 };
        let (sgn, np) = normalize_raw(q, &arrows, &vpow, base).map_err(SurfaceError::Algebra)?;
        pot.insert(c * sgn, np);
    }
    SpeciesWithPotential::new(q.clone(), pot).map_err(SurfaceError::Sp)
}

/// Popped potential at a self-folded pair: sign-flip the enclosed puncture's
/// scalar and transport along the folded/loop vertex swap.
pub fn popped_self_folded(
    tagged: &TaggedTriangulation,
    x: &ScalarChoice,
    folded: &str,
    loop_arc: &str,
    trunc: Option<usize>,
) -> Result<SpeciesWithPotential, SurfaceError> {
    let m = &tagged.map;
    let fi = m.edge_ix(folded)?;
    let li = m.edge_ix(loop_arc)?;
    let ok = m
        .self_folded_at(fi)
        .map(|(_, le)| le == li)
        .unwrap_or(false);
    if !ok {
        return Err(SurfaceError::NotSelfFolded(folded.to_string(), loop_arc.to_string()));
    }
    // enclosed puncture
    let base = m.edges[li].ends[0];
    let ends = m.edges[fi].ends;
    let q_point = if ends[0] == base { ends[1] } else { ends[0] };
    let y = x.flipped_at(&m.points[q_point].id);
    let sp = build_sp(tagged, &y, trunc)?;
    swap_transport(&sp, folded, loop_arc)
}

/// Popped potential at an orbifold point: sign-flip the scalar at the marked
/// point of its pending arc, then twist that vertex (swapping the parallel
/// pending pair when the orbifold monogon has a second orbifold point).
pub fn popped_orbifold(
    tagged: &TaggedTriangulation,
    x: &ScalarChoice,
    orb: &str,
    trunc: Option<usize>,
) -> Result<SpeciesWithPotential, SurfaceError> {
    let m = &tagged.map;
    let qp = m.point_ix(orb)?;
    if m.points[qp].kind != super::map::PointKind::Orbifold {
        return Err(SurfaceError::UnknownOrbifold(orb.to_string()));
    }
    let pending = (0..m.edges.len())
        .find(|&e| m.edges[e].ends.contains(&qp))
        .ok_or_else(|| SurfaceError::UnknownOrbifold(orb.to_string()))?;
    let ends = m.edges[pending].ends;
    let marked = if ends[0] == qp { ends[1] } else { ends[0] };
    let zeta_x = x.flipped_at(&m.points[marked].id);
    let sp = build_sp(tagged, &zeta_x, trunc)?;

    // the face of the pending arc decides the arrow swap
    let face = (0..m.faces.len())
        .find(|&f| !m.faces[f].boundary && m.faces[f].darts.iter().any(|d| d.edge == pending))
        .expect("pending arc lies in a face");
    let mut endo = Endomorphism::default();
    let vi = sp.quiver.vertex_ix(&m.edges[pending].id)?;
    endo.twists.insert(vi, true);
    if let FaceShape::OrbMonogon { pendings } = m.shape(face) {
        let other = if pendings[0] == pending { pendings[1] } else { pendings[0] };
        let vo = sp.quiver.vertex_ix(&m.edges[other].id)?;
        // swap the parallel double arrows between the two pending vertices
        let mut pair: Vec<usize> = (0..sp.quiver.arrows.len())
            .filter(|&a| {
                let ar = &sp.quiver.arrows[a];
                (ar.tail == vi && ar.head == vo) || (ar.tail == vo && ar.head == vi)
            })
            .collect();
        pair.sort();
        if pair.len() == 2 {
            let a0 = AlgebraElement::arrow(pair[0], &sp.quiver);
            let a1 = AlgebraElement::arrow(pair[1], &sp.quiver);
            endo.images.insert(pair[0], a1);
            endo.images.insert(pair[1], a0);
        }
    }
    let pot = apply_endo(&sp.quiver, &endo, &sp.potential, sp.potential.trunc)
        .map_err(SurfaceError::Algebra)?;
    SpeciesWithPotential::new(sp.quiver.clone(), pot).map_err(SurfaceError::Sp)
}

/// Convenience accessor used by tests and the CLI: the enclosed puncture of
/// a self-folded pair.
pub fn sf_enclosed_puncture(m: &SurfaceMap, folded: &str) -> Result<String, SurfaceError> {
    let fi = m.edge_ix(folded)?;
    let (_, li) = m
        .self_folded_at(fi)
        .ok_or_else(|| SurfaceError::NotSelfFolded(folded.to_string(), "?".to_string()))?;
    let base = m.edges[li].ends[0];
    let ends = m.edges[fi].ends;
    let p = if ends[0] == base { ends[1] } else { ends[0] };
    Ok(m.points[p].id.clone())
}
