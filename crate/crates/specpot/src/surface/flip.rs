//! Flips of tagged triangulations: a local re-triangulation engine with
//! handlers for the quadrilateral moves (including orbifold digons and
//! monogons on either side), the pending-arc moves, the self-folded-loop
//! move, and the tagged move at folded sides.

use crate::error::SurfaceError;

use super::build::TaggedTriangulation;
use super::map::{unwrap_blocks, Dart, EdgeIx, FaceShape, SurfaceMap};

/// Result of a flip: the new triangulation plus the puncture (if any) whose
/// scalar changes sign under the flip.
#[derive(Clone, Debug)]
pub struct FlipOutcome {
    pub tagged: TaggedTriangulation,
    pub sign_flip_at: Option<String>,
}

/// Rotates a face walk so the dart at position `pos` comes first.
fn rotated(m: &SurfaceMap, f: usize, pos: usize) -> Vec<Dart> {
    let mut w = m.faces[f].darts.clone();
    w.rotate_left(pos);
    w
}

fn find_dart(m: &SurfaceMap, d: Dart) -> Option<(usize, usize)> {
    for f in 0..m.faces.len() {
        if let Some(p) = m.faces[f].darts.iter().position(|&x| x == d) {
            return Some((f, p));
        }
    }
    None
}

pub fn flip(tagged: &TaggedTriangulation, arc: &str) -> Result<FlipOutcome, SurfaceError> {
    let m = &tagged.map;
    let k = m.edge_ix(arc)?;

    if m.is_pending(k) {
        return flip_pending(tagged, k);
    }
    if let Some((_, loop_edge)) = m.self_folded_at(k) {
        return flip_folded(tagged, k, loop_edge);
    }
    if m.sf_loops().contains(&k) {
        return flip_sf_loop(tagged, k);
    }
    // a radius of a valence-2 puncture flips to the enclosing loop
    if let Some((p, other)) = radius_partner(m, k) {
        return flip_radius(tagged, k, other, p);
    }
    flip_quad(tagged, k)
}

/// If `k` runs to a puncture of ideal valence 2 whose other incident arc is
/// a different non-loop arc, returns (puncture, other arc).
fn radius_partner(m: &SurfaceMap, k: EdgeIx) -> Option<(usize, EdgeIx)> {
    for &p in m.edges[k].ends.iter() {
        if !m.punctures().contains(&p) {
            continue;
        }
        let rot = m.rotation(p);
        if rot.len() != 2 {
            continue;
        }
        let arcs: Vec<EdgeIx> = rot.iter().map(|d| d.edge).collect();
        if !arcs.contains(&k) {
            continue;
        }
        let other = if arcs[0] == k { arcs[1] } else { arcs[0] };
        if other == k {
            continue; // a loop through p
        }
        let oe = &m.edges[other];
        if oe.ends[0] == oe.ends[1] {
            continue;
        }
        return Some((p, other));
    }
    None
}

/// Flip of one radius of a once-punctured digon: the result is the loop
/// around the puncture with the other radius folded inside. Inverse of the
/// self-folded-loop move, including the tag bookkeeping.
fn flip_radius(
    tagged: &TaggedTriangulation,
    x: EdgeIx,
    y: EdgeIx,
    p: usize,
) -> Result<FlipOutcome, SurfaceError> {
    let m = &tagged.map;
    let (f1, p1) = find_dart(m, Dart::pos(x))
        .ok_or_else(|| SurfaceError::NotFlippable(m.edges[x].id.clone(), "dart unmatched".into()))?;
    let (f2, p2) = find_dart(m, Dart::neg(x))
        .ok_or_else(|| SurfaceError::NotFlippable(m.edges[x].id.clone(), "dart unmatched".into()))?;
    if f1 == f2 || m.faces[f1].boundary || m.faces[f2].boundary {
        return Err(SurfaceError::NotFlippable(m.edges[x].id.clone(), "degenerate digon".into()));
    }
    // base of the loop: the non-puncture end of the other radius
    let yends = m.edges[y].ends;
    let base = if yends[0] == p { yends[1] } else { yends[0] };
    let (yp, ym) = if m.edges[y].ends[0] == base {
        (Dart::pos(y), Dart::neg(y))
    } else {
        (Dart::neg(y), Dart::pos(y))
    };
    let mut out = m.clone();
    let w1 = rotated(m, f1, p1); // [x+, ...]
    let w2 = rotated(m, f2, p2); // [x-, ...]
    let shape1 = m.shape(f1);
    let shape2 = m.shape(f2);
    let orb_first = matches!(shape1, FaceShape::OrbDigon { .. });
    let extra = |w: &[Dart]| -> Vec<Dart> {
        w.iter().skip(1).filter(|d| d.edge != y).copied().collect()
    };
    match (shape1, shape2) {
        (FaceShape::Plain, FaceShape::Plain) => {
            let e1 = extra(&w1);
            let e2 = extra(&w2);
            if e1.len() != 1 || e2.len() != 1 {
                return Err(SurfaceError::NotFlippable(
                    m.edges[x].id.clone(),
                    "unexpected digon shape".into(),
                ));
            }
            out.edges[x].ends = [base, base];
            out.faces[f1].darts = vec![Dart::pos(x), yp, ym];
            out.faces[f2].darts = vec![Dart::neg(x), e1[0], e2[0]];
        }
        (FaceShape::OrbDigon { .. }, FaceShape::Plain)
        | (FaceShape::Plain, FaceShape::OrbDigon { .. }) => {
            let (worb, wpl) = if orb_first { (&w1, &w2) } else { (&w2, &w1) };
            let (forb, fpl) = if orb_first { (f1, f2) } else { (f2, f1) };
            // orbifold digon: [x^, ..] contains the pending block and y-dart
            let pend: Vec<Dart> = worb
                .iter()
                .skip(1)
                .filter(|d| m.is_pending(d.edge))
                .copied()
                .collect();
            let epl = extra(wpl);
            if pend.len() != 2 || epl.len() != 1 {
                return Err(SurfaceError::NotFlippable(
                    m.edges[x].id.clone(),
                    "unexpected orbifold digon shape".into(),
                ));
            }
            out.edges[x].ends = [base, base];
            let orb_dart = if forb == f1 { Dart::neg(x) } else { Dart::pos(x) };
            let mut digon = vec![epl[0], orb_dart];
            digon.extend(pend);
            out.faces[fpl].darts = unwrap_blocks(&out, digon);
            out.faces[forb].darts = vec![orb_dart.rev(), yp, ym];
        }
        (s1, s2) => {
            return Err(SurfaceError::NotFlippable(
                m.edges[x].id.clone(),
                format!("radius flip between {s1:?} and {s2:?}"),
            ))
        }
    }
    out.validate()?;
    let mut notched = tagged.notched.clone();
    let pid = m.points[p].id.clone();
    let mut map = out;
    if let Some(ix) = notched.iter().position(|n| *n == pid) {
        // all-notched digon: the flip returns to the plain radius picture
        notched.remove(ix);
        // the surviving tagged arc keeps its identity: swap the arc ids so
        // the loop carries the partner's vertex id
        map.edges.swap(x, y);
        let tmp = map.edges[x].id.clone();
        map.edges[x].id = map.edges[y].id.clone();
        map.edges[y].id = tmp;
        for f in map.faces.iter_mut() {
            for d in f.darts.iter_mut() {
                if d.edge == x {
                    d.edge = y;
                } else if d.edge == y {
                    d.edge = x;
                }
            }
        }
        map.validate()?;
    }
    Ok(FlipOutcome {
        tagged: TaggedTriangulation { map, notched },
        sign_flip_at: None,
    })
}

/// Pending arc: rebase inside its digon, or swap the block order inside its
/// monogon. The scalar sign flips at the marked point of the flipped arc.
fn flip_pending(tagged: &TaggedTriangulation, k: EdgeIx) -> Result<FlipOutcome, SurfaceError> {
    let m = &tagged.map;
    let (f, pos) = find_dart(m, Dart::pos(k))
        .ok_or_else(|| SurfaceError::NotFlippable(m.edges[k].id.clone(), "pending arc without face".into()))?;
    let mut out = m.clone();
    match m.shape(f) {
        FaceShape::OrbDigon { .. } => {
            // walk rotated to [P+, P-, s_next, s_prev]
            let w = rotated(m, f, pos);
            let (pp, pm, s1, s2) = (w[0], w[1], w[2], w[3]);
            // new base: the corner between s1 and s2
            let new_base = m.head(s1);
            out.edges[k].ends = [new_base, m.edges[k].ends[1]];
            out.faces[f].darts = unwrap_blocks(&out, vec![s1, pp, pm, s2]);
            out.validate()?;
            let p_id = out.points[new_base].id.clone();
            let sign = out.punctures().iter().any(|&p| out.points[p].id == p_id).then_some(p_id);
            Ok(FlipOutcome { tagged: TaggedTriangulation { map: out, notched: tagged.notched.clone() }, sign_flip_at: sign })
        }
        FaceShape::OrbMonogon { .. } => {
            // [L, P1+, P1-, P2+, P2-]: exchanging the blocks flips either arc
            let w = &m.faces[f].darts;
            let l = w[0];
            let (b1, b2) = (vec![w[1], w[2]], vec![w[3], w[4]]);
            let mut darts = vec![l];
            darts.extend(b2);
            darts.extend(b1);
            out.faces[f].darts = darts;
            out.validate()?;
            let base = m.tail(w[1]);
            let p_id = out.points[base].id.clone();
            let sign = out.punctures().iter().any(|&p| out.points[p].id == p_id).then_some(p_id);
            Ok(FlipOutcome { tagged: TaggedTriangulation { map: out, notched: tagged.notched.clone() }, sign_flip_at: sign })
        }
        other => Err(SurfaceError::NotFlippable(
            m.edges[k].id.clone(),
            format!("pending arc in unexpected face shape {other:?}"),
        )),
    }
}

/// Folded side: flip the enclosing loop ideally, swap the two arc ids so
/// unchanged tagged arcs keep their vertex id, and toggle the weak signature
/// at the enclosed puncture.
fn flip_folded(
    tagged: &TaggedTriangulation,
    folded: EdgeIx,
    loop_edge: EdgeIx,
) -> Result<FlipOutcome, SurfaceError> {
    let m = &tagged.map;
    let base = m.edges[loop_edge].ends[0];
    let ends = m.edges[folded].ends;
    let p = if ends[0] == base && ends[1] != base { ends[1] } else if ends[1] == base { ends[0] } else { ends[1] };
    let inner = flip_sf_loop(tagged, loop_edge)?;
    let mut map = inner.tagged.map;
    let (fi, li) = (folded, loop_edge);
    map.edges.swap(fi, li);
    // ends/kind travel with the swap; only the ids must swap back
    let tmp = map.edges[fi].id.clone();
    map.edges[fi].id = map.edges[li].id.clone();
    map.edges[li].id = tmp;
    // darts referencing the two edges swap as well
    for f in map.faces.iter_mut() {
        for d in f.darts.iter_mut() {
            if d.edge == fi {
                d.edge = li;
            } else if d.edge == li {
                d.edge = fi;
            }
        }
    }
    map.validate()?;
    let mut notched = tagged.notched.clone();
    let pid = map.points[p].id.clone();
    if let Some(ix) = notched.iter().position(|x| *x == pid) {
        notched.remove(ix);
    } else {
        notched.push(pid);
    }
    Ok(FlipOutcome { tagged: TaggedTriangulation { map, notched }, sign_flip_at: None })
}

/// Loop of a self-folded triangle: the classic punctured-digon move, with a
/// plain or orbifold-digon neighbor.
fn flip_sf_loop(tagged: &TaggedTriangulation, k: EdgeIx) -> Result<FlipOutcome, SurfaceError> {
    let m = &tagged.map;
    let (sf_face, _) = (0..m.faces.len())
        .find_map(|f| match m.shape_checked(f) {
            Some(FaceShape::SelfFolded { loop_edge, folded }) if loop_edge == k => Some((f, folded)),
            _ => None,
        })
        .ok_or_else(|| SurfaceError::NotFlippable(m.edges[k].id.clone(), "no self-folded face".into()))?;
    let folded = match m.shape(sf_face) {
        FaceShape::SelfFolded { folded, .. } => folded,
        _ => unreachable!(),
    };
    let sf_walk = m.faces[sf_face].darts.clone();
    let kdart_in_sf = sf_walk.iter().find(|d| d.edge == k).copied().unwrap();
    let other_dart = kdart_in_sf.rev();
    let (of, opos) = find_dart(m, other_dart)
        .ok_or_else(|| SurfaceError::NotFlippable(m.edges[k].id.clone(), "loop dart unmatched".into()))?;
    if m.faces[of].boundary {
        return Err(SurfaceError::NotFlippable(m.edges[k].id.clone(), "loop on the boundary".into()));
    }
    // puncture inside the monogon
    let base = m.tail(kdart_in_sf);
    let fends = m.edges[folded].ends;
    let p = if fends[0] == base { fends[1] } else { fends[0] };
    // orientation of the folded side: w as tail at the base
    let (wp, wm) = if m.edges[folded].ends[0] == base {
        (Dart::pos(folded), Dart::neg(folded))
    } else {
        (Dart::neg(folded), Dart::pos(folded))
    };

    let mut out = m.clone();
    match m.shape(of) {
        FaceShape::Plain => {
            let w = rotated(m, of, opos);
            let (c, d) = (w[1], w[2]);
            let cpoint = m.head(c);
            // new arc from the off corner to the puncture
            out.edges[k].ends = [cpoint, p];
            let kp = Dart::pos(k);
            let km = Dart::neg(k);
            out.faces[sf_face].darts = vec![c, kp, wm];
            out.faces[of].darts = vec![d, wp, km];
        }
        FaceShape::OrbDigon { pending } => {
            let w = rotated(m, of, opos);
            // shapes: [k, e, P, P-] or [k, P, P-, e]
            let (e, pblock) = if w[1].edge == pending {
                (w[3], vec![w[1], w[2]])
            } else {
                (w[1], vec![w[2], w[3]])
            };
            out.edges[k].ends = [base, p];
            let kp = Dart::pos(k);
            let km = Dart::neg(k);
            // orbifold digon between the folded side and the new arc, pending
            // based at the original corner; outer plain face with e
            let mut digon = vec![wp, km];
            digon.extend(pblock);
            out.faces[sf_face].darts = unwrap_blocks(&out, digon);
            out.faces[of].darts = vec![e, kp, wm];
        }
        other => {
            return Err(SurfaceError::NotFlippable(
                m.edges[k].id.clone(),
                format!("loop adjacent to unsupported face {other:?}"),
            ))
        }
    }
    out.validate()?;
    Ok(FlipOutcome {
        tagged: TaggedTriangulation { map: out, notched: tagged.notched.clone() },
        sign_flip_at: None,
    })
}

/// Ordinary arc between two distinct faces: quadrilateral move with plain or
/// orbifold faces on the two sides.
fn flip_quad(tagged: &TaggedTriangulation, k: EdgeIx) -> Result<FlipOutcome, SurfaceError> {
    let m = &tagged.map;
    let (f1, p1) = find_dart(m, Dart::pos(k))
        .ok_or_else(|| SurfaceError::NotFlippable(m.edges[k].id.clone(), "dart unmatched".into()))?;
    let (f2, p2) = find_dart(m, Dart::neg(k))
        .ok_or_else(|| SurfaceError::NotFlippable(m.edges[k].id.clone(), "dart unmatched".into()))?;
    if m.faces[f1].boundary || m.faces[f2].boundary {
        return Err(SurfaceError::NotFlippable(m.edges[k].id.clone(), "boundary arc".into()));
    }
    if f1 == f2 {
        return Err(SurfaceError::NotFlippable(
            m.edges[k].id.clone(),
            "both sides in one face".into(),
        ));
    }
    let w1 = rotated(m, f1, p1);
    let w2 = rotated(m, f2, p2);
    let mut out = m.clone();
    let kp = Dart::pos(k);
    let km = Dart::neg(k);
    match (m.shape(f1), m.shape(f2)) {
        (FaceShape::Plain, FaceShape::Plain) => {
            let (a, b) = (w1[1], w1[2]);
            let (c, d) = (w2[1], w2[2]);
            out.edges[k].ends = [m.head(a), m.head(c)];
            out.faces[f1].darts = vec![kp, d, a];
            out.faces[f2].darts = vec![km, b, c];
        }
        (FaceShape::OrbDigon { pending }, FaceShape::Plain) => {
            flip_orbdigon_plain(&mut out, k, &w1, &w2, pending, f1, f2)?;
        }
        (FaceShape::Plain, FaceShape::OrbDigon { pending }) => {
            let w1r = rotated(m, f2, p2);
            let w2r = rotated(m, f1, p1);
            flip_orbdigon_plain(&mut out, k, &w1r, &w2r, pending, f2, f1)?;
        }
        (FaceShape::OrbDigon { pending: pe1 }, FaceShape::OrbDigon { pending: pe2 }) => {
            // both pendings must sit at a common corner of k
            let (e, b1) = split_digon(&w1, pe1);
            let (f_, b2) = split_digon(&w2, pe2);
            let base1 = out.tail(b1[0]);
            let base2 = out.tail(b2[0]);
            if base1 != base2 {
                return Err(SurfaceError::NotFlippable(
                    m.edges[k].id.clone(),
                    "orbifold digons with different pending corners".into(),
                ));
            }
            // new loop at the shared base enclosing both orbifold points
            out.edges[k].ends = [base1, base1];
            let mut monogon = vec![kp];
            monogon.extend(b2.clone());
            monogon.extend(b1.clone());
            out.faces[f1].darts = unwrap_blocks(&out, monogon);
            out.faces[f2].darts = vec![km, e, f_];
        }
        (FaceShape::OrbMonogon { .. }, FaceShape::Plain)
        | (FaceShape::Plain, FaceShape::OrbMonogon { .. }) => {
            let (mf, pf, wm_, wp_) = if matches!(m.shape(f1), FaceShape::OrbMonogon { .. }) {
                (f1, f2, w1, w2)
            } else {
                (f2, f1, w2, w1)
            };
            // monogon walk: [k-loop, P1+, P1-, P2+, P2-]; plain: [k^, c, d]
            let b1 = vec![wm_[1], wm_[2]];
            let b2 = vec![wm_[3], wm_[4]];
            let (c, d) = (wp_[1], wp_[2]);
            let a_corner = out.tail(b1[0]);
            let c_corner = out.head(c);
            out.edges[k].ends = [a_corner, c_corner];
            let kp2 = Dart::pos(k);
            let km2 = Dart::neg(k);
            // two orbifold digons: (c, k') with the first block, (k', d) with
            // the second
            let mut d1 = vec![c, km2];
            d1.extend(b1);
            let mut d2 = vec![kp2, d];
            d2.extend(b2);
            out.faces[mf].darts = unwrap_blocks(&out, d1);
            out.faces[pf].darts = unwrap_blocks(&out, d2);
        }
        (s1, s2) => {
            return Err(SurfaceError::NotFlippable(
                m.edges[k].id.clone(),
                format!("unsupported face pair {s1:?} / {s2:?}"),
            ))
        }
    }
    for f in [f1, f2] {
        out.faces[f].darts = unwrap_blocks(&out, out.faces[f].darts.clone());
    }
    out.validate()?;
    Ok(FlipOutcome {
        tagged: TaggedTriangulation { map: out, notched: tagged.notched.clone() },
        sign_flip_at: None,
    })
}

/// Orbifold digon `w1 = [k^, ...]` against plain `w2 = [k^rev, c, d]`.
fn flip_orbdigon_plain(
    out: &mut SurfaceMap,
    k: EdgeIx,
    w1: &[Dart],
    w2: &[Dart],
    pending: EdgeIx,
    f1: usize,
    f2: usize,
) -> Result<(), SurfaceError> {
    let (e, pblock) = split_digon(w1, pending);
    let (c, d) = (w2[1], w2[2]);
    let base = out.tail(pblock[0]);
    // the new digon pairs the flipped arc with the plain side incident to the
    // pending base
    let (kp, km) = (Dart::pos(k), Dart::neg(k));
    if out.tail(c) == base {
        // digon (c, k'): k' from head(c) back to base
        out.edges[k].ends = [base, out.head(c)];
        let mut digon = vec![c, km];
        digon.extend(pblock);
        out.faces[f1].darts = unwrap_blocks(out, digon);
        out.faces[f2].darts = vec![kp, d, e];
    } else if out.head(d) == base {
        // digon (d, k'): k' from base to tail(d)
        out.edges[k].ends = [base, out.tail(d)];
        let mut digon = vec![d];
        digon.extend(pblock.clone());
        digon.push(kp);
        out.faces[f1].darts = unwrap_blocks(out, digon);
        out.faces[f2].darts = vec![km, e, c];
    } else {
        return Err(SurfaceError::NotFlippable(
            out.edges[k].id.clone(),
            "pending base not on the neighbor face".into(),
        ));
    }
    Ok(())
}

/// Splits an orbifold-digon walk `[k^, ...]` into the non-k side dart and
/// the pending block.
fn split_digon(w: &[Dart], pending: EdgeIx) -> (Dart, Vec<Dart>) {
    if w[1].edge == pending {
        (w[3], vec![w[1], w[2]])
    } else {
        (w[1], vec![w[2], w[3]])
    }
}

impl SurfaceMap {
    fn shape_checked(&self, f: usize) -> Option<FaceShape> {
        if self.faces[f].boundary {
            None
        } else {
            Some(self.shape(f))
        }
    }
}
