//! From a triangulated surface to its weighted quiver, modulating labels and
//! potential.

use std::collections::BTreeMap;

use num_traits::One;

use crate::error::SurfaceError;
use crate::pathalg::{normalize_raw, AlgebraElement};
use crate::scalars::{GaloisElement, Rational};
use crate::sp::{split, SpeciesWithPotential};
use crate::wquiver::{delete_two_cycles, WeightedQuiver};

use super::map::{EdgeIx, EdgeKind, FaceShape, PointIx, SurfaceMap};

/// One arrow of the unreduced quiver, with its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowInfo {
    pub id: String,
    /// tail and head quiver vertices (arcs)
    pub tail: EdgeIx,
    pub head: EdgeIx,
    pub label: GaloisElement,
    /// face and cw-consecutive slot pair that generated the arrow
    pub face: usize,
    pub slot: usize,
    /// marked point at the corner
    pub assoc: PointIx,
    /// the slot arcs (images); tail/head may be folded preimages
    pub slot_tail_arc: EdgeIx,
    pub slot_head_arc: EdgeIx,
}

#[derive(Clone, Debug)]
pub struct UnreducedQuiver {
    pub quiver: WeightedQuiver,
    pub arrows: Vec<ArrowInfo>,
}

/// Arcs `x` with `pi(x) = arc`: the arc itself plus its folded side when the
/// arc is a loop enclosing a self-folded triangle.
fn pi_preimages(m: &SurfaceMap, arc: EdgeIx) -> Vec<EdgeIx> {
    let mut out = vec![arc];
    for f in 0..m.faces.len() {
        if m.faces[f].boundary {
            continue;
        }
        if let FaceShape::SelfFolded { loop_edge, folded } = m.shape(f) {
            if loop_edge == arc {
                out.push(folded);
            }
        }
    }
    out
}

/// Builds the unreduced weighted quiver: arrows drawn clockwise inside every
/// non-self-folded face between the pi-preimages of consecutive slots, with
/// pending-pending adjacencies doubled and labeled identity/theta.
pub fn build_unreduced_quiver(m: &SurfaceMap) -> Result<UnreducedQuiver, SurfaceError> {
    let mut q = WeightedQuiver::new();
    for e in m.arcs() {
        q.add_vertex(&m.edges[e].id, m.arc_weight(e))?;
    }
    let mut arrows = Vec::new();
    for f in 0..m.faces.len() {
        if m.faces[f].boundary {
            continue;
        }
        if matches!(m.shape(f), FaceShape::SelfFolded { .. }) {
            continue;
        }
        let slots = m.slots(f);
        let n = slots.len();
        debug_assert_eq!(n, 3);
        for t in 0..n {
            // slot t+1 directly precedes slot t clockwise
            let (from_arc, _) = slots[(t + 1) % n];
            let (to_arc, _) = slots[t];
            if m.edges[from_arc].kind == EdgeKind::Boundary || m.edges[to_arc].kind == EdgeKind::Boundary
            {
                continue;
            }
            // corner between slot t and slot t+1 = head of slot t's last dart
            let (_, start) = slots[t];
            let w = &m.faces[f].darts;
            let end_dart = if w[start].edge == to_arc
                && start + 1 < w.len()
                && w[start + 1].edge == to_arc
                && m.is_pending(to_arc)
            {
                w[start + 1]
            } else {
                w[start]
            };
            let assoc = m.head(end_dart);
            for (ai, &jj) in pi_preimages(m, from_arc).iter().enumerate() {
                for (bi, &ii) in pi_preimages(m, to_arc).iter().enumerate() {
                    let doubled = m.is_pending(jj) && m.is_pending(ii);
                    let copies = if doubled { 2 } else { 1 };
                    for copy in 0..copies {
                        let mut id = format!("f{f}.{t}");
                        if ai > 0 {
                            id.push('u');
                        }
                        if bi > 0 {
                            id.push('w');
                        }
                        if copy > 0 {
                            id.push('b');
                        }
                        let gcd = if doubled { 2 } else { 1 };
                        let label = GaloisElement::new(copy, gcd.max(1));
                        let label = if doubled { label } else { GaloisElement::identity(1) };
                        q.add_arrow_labeled(&id, &m.edges[jj].id, &m.edges[ii].id, label.clone())?;
                        arrows.push(ArrowInfo {
                            id,
                            tail: jj,
                            head: ii,
                            label,
                            face: f,
                            slot: t,
                            assoc,
                            slot_tail_arc: from_arc,
                            slot_head_arc: to_arc,
                        });
                    }
                }
            }
        }
    }
    Ok(UnreducedQuiver { quiver: q, arrows })
}

/// Projection sending a folded side to its enclosing loop and fixing every
/// other arc.
pub fn pi_tau(m: &SurfaceMap, arc: &str) -> Result<String, SurfaceError> {
    let e = m.edge_ix(arc)?;
    if let Some((_, loop_edge)) = m.self_folded_at(e) {
        Ok(m.edges[loop_edge].id.clone())
    } else {
        Ok(m.edges[e].id.clone())
    }
}

/// Full and weak signatures per puncture.
pub fn signatures(t: &TaggedTriangulation) -> BTreeMap<String, (i64, i64)> {
    let mut out = BTreeMap::new();
    for p in t.map.punctures() {
        out.insert(t.map.points[p].id.clone(), (t.delta(p), t.eps(p)));
    }
    out
}

/// The 2-cycle-free quiver of the triangulation.
pub fn build_quiver(m: &SurfaceMap) -> Result<WeightedQuiver, SurfaceError> {
    Ok(delete_two_cycles(&build_unreduced_quiver(m)?.quiver))
}

// ---------------------------------------------------------------------------
// Potential

/// Tagged triangulation: an ideal triangulation plus a weak-signature sign
/// per puncture (the tagged arcs are recovered by the tagging map).
#[derive(Clone, Debug)]
pub struct TaggedTriangulation {
    pub map: SurfaceMap,
    /// punctures with weak signature -1, by point id
    pub notched: Vec<String>,
}

impl TaggedTriangulation {
    pub fn ideal(map: SurfaceMap) -> Self {
        TaggedTriangulation { map, notched: Vec::new() }
    }

    pub fn eps(&self, p: PointIx) -> i64 {
        if self.notched.contains(&self.map.points[p].id) {
            -1
        } else {
            1
        }
    }

    /// Full signature: 0 at punctures enclosed in a self-folded triangle,
    /// otherwise the weak signature.
    pub fn delta(&self, p: PointIx) -> i64 {
        for f in 0..self.map.faces.len() {
            if self.map.faces[f].boundary {
                continue;
            }
            if let FaceShape::SelfFolded { folded, .. } = self.map.shape(f) {
                let ends = self.map.edges[folded].ends;
                let enclosed = if self.map.rotation(ends[1]).iter().all(|d| d.edge == folded) {
                    ends[1]
                } else {
                    ends[0]
                };
                if enclosed == p {
                    return 0;
                }
            }
        }
        self.eps(p)
    }
}

#[derive(Clone, Debug)]
pub struct ScalarChoice {
    pub x: BTreeMap<String, Rational>,
}

impl ScalarChoice {
    pub fn ones(m: &SurfaceMap) -> Self {
        let mut x = BTreeMap::new();
        for p in m.punctures() {
            x.insert(m.points[p].id.clone(), Rational::one());
        }
        ScalarChoice { x }
    }

    pub fn get(&self, m: &SurfaceMap, p: PointIx) -> Result<Rational, SurfaceError> {
        use num_traits::Zero;
        let id = &m.points[p].id;
        let v = self.x.get(id).cloned().unwrap_or_else(Rational::one);
        if v.is_zero() {
            return Err(SurfaceError::ZeroScalar(id.clone()));
        }
        Ok(v)
    }

    /// Sign-flips the scalar at one puncture.
    pub fn flipped_at(&self, id: &str) -> Self {
        let mut x = self.x.clone();
        let cur = x.get(id).cloned().unwrap_or_else(Rational::one);
        x.insert(id.to_string(), -cur);
        ScalarChoice { x }
    }
}

struct PotentialBuilder<'a> {
    m: &'a SurfaceMap,
    uq: &'a UnreducedQuiver,
    out: AlgebraElement,
}

impl<'a> PotentialBuilder<'a> {
    /// The arrow generated in `face` at slot `t` from `tail` to `head`
    /// (pi-preimage choices included), with the requested label residue.
    fn arrow(&self, face: usize, slot: usize, tail: EdgeIx, head: EdgeIx, residue: u64) -> Option<usize> {
        self.uq
            .arrows
            .iter()
            .position(|a| a.face == face && a.slot == slot && a.tail == tail && a.head == head && a.label.residue == residue)
    }

    /// Adds `coeff` times the 3-cycle through the given arrows, with optional
    /// extra v-power at the slot whose vertex is `v_at`.
    fn add_cycle(&mut self, coeff: Rational, arrow_ids: &[usize], v_at: Option<EdgeIx>) {
        // build word in composition order: find an ordering a1..al with
        // h(a_{r+1}) = t(a_r)
        let q = &self.uq.quiver;
        let ids: Vec<usize> = arrow_ids.to_vec();
        let mut order = vec![ids[0]];
        let mut used = vec![false; ids.len()];
        used[0] = true;
        while order.len() < ids.len() {
            let last = *order.last().unwrap();
            let tail_v = q.arrows[self.qa(last)].tail;
            let next = ids
                .iter()
                .enumerate()
                .find(|(i, &a)| !used[*i] && q.arrows[self.qa(a)].head == tail_v)
                .map(|(i, &a)| (i, a))
                .expect("cycle arrows compose");
            used[next.0] = true;
            order.push(next.1);
        }
        let arrows: Vec<usize> = order.iter().map(|&a| self.qa(a)).collect();
        let mut vpow = vec![0u32; arrows.len() + 1];
        if let Some(target_arc) = v_at {
            let target_vertex = q.vertex_ix(&self.m.edges[target_arc].id).expect("arc vertex");
            let path = crate::pathalg::Path { arrows: arrows.clone(), vbits: 0, base: 0 };
            let slot = (0..=arrows.len())
                .find(|&s| path.slot_vertex(q, s) == target_vertex)
                .expect("cycle passes the pending vertex");
            vpow[slot] = 1;
        }
        let (s, p) = normalize_raw(q, &arrows, &vpow, 0).expect("cycle composes");
        self.out.insert(coeff * s, p);
    }

    fn qa(&self, info_ix: usize) -> usize {
        self.uq
            .quiver
            .arrow_ix(&self.uq.arrows[info_ix].id)
            .expect("arrow registered")
    }
}

/// The unreduced potential of a tagged triangulation.
pub fn build_unreduced_potential(
    tagged: &TaggedTriangulation,
    x: &ScalarChoice,
    uq: &UnreducedQuiver,
    trunc: Option<usize>,
) -> Result<AlgebraElement, SurfaceError> {
    let m = &tagged.map;
    let mut b = PotentialBuilder { m, uq, out: AlgebraElement::zero_trunc(trunc) };

    let interior = |f: usize| -> bool {
        !m.faces[f].boundary
            && m.faces[f].darts.iter().all(|d| m.edges[d.edge].kind == EdgeKind::Arc)
    };

    for f in 0..m.faces.len() {
        if m.faces[f].boundary || matches!(m.shape(f), FaceShape::SelfFolded { .. }) {
            continue;
        }
        if !interior(f) {
            continue;
        }
        let slots = m.slots(f);
        let direct: Vec<Option<usize>> = (0..3)
            .map(|t| b.arrow(f, t, slots[(t + 1) % 3].0, slots[t].0, 0))
            .collect();
        match m.shape(f) {
            FaceShape::Plain => {
                let arrows: Vec<usize> = direct.iter().map(|a| a.unwrap()).collect();
                // triangle cycle
                b.add_cycle(Rational::one(), &arrows, None);
                // adjacency corrections for self-folded neighbors
                let sf_slots: Vec<usize> =
                    (0..3).filter(|&t| is_loop_of_sf(m, slots[t].0)).collect();
                if sf_slots.len() == 2 {
                    let mut coeff = Rational::one();
                    let mut arrows2 = Vec::new();
                    for t in 0..3 {
                        let from = slots[(t + 1) % 3].0;
                        let to = slots[t].0;
                        let from2 = folded_or_self(m, from);
                        let to2 = folded_or_self(m, to);
                        arrows2.push(b.arrow(f, t, from2, to2, 0).expect("folded copy"));
                    }
                    for &t in &sf_slots {
                        let p = enclosed_puncture(m, slots[t].0).expect("sf puncture");
                        coeff = coeff / x.get(m, p)?;
                    }
                    b.add_cycle(coeff, &arrows2, None);
                }
            }
            FaceShape::OrbDigon { pending } => {
                let arrows: Vec<usize> = direct.iter().map(|a| a.unwrap()).collect();
                b.add_cycle(Rational::one(), &arrows, None);
                b.add_cycle(-Rational::one(), &arrows, Some(pending));
                // orbifold triangle adjacent to a self-folded triangle
                let sf_slots: Vec<usize> =
                    (0..3).filter(|&t| is_loop_of_sf(m, slots[t].0)).collect();
                if sf_slots.len() == 1 {
                    let t0 = sf_slots[0];
                    let p = enclosed_puncture(m, slots[t0].0).expect("sf puncture");
                    let coeff = Rational::one() / x.get(m, p)?;
                    let mut arrows2 = Vec::new();
                    for t in 0..3 {
                        let from = folded_or_self(m, slots[(t + 1) % 3].0);
                        let to = folded_or_self(m, slots[t].0);
                        arrows2.push(b.arrow(f, t, from, to, 0).expect("folded copy"));
                    }
                    b.add_cycle(coeff, &arrows2, Some(pending));
                }
            }
            FaceShape::OrbMonogon { pendings } => {
                // identity-labeled cycle with -2 v, theta-labeled with +2
                let [p1, p2] = pendings;
                let (pa, pb) = arrow_between_pendings(m, uq, f, p1, p2);
                let closing: Vec<usize> = (0..3)
                    .filter_map(|t| {
                        let from = m.slots(f)[(t + 1) % 3].0;
                        let to = m.slots(f)[t].0;
                        if m.is_pending(from) && m.is_pending(to) {
                            None
                        } else {
                            b.arrow(f, t, from, to, 0)
                        }
                    })
                    .collect();
                let head_arc = uq.arrows[pa].head;
                let mut id_cycle = closing.clone();
                id_cycle.push(pa);
                b.add_cycle(-Rational::from_integer(2.into()), &id_cycle, Some(head_arc));
                let mut th_cycle = closing;
                th_cycle.push(pb);
                b.add_cycle(Rational::from_integer(2.into()), &th_cycle, None);
            }
            FaceShape::SelfFolded { .. } => unreachable!(),
        }
    }

    // puncture cycles
    for p in m.punctures() {
        let sign = Rational::from_integer(tagged.eps(p).into());
        if let Some((folded, loop_edge)) = puncture_in_sf(m, p) {
            // valence-1 puncture: the neighbor face cycle through the folded
            // copies, when interior
            let other = other_face_of(m, loop_edge, folded);
            let Some(of) = other else { continue };
            if !interior(of) {
                continue;
            }
            let slots = m.slots(of);
            let mut arrows = Vec::new();
            for t in 0..3 {
                let from = slots[(t + 1) % 3].0;
                let to = slots[t].0;
                let from2 = if from == loop_edge { folded } else { from };
                let to2 = if to == loop_edge { folded } else { to };
                arrows.push(
                    b.arrow(of, t, from2, to2, 0)
                        .expect("folded copy arrow for the puncture cycle"),
                );
            }
            let coeff = -sign / x.get(m, p)?;
            b.add_cycle(coeff, &arrows, None);
            continue;
        }
        // general puncture cycle via the rotation, skipping loops that
        // enclose self-folded triangles; each factor sums the arrows at the
        // corners traversed between consecutive kept crossings
        let rot = m.rotation(p);
        let sf = m.sf_loops();
        let kept: Vec<usize> = (0..rot.len()).filter(|&t| !sf.contains(&rot[t].edge)).collect();
        if kept.len() < 2 {
            continue;
        }
        let l = kept.len();
        let n = rot.len();
        let mut factors: Vec<AlgebraElement> = Vec::new();
        let mut ok = true;
        for s in 0..l {
            let start = kept[(s + l - 1) % l];
            let end = kept[s];
            let from_arc = rot[start].edge;
            let to_arc = rot[end].edge;
            let mut lambda = AlgebraElement::zero_trunc(trunc);
            // wedges from `start` towards `end`
            let mut t = start;
            loop {
                let next = (t + 1) % n;
                // corner between rot[t] and rot[next] in the face of rot[t]
                let f = m.face_of(rot[t]);
                if let Some(f) = f {
                    if !m.faces[f].boundary && !matches!(m.shape(f), FaceShape::SelfFolded { .. })
                    {
                        let prev_dart = rot[next].rev();
                        if let Some(pos) = m.faces[f].darts.iter().position(|&d| d == prev_dart) {
                            let slots = m.slots(f);
                            let slot = slots
                                .iter()
                                .enumerate()
                                .rev()
                                .find(|(_, (_, st))| *st <= pos)
                                .map(|(i, _)| i)
                                .unwrap_or(0);
                            for (ix, info) in uq.arrows.iter().enumerate() {
                                if info.face == f
                                    && info.slot == slot
                                    && info.tail == from_arc
                                    && info.head == to_arc
                                {
                                    let a = b.qa(ix);
                                    lambda = lambda.add(&AlgebraElement::arrow(a, &uq.quiver));
                                }
                            }
                        }
                    }
                }
                if next == end {
                    break;
                }
                t = next;
            }
            if lambda.is_zero() {
                ok = false;
                break;
            }
            factors.push(lambda);
        }
        if !ok {
            continue;
        }
        // x_p * Lambda_l ... Lambda_1
        let mut prod = factors[l - 1].clone();
        for s in (0..l - 1).rev() {
            prod = crate::pathalg::mul(&uq.quiver, &prod, &factors[s]).map_err(SurfaceError::Algebra)?;
        }
        let coeff = sign * x.get(m, p)?;
        b.out = b.out.add(&prod.scale(&coeff));
    }

    Ok(b.out)
}

fn is_loop_of_sf(m: &SurfaceMap, arc: EdgeIx) -> bool {
    m.sf_loops().contains(&arc)
}

fn folded_or_self(m: &SurfaceMap, arc: EdgeIx) -> EdgeIx {
    for f in 0..m.faces.len() {
        if m.faces[f].boundary {
            continue;
        }
        if let FaceShape::SelfFolded { loop_edge, folded } = m.shape(f) {
            if loop_edge == arc {
                return folded;
            }
        }
    }
    arc
}

fn enclosed_puncture(m: &SurfaceMap, loop_edge: EdgeIx) -> Option<PointIx> {
    for f in 0..m.faces.len() {
        if m.faces[f].boundary {
            continue;
        }
        if let FaceShape::SelfFolded { loop_edge: le, folded } = m.shape(f) {
            if le == loop_edge {
                let ends = m.edges[folded].ends;
                let base = m.edges[le].ends[0];
                return Some(if ends[0] == base { ends[1] } else { ends[0] });
            }
        }
    }
    None
}

/// If `p` sits inside a self-folded triangle, returns (folded side, loop).
fn puncture_in_sf(m: &SurfaceMap, p: PointIx) -> Option<(EdgeIx, EdgeIx)> {
    for f in 0..m.faces.len() {
        if m.faces[f].boundary {
            continue;
        }
        if let FaceShape::SelfFolded { loop_edge, folded } = m.shape(f) {
            if enclosed_puncture(m, loop_edge) == Some(p) {
                return Some((folded, loop_edge));
            }
        }
    }
    None
}

/// The non-self-folded face containing the loop edge.
fn other_face_of(m: &SurfaceMap, loop_edge: EdgeIx, folded: EdgeIx) -> Option<usize> {
    let _ = folded;
    (0..m.faces.len()).find(|&f| {
        !m.faces[f].boundary
            && !matches!(m.shape(f), FaceShape::SelfFolded { .. })
            && m.faces[f].darts.iter().any(|d| d.edge == loop_edge)
    })
}

/// The two pending-pending arrows of an orbifold monogon: (identity copy,
/// theta copy).
fn arrow_between_pendings(
    m: &SurfaceMap,
    uq: &UnreducedQuiver,
    f: usize,
    p1: EdgeIx,
    p2: EdgeIx,
) -> (usize, usize) {
    let _ = m;
    let mut id_copy = None;
    let mut th_copy = None;
    for (ix, a) in uq.arrows.iter().enumerate() {
        if a.face == f
            && ((a.tail == p1 && a.head == p2) || (a.tail == p2 && a.head == p1))
        {
            if a.label.is_identity() {
                id_copy = Some(ix);
            } else {
                th_copy = Some(ix);
            }
        }
    }
    (id_copy.expect("identity pending arrow"), th_copy.expect("theta pending arrow"))
}

/// The species with potential of a tagged triangulation: builds the
/// unreduced pair and takes its reduced part.
pub fn build_sp(
    tagged: &TaggedTriangulation,
    x: &ScalarChoice,
    trunc: Option<usize>,
) -> Result<SpeciesWithPotential, SurfaceError> {
    let uq = build_unreduced_quiver(&tagged.map)?;
    let pot = build_unreduced_potential(tagged, x, &uq, trunc)?;
    let sp = SpeciesWithPotential::new(uq.quiver.clone(), pot).map_err(SurfaceError::Sp)?;
    let result = split(&sp).map_err(SurfaceError::Sp)?;
    Ok(result.reduced)
}
