//! Dart-based combinatorial map for triangulated surfaces with marked points
//! and order-2 orbifold points.
//!
//! Interior faces are stored as counter-clockwise dart walks (face on the
//! left). Walk shapes encode the triangle kinds:
//!
//! * length 3, distinct edges — plain triangle;
//! * length 3 with a repeated edge — self-folded triangle `[loop, i+, i-]`;
//! * length 4 — orbifold digon `[.., P+, P-]` with one pending block;
//! * length 5 — orbifold monogon `[L, P1+, P1-, P2+, P2-]`.
//!
//! Boundary components are stored as explicit walks so vertex rotations close
//! up everywhere.

use std::collections::BTreeMap;

use crate::error::SurfaceError;

pub type PointIx = usize;
pub type EdgeIx = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    Marked,
    Orbifold,
}

#[derive(Clone, Debug)]
pub struct Point {
    pub id: String,
    pub kind: PointKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Arc,
    Boundary,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub id: String,
    /// tail, head of the positive dart
    pub ends: [PointIx; 2],
    pub kind: EdgeKind,
}

/// Directed edge: `flip = false` runs ends[0] -> ends[1].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dart {
    pub edge: EdgeIx,
    pub flip: bool,
}

impl Dart {
    pub fn pos(edge: EdgeIx) -> Self {
        Dart { edge, flip: false }
    }
    pub fn neg(edge: EdgeIx) -> Self {
        Dart { edge, flip: true }
    }
    pub fn rev(self) -> Self {
        Dart { edge: self.edge, flip: !self.flip }
    }
}

#[derive(Clone, Debug)]
pub struct Face {
    pub darts: Vec<Dart>,
    pub boundary: bool,
}

#[derive(Clone, Debug)]
pub struct SurfaceMap {
    pub points: Vec<Point>,
    pub edges: Vec<Edge>,
    pub faces: Vec<Face>,
}

/// Shape classification of an interior face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaceShape {
    Plain,
    /// (loop edge, folded edge)
    SelfFolded { loop_edge: EdgeIx, folded: EdgeIx },
    /// (side slots in walk order, pending edge)
    OrbDigon { pending: EdgeIx },
    /// (loop slot, first pending, second pending)
    OrbMonogon { pendings: [EdgeIx; 2] },
}

impl SurfaceMap {
    pub fn tail(&self, d: Dart) -> PointIx {
        let e = &self.edges[d.edge];
        if d.flip {
            e.ends[1]
        } else {
            e.ends[0]
        }
    }

    pub fn head(&self, d: Dart) -> PointIx {
        let e = &self.edges[d.edge];
        if d.flip {
            e.ends[0]
        } else {
            e.ends[1]
        }
    }

    pub fn point_ix(&self, id: &str) -> Result<PointIx, SurfaceError> {
        self.points
            .iter()
            .position(|p| p.id == id)
            .ok_or_else(|| SurfaceError::UnknownPuncture(id.to_string()))
    }

    pub fn edge_ix(&self, id: &str) -> Result<EdgeIx, SurfaceError> {
        self.edges
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| SurfaceError::UnknownArc(id.to_string()))
    }

    pub fn is_pending(&self, e: EdgeIx) -> bool {
        let ed = &self.edges[e];
        ed.kind == EdgeKind::Arc
            && (self.points[ed.ends[0]].kind == PointKind::Orbifold
                || self.points[ed.ends[1]].kind == PointKind::Orbifold)
    }

    pub fn arc_weight(&self, e: EdgeIx) -> u64 {
        if self.is_pending(e) {
            2
        } else {
            1
        }
    }

    pub fn shape(&self, f: usize) -> FaceShape {
        let w = &self.faces[f].darts;
        match w.len() {
            3 => {
                for i in 0..3 {
                    for j in i + 1..3 {
                        if w[i].edge == w[j].edge {
                            let folded = w[i].edge;
                            let loop_edge = w.iter().find(|d| d.edge != folded).unwrap().edge;
                            return FaceShape::SelfFolded { loop_edge, folded };
                        }
                    }
                }
                FaceShape::Plain
            }
            4 => {
                // pending block = consecutive (d, d.rev())
                for i in 0..4 {
                    let j = (i + 1) % 4;
                    if w[i].edge == w[j].edge && w[i].flip != w[j].flip && self.is_pending(w[i].edge) {
                        return FaceShape::OrbDigon { pending: w[i].edge };
                    }
                }
                panic!("length-4 face without a pending block");
            }
            5 => {
                let mut pendings = Vec::new();
                for i in 0..5 {
                    let j = (i + 1) % 5;
                    if w[i].edge == w[j].edge && !w[i].flip && w[j].flip {
                        pendings.push(w[i].edge);
                    }
                }
                assert_eq!(pendings.len(), 2, "orbifold monogon has two pending blocks");
                FaceShape::OrbMonogon { pendings: [pendings[0], pendings[1]] }
            }
            n => panic!("unsupported face walk length {n}"),
        }
    }

    /// Side slots of a face in walk (ccw) order: each slot is one edge, with
    /// pending blocks collapsed to a single slot. Returns (slot edges, dart
    /// index where each slot starts).
    pub fn slots(&self, f: usize) -> Vec<(EdgeIx, usize)> {
        let w = &self.faces[f].darts;
        let mut out = Vec::new();
        let mut i = 0;
        while i < w.len() {
            let j = (i + 1) % w.len();
            if w[i].edge == w[j].edge && !w[i].flip && w[j].flip && self.is_pending(w[i].edge) && j != 0
            {
                out.push((w[i].edge, i));
                i += 2;
            } else {
                out.push((w[i].edge, i));
                i += 1;
            }
        }
        out
    }

    /// Dart preceding `d` in its face walk.
    fn face_prev(&self, d: Dart) -> Option<Dart> {
        for f in &self.faces {
            if let Some(pos) = f.darts.iter().position(|&x| x == d) {
                let n = f.darts.len();
                return Some(f.darts[(pos + n - 1) % n]);
            }
        }
        None
    }

    /// Next dart counter-clockwise around the tail of `d`.
    pub fn next_ccw(&self, d: Dart) -> Dart {
        self.face_prev(d).expect("dart in some face").rev()
    }

    /// All darts leaving point `v`, in counter-clockwise cyclic order.
    pub fn rotation(&self, v: PointIx) -> Vec<Dart> {
        let mut start = None;
        for (e, edge) in self.edges.iter().enumerate() {
            if edge.ends[0] == v {
                start = Some(Dart::pos(e));
                break;
            }
            if edge.ends[1] == v {
                start = Some(Dart::neg(e));
                break;
            }
        }
        let Some(s) = start else { return Vec::new() };
        let mut out = vec![s];
        let mut cur = self.next_ccw(s);
        while cur != s {
            out.push(cur);
            cur = self.next_ccw(cur);
            assert!(out.len() <= 2 * self.edges.len() + 2, "rotation does not close");
        }
        out
    }

    pub fn arcs(&self) -> Vec<EdgeIx> {
        (0..self.edges.len()).filter(|&e| self.edges[e].kind == EdgeKind::Arc).collect()
    }

    pub fn punctures(&self) -> Vec<PointIx> {
        let on_boundary = self.boundary_points();
        (0..self.points.len())
            .filter(|&p| self.points[p].kind == PointKind::Marked && !on_boundary.contains(&p))
            .collect()
    }

    pub fn boundary_points(&self) -> Vec<PointIx> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.kind == EdgeKind::Boundary {
                for &p in &e.ends {
                    if !out.contains(&p) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    pub fn has_boundary(&self) -> bool {
        self.edges.iter().any(|e| e.kind == EdgeKind::Boundary)
    }

    /// Faces (interior) containing the given dart.
    pub fn face_of(&self, d: Dart) -> Option<usize> {
        (0..self.faces.len()).find(|&f| self.faces[f].darts.contains(&d))
    }

    /// The self-folded triangle with folded side `i`, if any: returns (face,
    /// loop edge).
    pub fn self_folded_at(&self, i: EdgeIx) -> Option<(usize, EdgeIx)> {
        for f in 0..self.faces.len() {
            if self.faces[f].boundary {
                continue;
            }
            if let FaceShape::SelfFolded { loop_edge, folded } = self.shape(f) {
                if folded == i {
                    return Some((f, loop_edge));
                }
            }
        }
        None
    }

    /// Loop edges that enclose a self-folded triangle.
    pub fn sf_loops(&self) -> Vec<EdgeIx> {
        let mut out = Vec::new();
        for f in 0..self.faces.len() {
            if self.faces[f].boundary {
                continue;
            }
            if let FaceShape::SelfFolded { loop_edge, .. } = self.shape(f) {
                out.push(loop_edge);
            }
        }
        out
    }

    /// Structural sanity: every dart in exactly one face, walks compose,
    /// rotations close, Euler characteristic matches an oriented surface.
    pub fn validate(&self) -> Result<(), SurfaceError> {
        let mut seen: BTreeMap<Dart, usize> = BTreeMap::new();
        for (fi, f) in self.faces.iter().enumerate() {
            let n = f.darts.len();
            for (i, &d) in f.darts.iter().enumerate() {
                if seen.insert(d, fi).is_some() {
                    return Err(SurfaceError::BadGluing(format!(
                        "dart {}{} in two faces",
                        self.edges[d.edge].id,
                        if d.flip { "-" } else { "+" }
                    )));
                }
                let next = f.darts[(i + 1) % n];
                if self.head(d) != self.tail(next) {
                    return Err(SurfaceError::BadGluing(format!(
                        "face {fi} walk breaks at {}",
                        self.edges[d.edge].id
                    )));
                }
            }
        }
        if seen.len() != 2 * self.edges.len() {
            return Err(SurfaceError::BadGluing("some dart belongs to no face".into()));
        }
        // rotations close around every point
        for v in 0..self.points.len() {
            let _ = self.rotation(v);
        }
        // orbifold points lie on exactly one pending arc
        for v in 0..self.points.len() {
            if self.points[v].kind == PointKind::Orbifold {
                let deg = self
                    .edges
                    .iter()
                    .filter(|e| e.ends.contains(&v))
                    .count();
                if deg != 1 {
                    return Err(SurfaceError::BadGluing(format!(
                        "orbifold point {} has degree {deg}",
                        self.points[v].id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Euler characteristic of the surface (boundary faces excluded).
    pub fn euler(&self) -> i64 {
        let v = self.points.len() as i64;
        let e = self.edges.len() as i64;
        let f_int = self.faces.iter().filter(|f| !f.boundary).count() as i64;
        v - e + f_int
    }
}

/// Rotates an interior face walk so no pending block wraps around the seam.
pub fn unwrap_blocks(m: &SurfaceMap, mut darts: Vec<Dart>) -> Vec<Dart> {
    let n = darts.len();
    if n > 3 {
        for _ in 0..n {
            let last = darts[n - 1];
            let first = darts[0];
            if last.edge == first.edge && !last.flip && first.flip && m.is_pending(last.edge) {
                darts.rotate_left(1);
            } else {
                break;
            }
        }
    }
    darts
}
