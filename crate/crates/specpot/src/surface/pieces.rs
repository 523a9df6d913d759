//! Puzzle-piece catalog and assembly of triangulated surfaces from partial
//! matchings of outer sides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::SurfaceError;

use super::map::{unwrap_blocks, Dart, Edge, EdgeKind, Face, Point, PointKind, SurfaceMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PieceKind {
    /// Triangle: 3 outer sides.
    I,
    /// Once-punctured digon: 2 outer sides, self-folded pair inside.
    II,
    /// Twice-punctured monogon: 1 outer side, two self-folded pairs.
    III,
    /// Digon with one orbifold point: 2 outer sides, one pending arc.
    IV,
    /// Monogon with two orbifold points: 1 outer side, two pending arcs.
    V,
    /// Monogon with a puncture and an orbifold point: 1 outer side; loop,
    /// folded side and pending arc inside.
    VI,
    /// Mirror image of VI.
    VII,
}

impl PieceKind {
    pub fn parse(s: &str) -> Result<Self, SurfaceError> {
        match s {
            "I" => Ok(PieceKind::I),
            "II" => Ok(PieceKind::II),
            "III" => Ok(PieceKind::III),
            "IV" => Ok(PieceKind::IV),
            "V" => Ok(PieceKind::V),
            "VI" => Ok(PieceKind::VI),
            "VII" => Ok(PieceKind::VII),
            other => Err(SurfaceError::UnknownPieceKind(other.to_string())),
        }
    }

    pub fn side_count(self) -> usize {
        match self {
            PieceKind::I => 3,
            PieceKind::II | PieceKind::IV => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceSpec {
    pub id: String,
    pub kind: String,
    pub sides: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatchSpec {
    /// "piece.side"
    pub a: String,
    pub b: String,
    /// Optional arc id for the glued side pair; defaults to the `a` reference.
    #[serde(default)]
    pub arc: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub pieces: Vec<PieceSpec>,
    #[serde(default)]
    pub matching: Vec<MatchSpec>,
    /// notched punctures (weak signature -1)
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
    /// per-puncture scalars as rational text
    #[serde(default)]
    pub scalars: BTreeMap<String, String>,
}

struct PieceProto {
    points: Vec<(String, PointKind)>,
    /// (name, tail point index, head point index, boundary?)
    edges: Vec<(String, usize, usize, bool)>,
    /// interior faces as (edge name, flipped) walks
    faces: Vec<Vec<(String, bool)>>,
    /// boundary walk
    boundary: Vec<(String, bool)>,
}

fn proto(kind: PieceKind, n_sides: usize) -> PieceProto {
    let d = |name: &str| (name.to_string(), false);
    let r = |name: &str| (name.to_string(), true);
    match kind {
        PieceKind::I => PieceProto {
            points: vec![
                ("c0".into(), PointKind::Marked),
                ("c1".into(), PointKind::Marked),
                ("c2".into(), PointKind::Marked),
            ],
            edges: vec![
                ("s1".into(), 0, 1, true),
                ("s2".into(), 1, 2, true),
                ("s3".into(), 2, 0, true),
            ],
            faces: vec![vec![d("s1"), d("s2"), d("s3")]],
            boundary: vec![r("s3"), r("s2"), r("s1")],
        },
        PieceKind::II => PieceProto {
            points: vec![
                ("c0".into(), PointKind::Marked),
                ("c1".into(), PointKind::Marked),
                ("p".into(), PointKind::Marked),
            ],
            edges: vec![
                ("s1".into(), 0, 1, true),
                ("s2".into(), 1, 0, true),
                ("j".into(), 0, 0, false),
                ("i".into(), 0, 2, false),
            ],
            faces: vec![
                vec![d("s1"), d("s2"), d("j")],
                vec![r("j"), d("i"), r("i")],
            ],
            boundary: vec![r("s2"), r("s1")],
        },
        PieceKind::III => PieceProto {
            points: vec![
                ("c0".into(), PointKind::Marked),
                ("p1".into(), PointKind::Marked),
                ("p2".into(), PointKind::Marked),
            ],
            edges: vec![
                ("s1".into(), 0, 0, true),
                ("j1".into(), 0, 0, false),
                ("i1".into(), 0, 1, false),
                ("j2".into(), 0, 0, false),
                ("i2".into(), 0, 2, false),
            ],
            faces: vec![
                vec![d("s1"), d("j1"), d("j2")],
                vec![r("j1"), d("i1"), r("i1")],
                vec![r("j2"), d("i2"), r("i2")],
            ],
            boundary: vec![r("s1")],
        },
        PieceKind::IV => PieceProto {
            points: vec![
                ("c0".into(), PointKind::Marked),
                ("c1".into(), PointKind::Marked),
                ("q".into(), PointKind::Orbifold),
            ],
            edges: vec![
                ("s1".into(), 0, 1, true),
                ("s2".into(), 1, 0, true),
                ("x".into(), 0, 2, false),
            ],
            faces: vec![vec![d("s1"), d("s2"), d("x"), r("x")]],
            boundary: vec![r("s2"), r("s1")],
        },
        PieceKind::V => PieceProto {
            points: vec![
                ("c0".into(), PointKind::Marked),
                ("q1".into(), PointKind::Orbifold),
                ("q2".into(), PointKind::Orbifold),
            ],
            edges: vec![
                ("s1".into(), 0, 0, true),
                ("x1".into(), 0, 1, false),
                ("x2".into(), 0, 2, false),
            ],
            faces: vec![vec![d("s1"), d("x1"), r("x1"), d("x2"), r("x2")]],
            boundary: vec![r("s1")],
        },
        PieceKind::VI => PieceProto {
            points: vec![
                ("c0".into(), PointKind::Marked),
                ("p".into(), PointKind::Marked),
                ("q".into(), PointKind::Orbifold),
            ],
            edges: vec![
                ("s1".into(), 0, 0, true),
                ("k".into(), 0, 0, false),
                ("w".into(), 0, 1, false),
                ("x".into(), 0, 2, false),
            ],
            faces: vec![
                vec![d("s1"), d("k"), d("x"), r("x")],
                vec![r("k"), d("w"), r("w")],
            ],
            boundary: vec![r("s1")],
        },
        PieceKind::VII => PieceProto {
            points: vec![
                ("c0".into(), PointKind::Marked),
                ("p".into(), PointKind::Marked),
                ("q".into(), PointKind::Orbifold),
            ],
            edges: vec![
                ("s1".into(), 0, 0, true),
                ("k".into(), 0, 0, false),
                ("w".into(), 0, 1, false),
                ("x".into(), 0, 2, false),
            ],
            faces: vec![
                vec![d("s1"), d("x"), r("x"), d("k")],
                vec![r("k"), d("w"), r("w")],
            ],
            boundary: vec![r("s1")],
        },
    }
    .renumber(n_sides)
}

impl PieceProto {
    fn renumber(self, n_sides: usize) -> PieceProto {
        let _ = n_sides;
        self
    }
}

/// Assembles the surface of a piece decomposition: instantiates each piece,
/// glues matched outer sides with opposite orientation, and reconstitutes the
/// boundary walks.
pub fn assemble(spec: &SurfaceSpec) -> Result<SurfaceMap, SurfaceError> {
    // instantiate
    let mut points: Vec<Point> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut faces: Vec<Face> = Vec::new();
    let mut boundary_walks: Vec<Vec<Dart>> = Vec::new();
    // (piece id, local side name) -> edge index
    let mut side_index: BTreeMap<(String, String), usize> = BTreeMap::new();

    for piece in &spec.pieces {
        let kind = PieceKind::parse(&piece.kind)?;
        if piece.sides.len() != kind.side_count() {
            return Err(SurfaceError::BadGluing(format!(
                "piece {} of kind {} needs {} side names",
                piece.id,
                piece.kind,
                kind.side_count()
            )));
        }
        let p = proto(kind, piece.sides.len());
        let pt_off = points.len();
        for (name, kindp) in &p.points {
            points.push(Point { id: format!("{}.{}", piece.id, name), kind: *kindp });
        }
        let mut local_edge: BTreeMap<String, usize> = BTreeMap::new();
        let mut boundary_seen = 0usize;
        for (name, t, h, is_side) in &p.edges {
            let ix = edges.len();
            let id = if *is_side {
                let given = &piece.sides[boundary_seen];
                boundary_seen += 1;
                side_index.insert((piece.id.clone(), name.clone()), ix);
                side_index.insert((piece.id.clone(), given.clone()), ix);
                format!("{}.{}", piece.id, given)
            } else {
                format!("{}.{}", piece.id, name)
            };
            edges.push(Edge {
                id,
                ends: [pt_off + t, pt_off + h],
                kind: if *is_side { EdgeKind::Boundary } else { EdgeKind::Arc },
            });
            local_edge.insert(name.clone(), ix);
        }
        for walk in &p.faces {
            let darts = walk
                .iter()
                .map(|(n, f)| Dart { edge: local_edge[n], flip: *f })
                .collect();
            faces.push(Face { darts, boundary: false });
        }
        boundary_walks.push(
            p.boundary
                .iter()
                .map(|(n, f)| Dart { edge: local_edge[n], flip: *f })
                .collect(),
        );
    }

    // gluing: union-find over points, edge identification
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            parent[hi] = lo;
        }
    };

    // edge_map: edge -> (replacement edge, flipped?)
    let mut edge_map: Vec<(usize, bool)> = (0..edges.len()).map(|e| (e, false)).collect();
    let mut matched: Vec<bool> = vec![false; edges.len()];
    let mut renames: Vec<(usize, String)> = Vec::new();

    let resolve_side = |s: &str| -> Result<usize, SurfaceError> {
        let (piece, side) = s
            .split_once('.')
            .ok_or_else(|| SurfaceError::UnknownSide(s.to_string()))?;
        side_index
            .get(&(piece.to_string(), side.to_string()))
            .copied()
            .ok_or_else(|| SurfaceError::UnknownSide(s.to_string()))
    };

    for m in &spec.matching {
        let ea = resolve_side(&m.a)?;
        let eb = resolve_side(&m.b)?;
        if ea == eb {
            return Err(SurfaceError::SelfMatch(m.a.clone()));
        }
        if matched[ea] {
            return Err(SurfaceError::SideMatchedTwice(m.a.clone()));
        }
        if matched[eb] {
            return Err(SurfaceError::SideMatchedTwice(m.b.clone()));
        }
        matched[ea] = true;
        matched[eb] = true;
        // identify eb with ea reversed
        edge_map[eb] = (ea, true);
        union(&mut parent, edges[ea].ends[0], edges[eb].ends[1]);
        union(&mut parent, edges[ea].ends[1], edges[eb].ends[0]);
        edges[ea].kind = EdgeKind::Arc;
        renames.push((ea, m.arc.clone().unwrap_or_else(|| m.a.replace('.', "_"))));
    }
    for (e, name) in renames {
        edges[e].id = name;
    }

    // splice boundary walks along matchings
    let mut walks = boundary_walks;
    for m in &spec.matching {
        let ea = resolve_side(&m.a)?;
        let eb = resolve_side(&m.b)?;
        let fa = walks
            .iter()
            .position(|w| w.iter().any(|d| d.edge == ea))
            .ok_or_else(|| SurfaceError::BadGluing(m.a.clone()))?;
        let fb = walks
            .iter()
            .position(|w| w.iter().any(|d| d.edge == eb))
            .ok_or_else(|| SurfaceError::BadGluing(m.b.clone()))?;
        if fa != fb {
            let wb = walks.remove(fb);
            let fa = walks
                .iter()
                .position(|w| w.iter().any(|d| d.edge == ea))
                .unwrap();
            let wa = std::mem::take(&mut walks[fa]);
            let pa = wa.iter().position(|d| d.edge == ea).unwrap();
            let pb = wb.iter().position(|d| d.edge == eb).unwrap();
            // rotate each so the matched dart is last, drop it, concatenate
            let mut na: Vec<Dart> = wa.clone();
            na.rotate_left((pa + 1) % wa.len());
            na.pop();
            let mut nb: Vec<Dart> = wb.clone();
            nb.rotate_left((pb + 1) % wb.len());
            nb.pop();
            na.extend(nb);
            walks[fa] = na;
        } else {
            let w = std::mem::take(&mut walks[fa]);
            let pa = w.iter().position(|d| d.edge == ea).unwrap();
            let pb = w.iter().position(|d| d.edge == eb).unwrap();
            let (lo, hi) = (pa.min(pb), pa.max(pb));
            let middle: Vec<Dart> = w[lo + 1..hi].to_vec();
            let mut outer: Vec<Dart> = w[hi + 1..].to_vec();
            outer.extend_from_slice(&w[..lo]);
            walks[fa] = middle;
            walks.push(outer);
        }
    }
    walks.retain(|w| !w.is_empty());

    // rebuild: compress points, remap edges and darts
    let mut new_points: Vec<Point> = Vec::new();
    let mut point_map: Vec<usize> = vec![usize::MAX; points.len()];
    for i in 0..points.len() {
        if find(&mut parent, i) == i {
            point_map[i] = new_points.len();
            new_points.push(points[i].clone());
        }
    }
    for i in 0..points.len() {
        let r = find(&mut parent, i);
        point_map[i] = point_map[r];
    }
    let mut new_edges: Vec<Edge> = Vec::new();
    let mut edge_new_ix: Vec<usize> = vec![usize::MAX; edges.len()];
    for (e, edge) in edges.iter().enumerate() {
        if edge_map[e].0 == e {
            edge_new_ix[e] = new_edges.len();
            new_edges.push(Edge {
                id: edge.id.clone(),
                ends: [point_map[edge.ends[0]], point_map[edge.ends[1]]],
                kind: edge.kind,
            });
        }
    }
    let remap_dart = |d: Dart| -> Dart {
        let (target, flipped) = edge_map[d.edge];
        Dart { edge: edge_new_ix[target], flip: d.flip ^ flipped }
    };

    let mut out = SurfaceMap { points: new_points, edges: new_edges, faces: Vec::new() };
    for f in faces {
        let darts: Vec<Dart> = f.darts.into_iter().map(remap_dart).collect();
        let darts = unwrap_blocks(&out, darts);
        out.faces.push(Face { darts, boundary: false });
    }
    for w in walks {
        let darts: Vec<Dart> = w.into_iter().map(remap_dart).collect();
        out.faces.push(Face { darts, boundary: true });
    }

    out.validate()?;
    // sphere constraint
    if !out.has_boundary() && out.euler() == 2 {
        let marked = out.points.iter().filter(|p| p.kind == PointKind::Marked).count();
        if marked < 7 {
            return Err(SurfaceError::SmallSphere);
        }
    }
    Ok(out)
}
