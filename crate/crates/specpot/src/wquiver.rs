//! Weighted quivers with modulating labels, the bijection with
//! skew-symmetrizable matrices, and quiver-level mutation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::QuiverError;
use crate::scalars::GaloisElement;

pub type VertexIx = usize;
pub type ArrowIx = usize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: String,
    pub weight: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub id: String,
    pub tail: VertexIx,
    pub head: VertexIx,
    /// Modulating label; modulus is gcd of the endpoint weights.
    pub label: GaloisElement,
}

/// Loop-free multigraph with vertex weights and per-arrow cyclic-Galois labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedQuiver {
    pub vertices: Vec<Vertex>,
    pub arrows: Vec<Arrow>,
    vertex_index: BTreeMap<String, VertexIx>,
    arrow_index: BTreeMap<String, ArrowIx>,
}

impl WeightedQuiver {
    pub fn new() -> Self {
        WeightedQuiver {
            vertices: Vec::new(),
            arrows: Vec::new(),
            vertex_index: BTreeMap::new(),
            arrow_index: BTreeMap::new(),
        }
    }

    pub fn add_vertex(&mut self, id: &str, weight: u64) -> Result<VertexIx, QuiverError> {
        if self.vertex_index.contains_key(id) {
            return Err(QuiverError::DuplicateId(id.to_string()));
        }
        let ix = self.vertices.len();
        self.vertices.push(Vertex { id: id.to_string(), weight });
        self.vertex_index.insert(id.to_string(), ix);
        Ok(ix)
    }

    /// Adds an arrow with the identity label.
    pub fn add_arrow(&mut self, id: &str, tail: &str, head: &str) -> Result<ArrowIx, QuiverError> {
        let m = self.pair_gcd_by_id(tail, head)?;
        self.add_arrow_labeled(id, tail, head, GaloisElement::identity(m))
    }

    pub fn add_arrow_labeled(
        &mut self,
        id: &str,
        tail: &str,
        head: &str,
        label: GaloisElement,
    ) -> Result<ArrowIx, QuiverError> {
        if self.arrow_index.contains_key(id) {
            return Err(QuiverError::DuplicateId(id.to_string()));
        }
        let t = self.vertex_ix(tail)?;
        let h = self.vertex_ix(head)?;
        if t == h {
            return Err(QuiverError::Loop(id.to_string()));
        }
        let want = self.vertices[t].weight.gcd(&self.vertices[h].weight);
        if label.modulus != want {
            return Err(QuiverError::BadLabelModulus { arrow: id.to_string(), got: label.modulus, want });
        }
        let ix = self.arrows.len();
        self.arrows.push(Arrow { id: id.to_string(), tail: t, head: h, label });
        self.arrow_index.insert(id.to_string(), ix);
        Ok(ix)
    }

    pub fn vertex_ix(&self, id: &str) -> Result<VertexIx, QuiverError> {
        self.vertex_index.get(id).copied().ok_or_else(|| QuiverError::UnknownVertex(id.to_string()))
    }

    pub fn arrow_ix(&self, id: &str) -> Result<ArrowIx, QuiverError> {
        self.arrow_index.get(id).copied().ok_or_else(|| QuiverError::UnknownArrow(id.to_string()))
    }

    pub fn weight(&self, v: VertexIx) -> u64 {
        self.vertices[v].weight
    }

    pub fn pair_gcd(&self, i: VertexIx, j: VertexIx) -> u64 {
        self.vertices[i].weight.gcd(&self.vertices[j].weight)
    }

    fn pair_gcd_by_id(&self, i: &str, j: &str) -> Result<u64, QuiverError> {
        Ok(self.pair_gcd(self.vertex_ix(i)?, self.vertex_ix(j)?))
    }

    pub fn lcm_weight(&self) -> u64 {
        self.vertices.iter().fold(1u64, |acc, v| acc.lcm(&v.weight))
    }

    /// Arrow counts per ordered vertex pair.
    pub fn arrow_counts(&self) -> BTreeMap<(VertexIx, VertexIx), usize> {
        let mut m = BTreeMap::new();
        for a in &self.arrows {
            *m.entry((a.tail, a.head)).or_insert(0) += 1;
        }
        m
    }

    pub fn two_cycle_pair(&self) -> Option<(String, String)> {
        let counts = self.arrow_counts();
        for (&(t, h), _) in &counts {
            if t < h && counts.contains_key(&(h, t)) {
                return Some((self.vertices[t].id.clone(), self.vertices[h].id.clone()));
            }
        }
        None
    }

    pub fn is_two_acyclic(&self) -> bool {
        self.two_cycle_pair().is_none()
    }

    pub fn has_two_cycle_at(&self, k: VertexIx) -> bool {
        let counts = self.arrow_counts();
        counts.iter().any(|(&(t, h), _)| (t == k || h == k) && counts.contains_key(&(h, t)))
    }

    pub fn arrows_into(&self, k: VertexIx) -> Vec<ArrowIx> {
        (0..self.arrows.len()).filter(|&a| self.arrows[a].head == k).collect()
    }

    pub fn arrows_out_of(&self, k: VertexIx) -> Vec<ArrowIx> {
        (0..self.arrows.len()).filter(|&a| self.arrows[a].tail == k).collect()
    }
}

impl Default for WeightedQuiver {
    fn default() -> Self {
        Self::new()
    }
}

/// Integer matrix `B` with a diagonal skew-symmetrizer `D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkewSymmetrizableMatrix {
    pub b: Vec<Vec<i64>>,
    pub d: Vec<u64>,
}

impl SkewSymmetrizableMatrix {
    pub fn new(b: Vec<Vec<i64>>, d: Vec<u64>) -> Result<Self, QuiverError> {
        let n = d.len();
        if b.len() != n || b.iter().any(|row| row.len() != n) || d.iter().any(|&x| x == 0) {
            return Err(QuiverError::NotSkewSymmetrizable);
        }
        for i in 0..n {
            for j in 0..n {
                if (d[i] as i64) * b[i][j] != -((d[j] as i64) * b[j][i]) {
                    return Err(QuiverError::NotSkewSymmetrizable);
                }
            }
        }
        Ok(SkewSymmetrizableMatrix { b, d })
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }
}

/// Exchange-matrix mutation at index `k`.
pub fn matrix_mutate(m: &SkewSymmetrizableMatrix, k: usize) -> SkewSymmetrizableMatrix {
    let n = m.n();
    let mut b = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            b[i][j] = if i == k || j == k {
                -m.b[i][j]
            } else {
                m.b[i][j] + m.b[i][k].signum() * (m.b[i][k] * m.b[k][j]).max(0)
            };
        }
    }
    SkewSymmetrizableMatrix { b, d: m.d.clone() }
}

/// Builds the 2-acyclic weighted quiver of a matrix: `b[i][j] > 0` yields
/// `b[i][j]*gcd(d_i,d_j)/d_j` arrows from `j` to `i`, all labeled identity.
pub fn from_matrix(m: &SkewSymmetrizableMatrix) -> Result<WeightedQuiver, QuiverError> {
    let n = m.n();
    let mut q = WeightedQuiver::new();
    for i in 0..n {
        q.add_vertex(&(i + 1).to_string(), m.d[i])?;
    }
    for i in 0..n {
        for j in 0..n {
            if m.b[i][j] > 0 {
                let g = m.d[i].gcd(&m.d[j]) as i64;
                let count = m.b[i][j] * g / m.d[j] as i64;
                if count * m.d[j] as i64 != m.b[i][j] * g {
                    return Err(QuiverError::NotSkewSymmetrizable);
                }
                for t in 0..count {
                    let id = format!("a{}_{}_{}", j + 1, i + 1, t);
                    let gm = m.d[i].gcd(&m.d[j]);
                    q.add_arrow_labeled(&id, &(j + 1).to_string(), &(i + 1).to_string(), GaloisElement::identity(gm))?;
                }
            }
        }
    }
    Ok(q)
}

/// Inverse of [`from_matrix`]; requires a 2-acyclic quiver.
pub fn to_matrix(q: &WeightedQuiver) -> Result<SkewSymmetrizableMatrix, QuiverError> {
    if let Some((a, b)) = q.two_cycle_pair() {
        return Err(QuiverError::TwoCycle(a, b));
    }
    let n = q.vertices.len();
    let mut b = vec![vec![0i64; n]; n];
    for a in &q.arrows {
        let (j, i) = (a.tail, a.head);
        let g = q.pair_gcd(i, j) as i64;
        b[i][j] += q.vertices[j].weight as i64 / g;
        b[j][i] -= q.vertices[i].weight as i64 / g;
    }
    SkewSymmetrizableMatrix::new(b, q.vertices.iter().map(|v| v.weight).collect())
}

/// `to_matrix` with rows/columns in a caller-chosen vertex order.
pub fn to_matrix_with_order(q: &WeightedQuiver, order: &[&str]) -> Result<SkewSymmetrizableMatrix, QuiverError> {
    let m = to_matrix(q)?;
    let perm: Vec<usize> = order.iter().map(|id| q.vertex_ix(id)).collect::<Result<_, _>>()?;
    let n = m.n();
    if perm.len() != n {
        return Err(QuiverError::UnknownVertex("order must list every vertex".into()));
    }
    let mut b = vec![vec![0i64; n]; n];
    let mut d = vec![0u64; n];
    for i in 0..n {
        d[i] = m.d[perm[i]];
        for j in 0..n {
            b[i][j] = m.b[perm[i]][perm[j]];
        }
    }
    SkewSymmetrizableMatrix::new(b, d)
}

/// Number of composite arrows for a composable pair `a` into `k`, `b` out of `k`.
pub fn composite_count(q: &WeightedQuiver, a: ArrowIx, b: ArrowIx) -> Result<u64, QuiverError> {
    let aa = &q.arrows[a];
    let bb = &q.arrows[b];
    if aa.head != bb.tail {
        return Err(QuiverError::NotComposable(bb.id.clone(), aa.id.clone()));
    }
    let k = aa.head;
    let dk = q.weight(k);
    let dht = q.pair_gcd(bb.head, aa.tail);
    let dhk = q.pair_gcd(bb.head, k);
    let dkt = q.pair_gcd(k, aa.tail);
    Ok(dk * dht / (dhk * dkt))
}

/// Size of the eigenbasis factor for the pair.
pub fn basis_count(q: &WeightedQuiver, a: ArrowIx, b: ArrowIx) -> Result<u64, QuiverError> {
    let aa = &q.arrows[a];
    let bb = &q.arrows[b];
    if aa.head != bb.tail {
        return Err(QuiverError::NotComposable(bb.id.clone(), aa.id.clone()));
    }
    let k = aa.head;
    let dk = q.weight(k);
    let dhk = q.pair_gcd(bb.head, k);
    let dkt = q.pair_gcd(k, aa.tail);
    Ok(dk / dhk.lcm(&dkt))
}

/// All labels in `G_{h(b),t(a)}` restricting to `g_b g_a` on the triple
/// intersection with the middle field.
pub fn coset_x(q: &WeightedQuiver, a: ArrowIx, b: ArrowIx) -> Result<Vec<GaloisElement>, QuiverError> {
    let aa = &q.arrows[a];
    let bb = &q.arrows[b];
    if aa.head != bb.tail {
        return Err(QuiverError::NotComposable(bb.id.clone(), aa.id.clone()));
    }
    let k = aa.head;
    let dij = q.pair_gcd(bb.head, aa.tail);
    let triple = dij.gcd(&q.weight(k));
    let target = (bb.label.restrict(triple)?).compose(&aa.label.restrict(triple)?)?;
    let mut out = Vec::new();
    for r in 0..dij {
        let cand = GaloisElement::new(r, dij);
        if cand.restrict(triple)? == target {
            out.push(cand);
        }
    }
    Ok(out)
}

/// One composite arrow of a premutation, with its provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeArrowLabel {
    pub id: String,
    /// Outgoing factor (tail at the mutation vertex).
    pub b: String,
    /// Incoming factor (head at the mutation vertex).
    pub a: String,
    pub omega_index: u64,
    pub rho: GaloisElement,
}

/// Premutated quiver together with star and composite bookkeeping.
#[derive(Clone, Debug)]
pub struct PremutedQuiver {
    pub quiver: WeightedQuiver,
    /// original arrow id -> reversed arrow id
    pub stars: BTreeMap<String, String>,
    pub composites: Vec<CompositeArrowLabel>,
}

pub fn star_name(id: &str) -> String {
    format!("{id}'")
}

pub fn composite_name(b: &str, a: &str, omega: u64, rho: &GaloisElement, xs: usize) -> String {
    let core = if omega == 0 { format!("[{b}.{a}]") } else { format!("[{b}.w{omega}.{a}]") };
    if xs > 1 {
        format!("{core}#{}", rho.residue)
    } else {
        core
    }
}

/// Steps 1-2 of mutation at `k`: add labeled composites, reverse arrows at `k`.
/// No 2-cycle deletion.
pub fn premutate_quiver(q: &WeightedQuiver, k: VertexIx) -> Result<PremutedQuiver, QuiverError> {
    if q.has_two_cycle_at(k) {
        return Err(QuiverError::TwoCycleAt(q.vertices[k].id.clone()));
    }
    let mut out = WeightedQuiver::new();
    for v in &q.vertices {
        out.add_vertex(&v.id, v.weight)?;
    }
    let mut stars = BTreeMap::new();
    for arr in &q.arrows {
        if arr.tail == k || arr.head == k {
            let sid = star_name(&arr.id);
            out.add_arrow_labeled(
                &sid,
                &q.vertices[arr.head].id,
                &q.vertices[arr.tail].id,
                arr.label.inverse(),
            )?;
            stars.insert(arr.id.clone(), sid);
        } else {
            out.add_arrow_labeled(&arr.id, &q.vertices[arr.tail].id, &q.vertices[arr.head].id, arr.label.clone())?;
        }
    }
    let mut composites = Vec::new();
    let ins = q.arrows_into(k);
    let outs = q.arrows_out_of(k);
    for &b in &outs {
        for &a in &ins {
            let nb = basis_count(q, a, b)?;
            let xs = coset_x(q, a, b)?;
            for omega in 0..nb {
                for rho in &xs {
                    let id = composite_name(&q.arrows[b].id, &q.arrows[a].id, omega, rho, xs.len());
                    out.add_arrow_labeled(
                        &id,
                        &q.vertices[q.arrows[a].tail].id,
                        &q.vertices[q.arrows[b].head].id,
                        rho.clone(),
                    )?;
                    composites.push(CompositeArrowLabel {
                        id,
                        b: q.arrows[b].id.clone(),
                        a: q.arrows[a].id.clone(),
                        omega_index: omega,
                        rho: rho.clone(),
                    });
                }
            }
        }
    }
    composites.sort_by(|x, y| (&x.b, &x.a, x.omega_index, x.rho.residue).cmp(&(&y.b, &y.a, y.omega_index, y.rho.residue)));
    Ok(PremutedQuiver { quiver: out, stars, composites })
}

/// Full weighted-quiver mutation: premutation followed by deletion of a
/// maximal collection of disjoint 2-cycles, chosen canonically by id order.
pub fn wq_mutate(q: &WeightedQuiver, k: VertexIx) -> Result<WeightedQuiver, QuiverError> {
    let pre = premutate_quiver(q, k)?;
    Ok(delete_two_cycles(&pre.quiver))
}

/// Cancels min(#(i->j), #(j->i)) arrows per unordered pair, by id order.
pub fn delete_two_cycles(q: &WeightedQuiver) -> WeightedQuiver {
    let mut by_pair: BTreeMap<(VertexIx, VertexIx), Vec<ArrowIx>> = BTreeMap::new();
    for (ix, a) in q.arrows.iter().enumerate() {
        by_pair.entry((a.tail, a.head)).or_default().push(ix);
    }
    for v in by_pair.values_mut() {
        v.sort_by(|&x, &y| q.arrows[x].id.cmp(&q.arrows[y].id));
    }
    let mut dead = BTreeSet::new();
    let pairs: Vec<_> = by_pair.keys().copied().collect();
    for &(t, h) in &pairs {
        if t < h {
            if let Some(back) = by_pair.get(&(h, t)) {
                let fwd = &by_pair[&(t, h)];
                let c = fwd.len().min(back.len());
                for i in 0..c {
                    dead.insert(fwd[i]);
                    dead.insert(back[i]);
                }
            }
        }
    }
    let mut out = WeightedQuiver::new();
    for v in &q.vertices {
        out.add_vertex(&v.id, v.weight).unwrap();
    }
    for (ix, a) in q.arrows.iter().enumerate() {
        if !dead.contains(&ix) {
            out.add_arrow_labeled(&a.id, &q.vertices[a.tail].id, &q.vertices[a.head].id, a.label.clone()).unwrap();
        }
    }
    out
}

/// Deletes all arrows incident to vertices outside `keep`. Vertices stay.
pub fn restrict_quiver(q: &WeightedQuiver, keep: &BTreeSet<String>) -> Result<WeightedQuiver, QuiverError> {
    if keep.is_empty() {
        return Err(QuiverError::EmptyRestriction);
    }
    for id in keep {
        q.vertex_ix(id)?;
    }
    let mut out = WeightedQuiver::new();
    for v in &q.vertices {
        out.add_vertex(&v.id, v.weight)?;
    }
    for a in &q.arrows {
        let t = &q.vertices[a.tail].id;
        let h = &q.vertices[a.head].id;
        if keep.contains(t) && keep.contains(h) {
            out.add_arrow_labeled(&a.id, t, h, a.label.clone())?;
        }
    }
    Ok(out)
}

/// A vertex/arrow bijection witnessing a weighted-quiver isomorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuiverIso {
    pub vertex_map: BTreeMap<String, String>,
}

/// Searches for an isomorphism preserving weights and arrow multiplicities.
/// With `labeled`, the label multiset on every vertex pair must also match;
/// parallel arrows may trade equal labels, which covers the permitted
/// identity/theta swap on pending-pending double arrows.
pub fn wq_isomorphic(q1: &WeightedQuiver, q2: &WeightedQuiver, labeled: bool) -> Option<QuiverIso> {
    if q1.vertices.len() != q2.vertices.len() || q1.arrows.len() != q2.arrows.len() {
        return None;
    }
    let n = q1.vertices.len();
    let c1 = q1.arrow_counts();
    let c2 = q2.arrow_counts();
    let sig = |q: &WeightedQuiver, counts: &BTreeMap<(usize, usize), usize>, v: usize| {
        let mut outs: Vec<usize> = counts.iter().filter(|((t, _), _)| *t == v).map(|(_, &c)| c).collect();
        let mut ins: Vec<usize> = counts.iter().filter(|((_, h), _)| *h == v).map(|(_, &c)| c).collect();
        outs.sort_unstable();
        ins.sort_unstable();
        (q.vertices[v].weight, outs, ins)
    };
    let sig1: Vec<_> = (0..n).map(|v| sig(q1, &c1, v)).collect();
    let sig2: Vec<_> = (0..n).map(|v| sig(q2, &c2, v)).collect();

    let labels = |q: &WeightedQuiver, t: usize, h: usize| -> Vec<u64> {
        let mut ls: Vec<u64> = q.arrows.iter().filter(|a| a.tail == t && a.head == h).map(|a| a.label.residue).collect();
        ls.sort_unstable();
        ls
    };

    let mut assign: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];

    fn consistent(
        q1: &WeightedQuiver,
        q2: &WeightedQuiver,
        c1: &BTreeMap<(usize, usize), usize>,
        c2: &BTreeMap<(usize, usize), usize>,
        labels: &dyn Fn(&WeightedQuiver, usize, usize) -> Vec<u64>,
        labeled: bool,
        assign: &[Option<usize>],
        v: usize,
        w: usize,
    ) -> bool {
        for u in 0..assign.len() {
            if let Some(x) = assign[u] {
                for (s, t, s2, t2) in [(v, u, w, x), (u, v, x, w)] {
                    if c1.get(&(s, t)).copied().unwrap_or(0) != c2.get(&(s2, t2)).copied().unwrap_or(0) {
                        return false;
                    }
                    if labeled && labels(q1, s, t) != labels(q2, s2, t2) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn search(
        q1: &WeightedQuiver,
        q2: &WeightedQuiver,
        c1: &BTreeMap<(usize, usize), usize>,
        c2: &BTreeMap<(usize, usize), usize>,
        sig1: &[(u64, Vec<usize>, Vec<usize>)],
        sig2: &[(u64, Vec<usize>, Vec<usize>)],
        labels: &dyn Fn(&WeightedQuiver, usize, usize) -> Vec<u64>,
        labeled: bool,
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        v: usize,
    ) -> bool {
        if v == assign.len() {
            return true;
        }
        for w in 0..assign.len() {
            if used[w] || sig1[v] != sig2[w] {
                continue;
            }
            if !consistent(q1, q2, c1, c2, labels, labeled, assign, v, w) {
                continue;
            }
            assign[v] = Some(w);
            used[w] = true;
            if search(q1, q2, c1, c2, sig1, sig2, labels, labeled, assign, used, v + 1) {
                return true;
            }
            assign[v] = None;
            used[w] = false;
        }
        false
    }

    if search(q1, q2, &c1, &c2, &sig1, &sig2, &labels, labeled, &mut assign, &mut used, 0) {
        let vertex_map = (0..n)
            .map(|v| (q1.vertices[v].id.clone(), q2.vertices[assign[v].unwrap()].id.clone()))
            .collect();
        Some(QuiverIso { vertex_map })
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Serialization

#[derive(Serialize, Deserialize)]
struct ArrowJson {
    id: String,
    tail: String,
    head: String,
    #[serde(default)]
    galois: u64,
}

#[derive(Serialize, Deserialize)]
struct QuiverJson {
    vertices: Vec<Vertex>,
    arrows: Vec<ArrowJson>,
}

pub fn quiver_to_json(q: &WeightedQuiver) -> serde_json::Value {
    let j = QuiverJson {
        vertices: q.vertices.clone(),
        arrows: q
            .arrows
            .iter()
            .map(|a| ArrowJson {
                id: a.id.clone(),
                tail: q.vertices[a.tail].id.clone(),
                head: q.vertices[a.head].id.clone(),
                galois: a.label.residue,
            })
            .collect(),
    };
    serde_json::to_value(&j).expect("quiver serializes")
}

pub fn quiver_from_json(v: &serde_json::Value) -> Result<WeightedQuiver, QuiverError> {
    let j: QuiverJson = serde_json::from_value(v.clone())
        .map_err(|e| QuiverError::UnknownVertex(format!("bad quiver json: {e}")))?;
    let mut q = WeightedQuiver::new();
    for vert in &j.vertices {
        q.add_vertex(&vert.id, vert.weight)?;
    }
    for a in &j.arrows {
        let m = q.pair_gcd_by_id(&a.tail, &a.head)?;
        q.add_arrow_labeled(&a.id, &a.tail, &a.head, GaloisElement::new(a.galois, m))?;
    }
    Ok(q)
}

pub fn quiver_to_dot(q: &WeightedQuiver) -> String {
    let mut s = String::from("digraph Q {\n");
    for v in &q.vertices {
        let _ = writeln!(s, "  \"{}\" [label=\"{} ({})\"];", v.id, v.id, v.weight);
    }
    for a in &q.arrows {
        let lbl = if a.label.modulus > 1 && !a.label.is_identity() {
            format!("{} g={}", a.id, a.label.residue)
        } else {
            a.id.clone()
        };
        let _ = writeln!(s, "  \"{}\" -> \"{}\" [label=\"{}\"];", q.vertices[a.tail].id, q.vertices[a.head].id, lbl);
    }
    s.push_str("}\n");
    s
}
