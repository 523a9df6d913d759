//! The complete path algebra of a weighted quiver with modulating labels,
//! restricted to weight tuples with lcm at most 2.
//!
//! Elements are rational combinations of normalized paths. A path stores its
//! arrow word in composition order (the word `a1 a2 .. al` has
//! `h(a_{r+1}) = t(a_r)`, so the rightmost arrow acts first) plus one bit per
//! slot recording an eigenbasis factor `v`. The normal form pushes every `v`
//! as far right as the labels allow, collapsing `v*v` to `-1`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::error::AlgebraError;
use crate::scalars::{format_rational, parse_rational, GaloisElement, GroundScalar, Rational};
use crate::wquiver::{ArrowIx, VertexIx, WeightedQuiver};

/// Normalized path: arrow word plus v-bits per slot (bit `i` decorates the
/// slot after the `i`-th written arrow; bit 0 is the leftmost slot).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub arrows: Vec<ArrowIx>,
    pub vbits: u64,
    /// Base vertex, meaningful only for length-0 paths.
    pub base: VertexIx,
}

impl Path {
    pub fn lazy(base: VertexIx) -> Self {
        Path { arrows: Vec::new(), vbits: 0, base }
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn bit(&self, slot: usize) -> bool {
        self.vbits >> slot & 1 == 1
    }

    /// Head vertex of the whole path (left end).
    pub fn head(&self, q: &WeightedQuiver) -> VertexIx {
        if self.arrows.is_empty() {
            self.base
        } else {
            q.arrows[self.arrows[0]].head
        }
    }

    /// Tail vertex of the whole path (right end).
    pub fn tail(&self, q: &WeightedQuiver) -> VertexIx {
        if self.arrows.is_empty() {
            self.base
        } else {
            q.arrows[*self.arrows.last().unwrap()].tail
        }
    }

    pub fn slot_vertex(&self, q: &WeightedQuiver, slot: usize) -> VertexIx {
        if self.arrows.is_empty() {
            self.base
        } else if slot == 0 {
            q.arrows[self.arrows[0]].head
        } else {
            q.arrows[self.arrows[slot - 1]].tail
        }
    }

    pub fn is_cyclic(&self, q: &WeightedQuiver) -> bool {
        self.head(q) == self.tail(q)
    }
}

fn crossable(q: &WeightedQuiver, a: ArrowIx) -> bool {
    q.pair_gcd(q.arrows[a].tail, q.arrows[a].head) == 2
}

/// Sign picked up when `v` moves right across `a`: `v a = a g_a^{-1}(v)`.
fn cross_sign(q: &WeightedQuiver, a: ArrowIx) -> i64 {
    if q.arrows[a].label.is_identity() {
        1
    } else {
        -1
    }
}

/// Builds the canonical representative of a raw decorated word. `vpow[i]` is
/// the `v`-power at slot `i` (there are `arrows.len() + 1` slots).
pub fn normalize_raw(
    q: &WeightedQuiver,
    arrows: &[ArrowIx],
    vpow: &[u32],
    base: VertexIx,
) -> Result<(Rational, Path), AlgebraError> {
    assert_eq!(vpow.len(), arrows.len() + 1, "one v-power per slot");
    for w in arrows.windows(2) {
        if q.arrows[w[1]].head != q.arrows[w[0]].tail {
            return Err(AlgebraError::NonComposable(
                q.arrows[w[0]].id.clone(),
                q.arrows[w[1]].id.clone(),
            ));
        }
    }
    let mut coeff = Rational::one();
    let mut path = Path { arrows: arrows.to_vec(), vbits: 0, base };
    for (i, &p) in vpow.iter().enumerate() {
        if p / 2 % 2 == 1 {
            coeff = -coeff;
        }
        if p % 2 == 1 {
            let v = path.slot_vertex(q, i);
            if q.weight(v) != 2 {
                return Err(AlgebraError::VAtWeightOne(q.vertices[v].id.clone()));
            }
            path.vbits |= 1 << i;
        }
    }
    let l = path.len();
    for i in (0..l).rev() {
        if !path.bit(i) {
            continue;
        }
        let mut j = i;
        path.vbits &= !(1 << i);
        loop {
            if j == l {
                path.vbits |= 1 << j;
                break;
            }
            let next = path.arrows[j];
            if !crossable(q, next) {
                path.vbits |= 1 << j;
                break;
            }
            if cross_sign(q, next) < 0 {
                coeff = -coeff;
            }
            j += 1;
            if path.bit(j) {
                // v*v = -1
                path.vbits &= !(1 << j);
                coeff = -coeff;
                break;
            }
        }
    }
    Ok((coeff, path))
}

/// Finite linear combination of normalized paths, optionally truncated: a
/// bound `N` means the element represents its class modulo degree `N+1`.
#[derive(Clone, Debug)]
pub struct AlgebraElement {
    pub terms: BTreeMap<Path, Rational>,
    pub trunc: Option<usize>,
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for AlgebraElement {}

impl AlgebraElement {
    pub fn zero() -> Self {
        AlgebraElement { terms: BTreeMap::new(), trunc: None }
    }

    pub fn zero_trunc(n: Option<usize>) -> Self {
        AlgebraElement { terms: BTreeMap::new(), trunc: n }
    }

    pub fn idempotent(v: VertexIx) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Path::lazy(v), Rational::one());
        AlgebraElement { terms, trunc: None }
    }

    pub fn arrow(a: ArrowIx, q: &WeightedQuiver) -> Self {
        let _ = q;
        let mut terms = BTreeMap::new();
        terms.insert(Path { arrows: vec![a], vbits: 0, base: 0 }, Rational::one());
        AlgebraElement { terms, trunc: None }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn insert(&mut self, coeff: Rational, path: Path) {
        use std::collections::btree_map::Entry;
        if coeff.is_zero() {
            return;
        }
        if let Some(n) = self.trunc {
            if path.len() > n {
                return;
            }
        }
        match self.terms.entry(path) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let nv = &*e.get() + &coeff;
                if nv.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = nv;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let trunc = min_trunc(self.trunc, other.trunc);
        let mut out = AlgebraElement::zero_trunc(trunc);
        for (p, c) in self.terms.iter().chain(other.terms.iter()) {
            out.insert(c.clone(), p.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return AlgebraElement::zero_trunc(self.trunc);
        }
        AlgebraElement {
            terms: self.terms.iter().map(|(p, x)| (p.clone(), x * c)).collect(),
            trunc: self.trunc,
        }
    }

    /// Multiplies by `v` on the left; every term head must have weight 2.
    pub fn v_left(&self, q: &WeightedQuiver) -> Result<Self, AlgebraError> {
        let mut out = AlgebraElement::zero_trunc(self.trunc);
        for (p, c) in &self.terms {
            let mut vpow: Vec<u32> = (0..=p.len()).map(|i| p.bit(i) as u32).collect();
            vpow[0] += 1;
            let (s, np) = normalize_raw(q, &p.arrows, &vpow, p.base)?;
            out.insert(c * &s, np);
        }
        Ok(out)
    }

    /// Multiplies by `v` on the right; every term tail must have weight 2.
    pub fn v_right(&self, q: &WeightedQuiver) -> Result<Self, AlgebraError> {
        let mut out = AlgebraElement::zero_trunc(self.trunc);
        for (p, c) in &self.terms {
            let mut vpow: Vec<u32> = (0..=p.len()).map(|i| p.bit(i) as u32).collect();
            vpow[p.len()] += 1;
            let (s, np) = normalize_raw(q, &p.arrows, &vpow, p.base)?;
            out.insert(c * &s, np);
        }
        Ok(out)
    }

    /// Left multiplication by a ground scalar `re + im*v`.
    pub fn scale_ground_left(&self, x: &GroundScalar, q: &WeightedQuiver) -> Result<Self, AlgebraError> {
        let mut out = self.scale(&x.re);
        if !x.im.is_zero() {
            out = out.add(&self.v_left(q)?.scale(&x.im));
        }
        Ok(out)
    }

    pub fn scale_ground_right(&self, x: &GroundScalar, q: &WeightedQuiver) -> Result<Self, AlgebraError> {
        let mut out = self.scale(&x.re);
        if !x.im.is_zero() {
            out = out.add(&self.v_right(q)?.scale(&x.im));
        }
        Ok(out)
    }

    pub fn truncated(&self, n: Option<usize>) -> Self {
        let trunc = min_trunc(self.trunc, n);
        let mut out = AlgebraElement::zero_trunc(trunc);
        for (p, c) in &self.terms {
            out.insert(c.clone(), p.clone());
        }
        out
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.terms.keys().map(|p| p.len()).min()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(|p| p.len()).max()
    }

    /// Degree-`d` homogeneous part.
    pub fn component(&self, d: usize) -> Self {
        AlgebraElement {
            terms: self.terms.iter().filter(|(p, _)| p.len() == d).map(|(p, c)| (p.clone(), c.clone())).collect(),
            trunc: self.trunc,
        }
    }
}

pub fn min_trunc(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

/// Product in the path algebra. Non-composable term pairs vanish (the
/// idempotents act as a complete orthogonal family).
pub fn mul(q: &WeightedQuiver, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    let trunc = min_trunc(x.trunc, y.trunc);
    let mut out = AlgebraElement::zero_trunc(trunc);
    for (p, cp) in &x.terms {
        for (r, cr) in &y.terms {
            if p.tail(q) != r.head(q) {
                continue;
            }
            if let Some(n) = trunc {
                if p.len() + r.len() > n {
                    continue;
                }
            }
            let arrows: Vec<ArrowIx> = p.arrows.iter().chain(r.arrows.iter()).copied().collect();
            let mut vpow = vec![0u32; arrows.len() + 1];
            for i in 0..=p.len() {
                vpow[i] += p.bit(i) as u32;
            }
            for i in 0..=r.len() {
                vpow[p.len() + i] += r.bit(i) as u32;
            }
            let base = if arrows.is_empty() { p.base } else { 0 };
            let (s, np) = normalize_raw(q, &arrows, &vpow, base)?;
            out.insert(cp * cr * s, np);
        }
    }
    Ok(out)
}

pub fn mul_many(q: &WeightedQuiver, factors: &[&AlgebraElement]) -> Result<AlgebraElement, AlgebraError> {
    let mut it = factors.iter();
    let mut acc = (*it.next().expect("nonempty product")).clone();
    for f in it {
        acc = mul(q, &acc, f)?;
    }
    Ok(acc)
}

/// Isotypic projection `pi_rho` on `e_i <<A>> e_j`.
pub fn pi_rho(
    q: &WeightedQuiver,
    x: &AlgebraElement,
    i: VertexIx,
    j: VertexIx,
    rho: &GaloisElement,
) -> Result<AlgebraElement, AlgebraError> {
    for p in x.terms.keys() {
        if p.head(q) != i || p.tail(q) != j {
            return Err(AlgebraError::WrongSupport(q.vertices[i].id.clone(), q.vertices[j].id.clone()));
        }
    }
    let d = q.pair_gcd(i, j);
    if d == 1 {
        return Ok(x.clone());
    }
    // (1/2) (x + rho(v^-1) x v); rho(v^-1) is -v for the identity, v for theta
    let sign = if rho.is_identity() { -Rational::one() } else { Rational::one() };
    let vxv = x.v_left(q)?.v_right(q)?;
    Ok(x.add(&vxv.scale(&sign)).scale(&Rational::new(1.into(), 2.into())))
}

// ---------------------------------------------------------------------------
// Cyclic canonical form

type Echelon = Vec<(usize, Vec<Rational>)>;

struct CycClass {
    /// canonical paths of the class, sorted
    basis: Vec<Path>,
    /// row-reduced relation rows as (pivot column, dense row)
    rows: Echelon,
}

fn build_cyc_class(q: &WeightedQuiver, word: &[ArrowIx]) -> CycClass {
    let l = word.len();
    // all rotations of the arrow word (deduplicated)
    let mut rotations: Vec<Vec<ArrowIx>> = Vec::new();
    let mut w = word.to_vec();
    for _ in 0..l {
        if !rotations.contains(&w) {
            rotations.push(w.clone());
        }
        w.rotate_left(1);
    }
    // enumerate all decorated paths on these rotations
    let mut paths: Vec<(Vec<ArrowIx>, u64)> = Vec::new();
    for rot in &rotations {
        let mut free_slots = Vec::new();
        for slot in 0..=l {
            let v = if slot == 0 { q.arrows[rot[0]].head } else { q.arrows[rot[slot - 1]].tail };
            if q.weight(v) == 2 {
                free_slots.push(slot);
            }
        }
        for mask in 0..(1u64 << free_slots.len()) {
            let mut bits = 0u64;
            for (b, &slot) in free_slots.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    bits |= 1 << slot;
                }
            }
            paths.push((rot.clone(), bits));
        }
    }
    // canonical basis: normalized forms of all decorated paths
    let mut basis: Vec<Path> = Vec::new();
    for (rot, bits) in &paths {
        let vpow: Vec<u32> = (0..=l).map(|i| (bits >> i & 1) as u32).collect();
        let (_, np) = normalize_raw(q, rot, &vpow, 0).expect("class paths compose");
        if !basis.contains(&np) {
            basis.push(np);
        }
    }
    basis.sort();
    let col = |p: &Path| basis.binary_search(p).expect("path in basis");

    // relation rows: p - rotate(p) over all *raw* decorated paths; rotating
    // after normalization would lose the relations created by the slot merge
    let mut rows: Echelon = Vec::new();
    for (rot, bits) in &paths {
        let vpow: Vec<u32> = (0..=l).map(|i| (bits >> i & 1) as u32).collect();
        let (c1, p1) = normalize_raw(q, rot, &vpow, 0).expect("compose");
        let mut arrows2 = rot.clone();
        arrows2.rotate_left(1);
        let mut vpow2 = vec![0u32; l + 1];
        for i in 1..=l {
            vpow2[i - 1] += vpow[i];
        }
        vpow2[l - 1] += vpow[0];
        let (c2, p2) = normalize_raw(q, &arrows2, &vpow2, 0).expect("compose");
        let mut row = vec![Rational::zero(); basis.len()];
        row[col(&p1)] = &row[col(&p1)] + &c1;
        row[col(&p2)] = &row[col(&p2)] - &c2;
        reduce_and_insert(&mut rows, row);
    }
    CycClass { basis, rows }
}

fn reduce_row(rows: &Echelon, mut row: Vec<Rational>) -> Vec<Rational> {
    for (piv, r) in rows {
        if !row[*piv].is_zero() {
            let f = row[*piv].clone();
            for (x, y) in row.iter_mut().zip(r.iter()) {
                *x = &*x - &(&f * y);
            }
        }
    }
    row
}

fn reduce_and_insert(rows: &mut Echelon, row: Vec<Rational>) {
    let mut row = reduce_row(rows, row);
    if let Some(piv) = row.iter().position(|x| !x.is_zero()) {
        let inv = row[piv].clone();
        for x in row.iter_mut() {
            *x = &*x / &inv;
        }
        // back-substitute into existing rows
        for (_, r) in rows.iter_mut() {
            if !r[piv].is_zero() {
                let f = r[piv].clone();
                for (x, y) in r.iter_mut().zip(row.iter()) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        rows.push((piv, row));
        rows.sort_by_key(|(p, _)| *p);
    }
}

fn necklace_key(word: &[ArrowIx]) -> Vec<ArrowIx> {
    let mut best = word.to_vec();
    let mut w = word.to_vec();
    for _ in 0..word.len() {
        w.rotate_left(1);
        if w < best {
            best = w.clone();
        }
    }
    best
}

/// Canonical representative of a potential modulo cyclic equivalence, exact
/// for finite sums. Terms whose rotation class collapses (for instance
/// 2-cycles with non-inverse labels) are eliminated.
pub fn cyc_canonical(q: &WeightedQuiver, s: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    let mut by_class: HashMap<Vec<ArrowIx>, Vec<(Path, Rational)>> = HashMap::new();
    let mut out = AlgebraElement::zero_trunc(s.trunc);
    for (p, c) in &s.terms {
        if !p.is_cyclic(q) {
            return Err(AlgebraError::NotCyclic(
                q.vertices[p.head(q)].id.clone(),
                q.vertices[p.tail(q)].id.clone(),
            ));
        }
        if p.is_empty() {
            out.insert(c.clone(), p.clone());
            continue;
        }
        by_class.entry(necklace_key(&p.arrows)).or_default().push((p.clone(), c.clone()));
    }
    let mut cache: HashMap<Vec<ArrowIx>, CycClass> = HashMap::new();
    for (key, terms) in by_class {
        let class = cache.entry(key.clone()).or_insert_with(|| build_cyc_class(q, &key));
        let mut vec = vec![Rational::zero(); class.basis.len()];
        for (p, c) in terms {
            let ix = class.basis.binary_search(&p).expect("term path in class basis");
            vec[ix] = &vec[ix] + &c;
        }
        let vec = reduce_row(&class.rows, vec);
        for (ix, c) in vec.into_iter().enumerate() {
            if !c.is_zero() {
                out.insert(c, class.basis[ix].clone());
            }
        }
    }
    Ok(out)
}

/// Whether two potentials are cyclically equivalent (exact decision for
/// finite sums; with truncations, modulo the common truncation degree).
pub fn cyc_equivalent(q: &WeightedQuiver, a: &AlgebraElement, b: &AlgebraElement) -> Result<bool, AlgebraError> {
    let diff = a.sub(b);
    Ok(cyc_canonical(q, &diff)?.is_zero())
}

// ---------------------------------------------------------------------------
// Cyclic derivative

pub fn cyclic_derivative(q: &WeightedQuiver, s: &AlgebraElement, a: ArrowIx) -> Result<AlgebraElement, AlgebraError> {
    let (i, j) = (q.arrows[a].head, q.arrows[a].tail);
    let mut out = AlgebraElement::zero_trunc(s.trunc);
    for (p, c) in &s.terms {
        if !p.is_cyclic(q) {
            return Err(AlgebraError::NotCyclic(
                q.vertices[p.head(q)].id.clone(),
                q.vertices[p.tail(q)].id.clone(),
            ));
        }
        let l = p.len();
        for pos in 0..l {
            if p.arrows[pos] != a {
                continue;
            }
            // cut out occurrence `pos`; the remainder runs from the slot right
            // of the occurrence around the seam to the slot left of it
            let mut arrows = Vec::with_capacity(l - 1);
            arrows.extend_from_slice(&p.arrows[pos + 1..]);
            arrows.extend_from_slice(&p.arrows[..pos]);
            let mut vpow: Vec<u32> = Vec::with_capacity(l);
            for r in pos + 1..l {
                vpow.push(p.bit(r) as u32);
            }
            vpow.push(p.bit(l) as u32 + p.bit(0) as u32); // seam
            for r in 1..=pos {
                vpow.push(p.bit(r) as u32);
            }
            debug_assert_eq!(vpow.len(), l);
            let base = if arrows.is_empty() { q.arrows[a].tail } else { 0 };
            let (sgn, cut) = normalize_raw(q, &arrows, &vpow, base)?;
            let mut piece = AlgebraElement::zero_trunc(s.trunc);
            piece.insert(c * sgn, cut);
            let projected = pi_rho(q, &piece, j, i, &q.arrows[a].label.inverse())?;
            out = out.add(&projected);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Substitution endomorphisms

/// Substitution record: per-arrow image plus per-vertex Galois twist.
#[derive(Clone, Debug, Default)]
pub struct Endomorphism {
    pub images: BTreeMap<ArrowIx, AlgebraElement>,
    /// Vertices of weight 2 where the twist acts by conjugation.
    pub twists: BTreeMap<VertexIx, bool>,
}

impl Endomorphism {
    pub fn identity() -> Self {
        Endomorphism::default()
    }

    pub fn image_of(&self, a: ArrowIx) -> Option<&AlgebraElement> {
        self.images.get(&a)
    }
}

/// Checks support and isotypic conditions for every assigned arrow image.
pub fn validate_endo(q: &WeightedQuiver, e: &Endomorphism) -> Result<(), AlgebraError> {
    for (&v, _) in &e.twists {
        if q.weight(v) != 2 {
            return Err(AlgebraError::UnknownVertex(q.vertices[v].id.clone()));
        }
    }
    for (&a, img) in &e.images {
        let (h, t) = (q.arrows[a].head, q.arrows[a].tail);
        for p in img.terms.keys() {
            if p.is_empty() || p.head(q) != h || p.tail(q) != t {
                return Err(AlgebraError::BadImageSupport {
                    arrow: q.arrows[a].id.clone(),
                    head: q.vertices[h].id.clone(),
                    tail: q.vertices[t].id.clone(),
                });
            }
        }
        // target label: twists conjugate the label, a no-op modulo 2
        let glabel = expected_label(q, e, a);
        let projected = pi_rho(q, img, h, t, &glabel)?;
        if &projected != img {
            return Err(AlgebraError::BadImageIsotype(q.arrows[a].id.clone()));
        }
    }
    Ok(())
}

fn expected_label(q: &WeightedQuiver, e: &Endomorphism, a: ArrowIx) -> GaloisElement {
    let (h, t) = (q.arrows[a].head, q.arrows[a].tail);
    let m = q.pair_gcd(h, t);
    let mut r = q.arrows[a].label.residue;
    if m == 2 {
        if *e.twists.get(&h).unwrap_or(&false) {
            r += 1;
        }
        if *e.twists.get(&t).unwrap_or(&false) {
            r += 1;
        }
    }
    GaloisElement::new(r, m)
}

/// Applies the substitution to an element, truncating at `n`.
pub fn apply_endo(
    q: &WeightedQuiver,
    e: &Endomorphism,
    x: &AlgebraElement,
    n: Option<usize>,
) -> Result<AlgebraElement, AlgebraError> {
    let trunc = min_trunc(x.trunc, n);
    let mut out = AlgebraElement::zero_trunc(trunc);
    let mut arrow_cache: HashMap<ArrowIx, AlgebraElement> = HashMap::new();
    for (p, c) in &x.terms {
        let mut acc = AlgebraElement::zero_trunc(trunc);
        let head = p.head(q);
        let mut start_coeff = c.clone();
        // slot 0 decoration, twisted at its vertex
        if p.bit(0) && *e.twists.get(&head).unwrap_or(&false) {
            start_coeff = -start_coeff;
        }
        let mut start = Path::lazy(head);
        if p.bit(0) {
            start.vbits = 1;
        }
        acc.insert(start_coeff, start);
        for (i, &a) in p.arrows.iter().enumerate() {
            let img = arrow_cache.entry(a).or_insert_with(|| match e.image_of(a) {
                Some(u) => u.clone(),
                None => AlgebraElement::arrow(a, q),
            });
            acc = mul(q, &acc, img)?;
            let slot = i + 1;
            if p.bit(slot) {
                let vtx = p.slot_vertex(q, slot);
                let mut v = AlgebraElement::idempotent(vtx);
                v = v.v_left(q)?;
                if *e.twists.get(&vtx).unwrap_or(&false) {
                    v = v.scale(&-Rational::one());
                }
                acc = mul(q, &acc, &v)?;
            }
            if acc.is_zero() {
                break;
            }
        }
        out = out.add(&acc);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EndoClass {
    ChangeOfArrows,
    Unitriangular { depth: usize },
    General,
    NonInvertible,
}

/// Decides invertibility from the degree-1 coefficient blocks and classifies.
pub fn endo_classify(q: &WeightedQuiver, e: &Endomorphism) -> Result<EndoClass, AlgebraError> {
    validate_endo(q, e)?;
    // canonical degree-1 basis paths per (tail, head)
    let mut blocks: BTreeMap<(VertexIx, VertexIx), Vec<Path>> = BTreeMap::new();
    for (ix, a) in q.arrows.iter().enumerate() {
        let entry = blocks.entry((a.tail, a.head)).or_default();
        for bits in canonical_decorations(q, &[ix]) {
            entry.push(Path { arrows: vec![ix], vbits: bits, base: 0 });
        }
    }
    let mut invertible = true;
    for ((_t, _h), basis) in &blocks {
        let mut basis = basis.clone();
        basis.sort();
        basis.dedup();
        let n = basis.len();
        let mut m = vec![vec![Rational::zero(); n]; n];
        for (col, bp) in basis.iter().enumerate() {
            // image of the basis path under the degree-1 part
            let mut el = AlgebraElement::zero();
            el.insert(Rational::one(), bp.clone());
            let img = apply_endo(q, e, &el, None)?;
            for (p, c) in &img.terms {
                if p.len() == 1 {
                    let row = basis.binary_search(p).map_err(|_| AlgebraError::NotInvertible)?;
                    m[row][col] = &m[row][col] + c;
                }
            }
        }
        if rank_dense(&mut m) < n {
            invertible = false;
        }
    }
    if !invertible {
        return Ok(EndoClass::NonInvertible);
    }
    let mut pure_degree_one = true;
    let mut unitriangular = true;
    let mut depth: Option<usize> = None;
    for (ix, _) in q.arrows.iter().enumerate() {
        let img = match e.image_of(ix) {
            None => continue,
            Some(u) => u,
        };
        let lin = img.component(1);
        let tail: AlgebraElement = AlgebraElement {
            terms: img.terms.iter().filter(|(p, _)| p.len() >= 2).map(|(p, c)| (p.clone(), c.clone())).collect(),
            trunc: img.trunc,
        };
        if !tail.is_zero() {
            pure_degree_one = false;
            if let Some(d) = tail.min_degree() {
                let dd = d - 1;
                depth = Some(depth.map_or(dd, |x: usize| x.min(dd)));
            }
        }
        let mut unit = AlgebraElement::arrow(ix, q);
        unit.trunc = img.trunc;
        if lin != unit.component(1) {
            unitriangular = false;
        }
    }
    if pure_degree_one {
        return Ok(EndoClass::ChangeOfArrows);
    }
    if unitriangular {
        return Ok(EndoClass::Unitriangular { depth: depth.unwrap_or(1) });
    }
    Ok(EndoClass::General)
}

fn rank_dense(m: &mut [Vec<Rational>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        if let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) {
            m.swap(r, p);
            let inv = m[r][c].clone();
            for i in 0..rows {
                if i != r && !m[i][c].is_zero() {
                    let f = &m[i][c] / &inv;
                    for cc in c..cols {
                        let sub = &f * &m[r][cc];
                        m[i][cc] = &m[i][cc] - &sub;
                    }
                }
            }
            r += 1;
        }
    }
    r
}

// ---------------------------------------------------------------------------
// Path enumeration (shared by the Jacobian machinery)

/// All canonical paths of length `0..=n`, grouped by length.
pub fn enumerate_paths(q: &WeightedQuiver, n: usize) -> Vec<Vec<Path>> {
    let mut by_len: Vec<Vec<Path>> = vec![Vec::new(); n + 1];
    for v in 0..q.vertices.len() {
        by_len[0].push(Path::lazy(v));
        if q.weight(v) == 2 {
            by_len[0].push(Path { arrows: Vec::new(), vbits: 1, base: v });
        }
    }
    // canonical decorated words: a bit sits at slot i only if it cannot move
    // right (slot l, or the next arrow is not crossable)
    let mut words: Vec<Vec<ArrowIx>> = (0..q.arrows.len()).map(|a| vec![a]).collect();
    for l in 1..=n {
        let mut next_words = Vec::new();
        for w in &words {
            let decorations = canonical_decorations(q, w);
            for bits in decorations {
                by_len[l].push(Path { arrows: w.clone(), vbits: bits, base: 0 });
            }
            if l < n {
                let t = q.arrows[*w.last().unwrap()].tail;
                for b in 0..q.arrows.len() {
                    if q.arrows[b].head == t {
                        let mut w2 = w.clone();
                        w2.push(b);
                        next_words.push(w2);
                    }
                }
            }
        }
        words = next_words;
    }
    for v in by_len.iter_mut() {
        v.sort();
    }
    by_len
}

fn canonical_decorations(q: &WeightedQuiver, w: &[ArrowIx]) -> Vec<u64> {
    let l = w.len();
    let mut free = Vec::new();
    for slot in 0..=l {
        let v = if slot == 0 { q.arrows[w[0]].head } else { q.arrows[w[slot - 1]].tail };
        if q.weight(v) != 2 {
            continue;
        }
        if slot == l || !crossable(q, w[slot]) {
            free.push(slot);
        }
    }
    (0..(1u64 << free.len()))
        .map(|mask| {
            let mut bits = 0u64;
            for (i, &slot) in free.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    bits |= 1 << slot;
                }
            }
            bits
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Text format

pub fn format_path(q: &WeightedQuiver, p: &Path) -> String {
    if p.is_empty() {
        let mut s = format!("e_{}", q.vertices[p.base].id);
        if p.bit(0) {
            s.push_str(".v");
        }
        return s;
    }
    let mut parts = Vec::new();
    if p.bit(0) {
        parts.push("v".to_string());
    }
    for (i, &a) in p.arrows.iter().enumerate() {
        let mut f = q.arrows[a].id.clone();
        if p.bit(i + 1) {
            f.push_str(".v");
        }
        parts.push(f);
    }
    parts.join("*")
}

pub fn format_element(q: &WeightedQuiver, x: &AlgebraElement) -> String {
    if x.terms.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (p, c) in &x.terms {
        let neg = c.is_negative();
        let mag = if neg { -c.clone() } else { c.clone() };
        if s.is_empty() {
            if neg {
                s.push_str("- ");
            }
        } else if neg {
            s.push_str(" - ");
        } else {
            s.push_str(" + ");
        }
        if mag.is_one() {
            let _ = write!(s, "{}", format_path(q, p));
        } else {
            let _ = write!(s, "({})*{}", format_rational(&mag), format_path(q, p));
        }
    }
    s
}

/// Parses the textual element syntax: terms joined by `+`/`-`, factors joined
/// by `*`. Factors are a rational coefficient (optionally parenthesized), a
/// bare `v`, an arrow id with optional `.v` suffix, or `e_<vertex>` with
/// optional `.v` suffix.
pub fn parse_element(q: &WeightedQuiver, text: &str) -> Result<AlgebraElement, AlgebraError> {
    let mut out = AlgebraElement::zero();
    let mut term = String::new();
    let mut terms: Vec<(i64, String)> = Vec::new();
    let mut sign = 1i64;
    let mut depth = 0i32;
    for ch in text.chars() {
        match ch {
            '(' => {
                depth += 1;
                term.push(ch);
            }
            ')' => {
                depth -= 1;
                term.push(ch);
            }
            '+' | '-' if depth == 0 => {
                if !term.trim().is_empty() {
                    terms.push((sign, term.clone()));
                }
                term.clear();
                sign = if ch == '-' { -1 } else { 1 };
            }
            _ => term.push(ch),
        }
    }
    if !term.trim().is_empty() {
        terms.push((sign, term));
    }
    for (sgn, t) in terms {
        let (coeff, path_el) = parse_term(q, &t)?;
        let signed = coeff * Rational::from_integer(sgn.into());
        out = out.add(&path_el.scale(&signed));
    }
    Ok(out)
}

fn parse_term(q: &WeightedQuiver, t: &str) -> Result<(Rational, AlgebraElement), AlgebraError> {
    let t = t.trim();
    if t == "0" {
        return Ok((Rational::zero(), AlgebraElement::zero()));
    }
    let mut coeff = Rational::one();
    let mut arrows: Vec<ArrowIx> = Vec::new();
    let mut vpow: Vec<u32> = vec![0];
    let mut base: Option<VertexIx> = None;
    for raw in t.split('*') {
        let f = raw.trim();
        if f.is_empty() {
            return Err(AlgebraError::Parse(format!("empty factor in {t:?}")));
        }
        let inner = f.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(f);
        if f == "v" {
            *vpow.last_mut().unwrap() += 1;
            continue;
        }
        if let Ok(r) = parse_rational(inner) {
            coeff = coeff * r;
            continue;
        }
        let (name, has_v) = match inner.strip_suffix(".v") {
            Some(n) => (n, true),
            None => (inner, false),
        };
        if let Some(vname) = name.strip_prefix("e_") {
            let v = q.vertex_ix(vname).map_err(|_| AlgebraError::UnknownVertex(vname.to_string()))?;
            base = Some(v);
            if has_v {
                *vpow.last_mut().unwrap() += 1;
            }
            continue;
        }
        let a = q.arrow_ix(name).map_err(|_| AlgebraError::UnknownArrow(name.to_string()))?;
        arrows.push(a);
        vpow.push(if has_v { 1 } else { 0 });
    }
    if arrows.is_empty() && base.is_none() {
        return Err(AlgebraError::Parse(format!("term {t:?} names no arrow or idempotent")));
    }
    let b = base.unwrap_or(0);
    let (s, p) = normalize_raw(q, &arrows, &vpow, b)?;
    let mut el = AlgebraElement::zero();
    el.insert(s, p);
    Ok((coeff, el))
}
