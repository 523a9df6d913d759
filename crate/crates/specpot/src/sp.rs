//! Species-with-potential bundles and their mutation theory: premutation,
//! constructive reduction, mutation, restriction, truncated Jacobian
//! dimensions, right-equivalence verification and non-degeneracy probes.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::SpError;
use crate::pathalg::{
    apply_endo, cyc_canonical, cyc_equivalent, cyclic_derivative, endo_classify, enumerate_paths,
    min_trunc, mul, normalize_raw, pi_rho, AlgebraElement, EndoClass, Endomorphism, Path,
};
use crate::scalars::{GroundScalar, Rational};
use crate::wquiver::{
    basis_count, premutate_quiver, restrict_quiver, wq_isomorphic, ArrowIx, PremutedQuiver,
    VertexIx, WeightedQuiver,
};

#[derive(Clone, Debug)]
pub struct SpeciesWithPotential {
    pub quiver: WeightedQuiver,
    pub potential: AlgebraElement,
}

impl SpeciesWithPotential {
    /// Stores the potential in cyclic canonical form.
    pub fn new(quiver: WeightedQuiver, potential: AlgebraElement) -> Result<Self, SpError> {
        let potential = cyc_canonical(&quiver, &potential).map_err(SpError::Algebra)?;
        Ok(SpeciesWithPotential { quiver, potential })
    }

    pub fn trunc(&self) -> Option<usize> {
        self.potential.trunc
    }
}

/// Result of the splitting reduction.
#[derive(Clone, Debug)]
pub struct SplitResult {
    pub reduced: SpeciesWithPotential,
    pub trivial: SpeciesWithPotential,
    /// Substitutions applied, in application order.
    pub witness: Vec<Endomorphism>,
}

// ---------------------------------------------------------------------------
// Premutation

/// Rewrites the potential on the premutated species: factors through `k`
/// become sums over labeled composite arrows and the star-composite triangle
/// terms are appended.
pub fn premutate(
    sp: &SpeciesWithPotential,
    k: VertexIx,
) -> Result<(PremutedQuiver, SpeciesWithPotential), SpError> {
    let q = &sp.quiver;
    let pre = premutate_quiver(q, k)?;
    let nq = &pre.quiver;
    let trunc = sp.potential.trunc;
    let mut out = AlgebraElement::zero_trunc(trunc);

    // composites indexed by (b, a, omega)
    let mut comps: BTreeMap<(ArrowIx, ArrowIx, u64), Vec<ArrowIx>> = BTreeMap::new();
    for c in &pre.composites {
        let b = q.arrow_ix(&c.b)?;
        let a = q.arrow_ix(&c.a)?;
        comps.entry((b, a, c.omega_index)).or_default().push(nq.arrow_ix(&c.id)?);
    }

    for (p0, coeff0) in &sp.potential.terms {
        if p0.is_empty() {
            if p0.base == k {
                return Err(SpError::StuckAt(q.vertices[k].id.clone()));
            }
            out.insert(coeff0.clone(), p0.clone());
            continue;
        }
        // rotate so the base vertex is not k
        let mut coeff = coeff0.clone();
        let mut path = p0.clone();
        let l = path.len();
        let mut rot = 0;
        while path.head(q) == k {
            let (c2, p2) = rotate_path(q, &coeff, &path);
            coeff = c2;
            path = p2;
            rot += 1;
            if rot > l {
                return Err(SpError::StuckAt(q.vertices[k].id.clone()));
            }
        }
        #[derive(Clone)]
        enum Piece {
            Arrow(ArrowIx, bool),
            Bracket(ArrowIx, ArrowIx, u64, bool),
        }
        let mut pieces: Vec<Piece> = Vec::new();
        let mut lead_v = path.bit(0);
        let mut i = 0usize;
        while i < l {
            let a_ix = path.arrows[i];
            let arr = &q.arrows[a_ix];
            if arr.tail == k {
                let b_old = a_ix;
                debug_assert!(i + 1 < l, "base is not k, so k-factors are interior");
                let a_old = path.arrows[i + 1];
                debug_assert_eq!(q.arrows[a_old].head, k);
                let mut omega = path.bit(i + 1) as u64;
                if omega == 1 && basis_count(q, a_old, b_old)? == 1 {
                    // the slot decoration is not in the eigenbasis factor;
                    // move it across whichever neighbor allows it
                    omega = 0;
                    if q.pair_gcd(q.arrows[b_old].head, k) == 2 {
                        if !q.arrows[b_old].label.is_identity() {
                            coeff = -coeff;
                        }
                        if i == 0 {
                            lead_v = merge_vbit(lead_v, &mut coeff);
                        } else {
                            match pieces.last_mut().expect("previous piece") {
                                Piece::Arrow(_, v) | Piece::Bracket(_, _, _, v) => {
                                    *v = merge_vbit(*v, &mut coeff)
                                }
                            }
                        }
                    } else {
                        if !q.arrows[a_old].label.is_identity() {
                            coeff = -coeff;
                        }
                        let next = path.bit(i + 2);
                        let merged = merge_vbit(next, &mut coeff);
                        path.vbits = (path.vbits & !(1 << (i + 2))) | ((merged as u64) << (i + 2));
                    }
                }
                pieces.push(Piece::Bracket(b_old, a_old, omega, path.bit(i + 2)));
                i += 2;
            } else {
                pieces.push(Piece::Arrow(nq.arrow_ix(&arr.id)?, path.bit(i + 1)));
                i += 1;
            }
        }
        // expand bracket sums multiplicatively
        let mut words: Vec<(Rational, Vec<ArrowIx>, Vec<bool>)> = vec![(coeff, Vec::new(), vec![lead_v])];
        for piece in &pieces {
            let mut next = Vec::new();
            for (c, arrs, bits) in &words {
                match piece {
                    Piece::Arrow(a, v) => {
                        let mut arrs = arrs.clone();
                        let mut bits = bits.clone();
                        arrs.push(*a);
                        bits.push(*v);
                        next.push((c.clone(), arrs, bits));
                    }
                    Piece::Bracket(b, a, omega, v) => {
                        for &cid in comps.get(&(*b, *a, *omega)).map(|v| v.as_slice()).unwrap_or(&[]) {
                            let mut arrs = arrs.clone();
                            let mut bits = bits.clone();
                            arrs.push(cid);
                            bits.push(*v);
                            next.push((c.clone(), arrs, bits));
                        }
                    }
                }
            }
            words = next;
        }
        for (c, arrs, bits) in words {
            let vpow: Vec<u32> = bits.iter().map(|&b| b as u32).collect();
            let (s, np) = normalize_raw(nq, &arrs, &vpow, 0).map_err(SpError::Algebra)?;
            out.insert(c * s, np);
        }
    }

    // triangle terms: (1/|B|) sum_w sum_rho  w^{-1} b* [b w a]_rho a*
    for (&(b, a, omega), ids) in &comps {
        let nb = basis_count(q, a, b)?;
        let coeff_base = Rational::new(1.into(), (nb as i64).into());
        let bs = nq.arrow_ix(&pre.stars[&q.arrows[b].id])?;
        let as_ = nq.arrow_ix(&pre.stars[&q.arrows[a].id])?;
        for &cid in ids {
            let mut c = coeff_base.clone();
            if omega == 1 {
                // w^{-1} = -v
                c = -c;
            }
            let vpow = vec![omega as u32, 0, 0, 0];
            let (s, np) = normalize_raw(nq, &[bs, cid, as_], &vpow, 0).map_err(SpError::Algebra)?;
            out.insert(c * s, np);
        }
    }

    let spm = SpeciesWithPotential::new(pre.quiver.clone(), out)?;
    Ok((pre, spm))
}

fn merge_vbit(existing: bool, coeff: &mut Rational) -> bool {
    if existing {
        *coeff = -coeff.clone();
        false
    } else {
        true
    }
}

fn rotate_path(q: &WeightedQuiver, coeff: &Rational, p: &Path) -> (Rational, Path) {
    let l = p.len();
    let mut arrows = p.arrows.clone();
    arrows.rotate_left(1);
    let mut vpow = vec![0u32; l + 1];
    for i in 1..=l {
        vpow[i - 1] += p.bit(i) as u32;
    }
    vpow[l - 1] += p.bit(0) as u32;
    let (s, np) = normalize_raw(q, &arrows, &vpow, p.base).expect("rotation composes");
    (coeff * s, np)
}

// ---------------------------------------------------------------------------
// Splitting

/// Where the ground-scalar coordinate of a 2-cycle pairing lives: at the slot
/// between the arrows, at the seam slot, or nowhere (rational pairing).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PairSlot {
    Middle,
    Outer,
    Rational,
}

/// Reads a canonical degree-2 term as `row * mu * col` (slot between the
/// arrows) or `mu * row * col` (seam slot), rotating so `arrows[0]` equals
/// `want_row`. The seam decoration is moved cyclically.
fn orient_two_cycle(
    q: &WeightedQuiver,
    p: &Path,
    coeff: &Rational,
    want_row: ArrowIx,
) -> (ArrowIx, ArrowIx, PairSlot, GroundScalar) {
    debug_assert_eq!(p.len(), 2);
    let (mut c, mut path) = (coeff.clone(), p.clone());
    if path.arrows[0] != want_row {
        let (c2, p2) = rotate_path(q, &c, &path);
        c = c2;
        path = p2;
    }
    let (r, col) = (path.arrows[0], path.arrows[1]);
    let middle_w = q.weight(q.arrows[r].tail);
    let outer_w = q.weight(q.arrows[r].head);
    let mut sign = Rational::one();
    // seam move: X*v ~cyc v*X
    let mut b0 = path.bit(0);
    if path.bit(2) {
        if b0 {
            sign = -sign;
            b0 = false;
        } else {
            b0 = true;
        }
    }
    let mut vcount = path.bit(1) as u32;
    let slot;
    if middle_w == 2 {
        if b0 {
            // cross the row arrow towards the middle slot
            if !q.arrows[r].label.is_identity() {
                sign = -sign;
            }
            vcount += 1;
        }
        if vcount >= 2 {
            sign = -sign;
            vcount -= 2;
        }
        slot = PairSlot::Middle;
    } else if outer_w == 2 {
        debug_assert_eq!(vcount, 0, "middle slot has weight 1");
        vcount = b0 as u32;
        slot = PairSlot::Outer;
    } else {
        debug_assert!(!b0 && vcount == 0);
        slot = PairSlot::Rational;
    }
    let mu = if vcount % 2 == 1 {
        GroundScalar::new(Rational::zero(), &c * &sign)
    } else {
        GroundScalar::new(&c * &sign, Rational::zero())
    };
    (r, col, slot, mu)
}

fn apply_sub(
    q: &WeightedQuiver,
    e: &Endomorphism,
    s: &AlgebraElement,
    trunc: Option<usize>,
) -> Result<AlgebraElement, SpError> {
    let t = apply_endo(q, e, s, trunc).map_err(SpError::Algebra)?;
    cyc_canonical(q, &t).map_err(SpError::Algebra)
}

/// Splits off the trivial part: diagonalizes the degree-2 component by a
/// change of arrows, then cancels the higher terms hanging off the trivial
/// 2-cycles by unitriangular substitutions of strictly increasing depth.
pub fn split(sp: &SpeciesWithPotential) -> Result<SplitResult, SpError> {
    let q = &sp.quiver;
    let max_deg = sp.potential.max_degree().unwrap_or(0);
    let work_trunc = sp.potential.trunc.or(Some((2 * max_deg).max(4)));
    let mut s = cyc_canonical(q, &sp.potential.truncated(work_trunc)).map_err(SpError::Algebra)?;
    let mut witness: Vec<Endomorphism> = Vec::new();

    // Stage 1: diagonalize the degree-2 component.
    let mut pairs: Vec<(ArrowIx, ArrowIx)> = Vec::new();
    loop {
        let used: BTreeSet<ArrowIx> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        let pivot = s
            .component(2)
            .terms
            .keys()
            .find(|p| p.arrows.iter().all(|a| !used.contains(a)))
            .cloned();
        let Some(pv) = pivot else { break };
        let (x, y) = (pv.arrows[0], pv.arrows[1]);
        // rescale x so the pivot pairing becomes exactly 1
        let mut lam = GroundScalar::zero();
        let mut lam_slot = PairSlot::Rational;
        for (p, c) in s.component(2).terms.iter() {
            if p.arrows.contains(&x) && p.arrows.contains(&y) {
                let (_, _, slot, mu) = orient_two_cycle(q, p, c, x);
                lam = lam.add(&mu);
                lam_slot = slot;
            }
        }
        let inv = lam.inv().map_err(|e| SpError::Algebra(e.into()))?;
        let mut resc = Endomorphism::identity();
        let ximg = match lam_slot {
            PairSlot::Middle => AlgebraElement::arrow(x, q)
                .scale_ground_right(&inv, q)
                .map_err(SpError::Algebra)?,
            PairSlot::Outer => AlgebraElement::arrow(x, q)
                .scale_ground_left(&inv, q)
                .map_err(SpError::Algebra)?,
            PairSlot::Rational => AlgebraElement::arrow(x, q).scale(&inv.re),
        };
        resc.images.insert(x, ximg);
        s = apply_sub(q, &resc, &s, work_trunc)?;
        witness.push(resc);
        // clear the rest of the pivot row and column
        loop {
            let deg2 = s.component(2);
            let mut row_rest = AlgebraElement::zero_trunc(work_trunc);
            let mut col_rest = AlgebraElement::zero_trunc(work_trunc);
            for (p, c) in &deg2.terms {
                let has_x = p.arrows.contains(&x);
                let has_y = p.arrows.contains(&y);
                if has_x && has_y {
                    continue;
                }
                if has_x {
                    // term x*mu*c or mu*x*c ~cyc x*(mu c) or x*(c v^..)
                    let (_, col, slot, mu) = orient_two_cycle(q, p, c, x);
                    let el = match slot {
                        PairSlot::Middle => AlgebraElement::arrow(col, q)
                            .scale_ground_left(&mu, q)
                            .map_err(SpError::Algebra)?,
                        PairSlot::Outer => AlgebraElement::arrow(col, q)
                            .scale_ground_right(&mu, q)
                            .map_err(SpError::Algebra)?,
                        PairSlot::Rational => AlgebraElement::arrow(col, q).scale(&mu.re),
                    };
                    row_rest = row_rest.add(&el);
                } else if has_y {
                    let other = if p.arrows[0] == y { p.arrows[1] } else { p.arrows[0] };
                    let (_, col, slot, mu) = orient_two_cycle(q, p, c, other);
                    debug_assert_eq!(col, y);
                    let el = match slot {
                        PairSlot::Middle => AlgebraElement::arrow(other, q)
                            .scale_ground_right(&mu, q)
                            .map_err(SpError::Algebra)?,
                        PairSlot::Outer => AlgebraElement::arrow(other, q)
                            .scale_ground_left(&mu, q)
                            .map_err(SpError::Algebra)?,
                        PairSlot::Rational => AlgebraElement::arrow(other, q).scale(&mu.re),
                    };
                    col_rest = col_rest.add(&el);
                }
            }
            if row_rest.is_zero() && col_rest.is_zero() {
                break;
            }
            let mut fix = Endomorphism::identity();
            if !row_rest.is_zero() {
                let proj = pi_rho(q, &row_rest, q.arrows[y].head, q.arrows[y].tail, &q.arrows[y].label)
                    .map_err(SpError::Algebra)?;
                fix.images.insert(y, AlgebraElement::arrow(y, q).sub(&proj));
            }
            if !col_rest.is_zero() {
                let proj = pi_rho(q, &col_rest, q.arrows[x].head, q.arrows[x].tail, &q.arrows[x].label)
                    .map_err(SpError::Algebra)?;
                fix.images.insert(x, AlgebraElement::arrow(x, q).sub(&proj));
            }
            s = apply_sub(q, &fix, &s, work_trunc)?;
            witness.push(fix);
        }
        pairs.push((x, y));
    }

    // Stage 2: unitriangular corrections of increasing depth.
    let trivial_arrows: BTreeSet<ArrowIx> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut guard = 0usize;
    loop {
        let mut corrections: BTreeMap<ArrowIx, AlgebraElement> = BTreeMap::new();
        for (p, c) in &s.terms {
            if p.len() <= 2 || !p.arrows.iter().any(|a| trivial_arrows.contains(a)) {
                continue;
            }
            let pos = p.arrows.iter().position(|a| trivial_arrows.contains(a)).unwrap();
            let mut coeff = c.clone();
            let mut path = p.clone();
            for _ in 0..pos {
                let (c2, p2) = rotate_path(q, &coeff, &path);
                coeff = c2;
                path = p2;
            }
            let lead = path.arrows[0];
            let partner = pairs
                .iter()
                .find_map(|&(a, b)| (a == lead).then_some(b).or((b == lead).then_some(a)))
                .expect("lead arrow is trivial");
            // term = v^{b0} lead w  ~cyc  lead w v^{b0}
            let arrows = path.arrows[1..].to_vec();
            let mut vpow: Vec<u32> = (1..=path.len()).map(|i| path.bit(i) as u32).collect();
            let last = vpow.len() - 1;
            vpow[last] += path.bit(0) as u32;
            let (sgn, w) = normalize_raw(q, &arrows, &vpow, 0).map_err(SpError::Algebra)?;
            let mut piece = AlgebraElement::zero_trunc(work_trunc);
            piece.insert(coeff * sgn, w);
            let entry = corrections
                .entry(partner)
                .or_insert_with(|| AlgebraElement::zero_trunc(work_trunc));
            *entry = entry.add(&piece);
        }
        if corrections.is_empty() {
            break;
        }
        guard += 1;
        assert!(
            guard <= work_trunc.unwrap_or(64) + 4,
            "splitting iteration failed to converge"
        );
        let mut step = Endomorphism::identity();
        for (arrow, corr) in corrections {
            let proj = pi_rho(q, &corr, q.arrows[arrow].head, q.arrows[arrow].tail, &q.arrows[arrow].label)
                .map_err(SpError::Algebra)?;
            step.images.insert(arrow, AlgebraElement::arrow(arrow, q).sub(&proj));
        }
        s = apply_sub(q, &step, &s, work_trunc)?;
        witness.push(step);
    }

    // Assemble the two parts.
    let mut reduced_q = WeightedQuiver::new();
    let mut trivial_q = WeightedQuiver::new();
    for v in &q.vertices {
        reduced_q.add_vertex(&v.id, v.weight).map_err(SpError::Quiver)?;
        trivial_q.add_vertex(&v.id, v.weight).map_err(SpError::Quiver)?;
    }
    for (ix, a) in q.arrows.iter().enumerate() {
        let target = if trivial_arrows.contains(&ix) { &mut trivial_q } else { &mut reduced_q };
        target
            .add_arrow_labeled(&a.id, &q.vertices[a.tail].id, &q.vertices[a.head].id, a.label.clone())
            .map_err(SpError::Quiver)?;
    }
    let mut reduced_pot = AlgebraElement::zero_trunc(s.trunc);
    let mut trivial_pot = AlgebraElement::zero_trunc(s.trunc);
    for (p, c) in &s.terms {
        let all_trivial = p.len() == 2 && p.arrows.iter().all(|a| trivial_arrows.contains(a));
        let (tq, pot) = if all_trivial {
            (&trivial_q, &mut trivial_pot)
        } else {
            assert!(
                !p.arrows.iter().any(|a| trivial_arrows.contains(a)),
                "reduced part still touches a trivial arrow"
            );
            (&reduced_q, &mut reduced_pot)
        };
        let arrows: Vec<ArrowIx> = p
            .arrows
            .iter()
            .map(|a| tq.arrow_ix(&q.arrows[*a].id).expect("arrow present in part"))
            .collect();
        let vpow: Vec<u32> = (0..=p.len()).map(|i| p.bit(i) as u32).collect();
        let (sgn, np) = normalize_raw(tq, &arrows, &vpow, p.base).map_err(SpError::Algebra)?;
        pot.insert(c * sgn, np);
    }
    Ok(SplitResult {
        reduced: SpeciesWithPotential::new(reduced_q, reduced_pot)?,
        trivial: SpeciesWithPotential::new(trivial_q, trivial_pot)?,
        witness,
    })
}

/// Mutation: reduced part of the premutation.
pub fn mutate(sp: &SpeciesWithPotential, k: VertexIx) -> Result<SpeciesWithPotential, SpError> {
    let (_, pre) = premutate(sp, k)?;
    Ok(split(&pre)?.reduced)
}

// ---------------------------------------------------------------------------
// Restriction

/// Kills every arrow incident to a vertex outside `keep`; potential terms
/// through dead arrows vanish.
pub fn restrict_sp(sp: &SpeciesWithPotential, keep: &BTreeSet<String>) -> Result<SpeciesWithPotential, SpError> {
    let q = &sp.quiver;
    let rq = restrict_quiver(q, keep)?;
    let mut pot = AlgebraElement::zero_trunc(sp.potential.trunc);
    'term: for (p, c) in &sp.potential.terms {
        let mut arrows = Vec::with_capacity(p.len());
        for &a in &p.arrows {
            match rq.arrow_ix(&q.arrows[a].id) {
                Ok(ix) => arrows.push(ix),
                Err(_) => continue 'term,
            }
        }
        let vpow: Vec<u32> = (0..=p.len()).map(|i| p.bit(i) as u32).collect();
        let (sgn, np) = normalize_raw(&rq, &arrows, &vpow, p.base).map_err(SpError::Algebra)?;
        pot.insert(c * sgn, np);
    }
    SpeciesWithPotential::new(rq, pot)
}

// ---------------------------------------------------------------------------
// Jacobian dimensions

/// Per-degree dimensions of the path algebra modulo the Jacobian ideal and
/// degree `n+1`, by exact elimination over the canonical path basis.
pub fn jacobian_dims(sp: &SpeciesWithPotential, n: usize) -> Result<Vec<usize>, SpError> {
    let q = &sp.quiver;
    let by_len = enumerate_paths(q, n);
    let mut index: BTreeMap<Path, usize> = BTreeMap::new();
    let mut flat: Vec<Path> = Vec::new();
    for level in &by_len {
        for p in level {
            index.insert(p.clone(), flat.len());
            flat.push(p.clone());
        }
    }
    let to_vec = |el: &AlgebraElement| -> Vec<(usize, Rational)> {
        let mut v: Vec<(usize, Rational)> = el
            .terms
            .iter()
            .filter(|(p, _)| p.len() <= n)
            .map(|(p, c)| (*index.get(p).expect("canonical path enumerated"), c.clone()))
            .collect();
        v.sort_by_key(|(i, _)| *i);
        v
    };

    fn reduce(
        rows: &BTreeMap<usize, Vec<(usize, Rational)>>,
        mut v: Vec<(usize, Rational)>,
    ) -> Vec<(usize, Rational)> {
        loop {
            let Some(&(piv, ref c)) = v.first() else { return v };
            let Some(row) = rows.get(&piv) else { return v };
            let f = -c.clone();
            v = sparse_axpy(&v, row, &f);
        }
    }

    let mut rows: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
    let mut work: Vec<Vec<(usize, Rational)>> = Vec::new();
    let s = sp.potential.truncated(Some(n + 1));
    for a in 0..q.arrows.len() {
        let d = cyclic_derivative(q, &s, a).map_err(SpError::Algebra)?.truncated(Some(n));
        if !d.is_zero() {
            work.push(to_vec(&d));
        }
    }

    while let Some(v) = work.pop() {
        let v = reduce(&rows, v);
        if v.is_empty() {
            continue;
        }
        let inv = v[0].1.clone();
        let v: Vec<(usize, Rational)> = v.into_iter().map(|(i, c)| (i, c / &inv)).collect();
        let piv = v[0].0;
        let el = vec_to_element(&flat, &v, Some(n));
        for a in 0..q.arrows.len() {
            let arrow = AlgebraElement::arrow(a, q);
            for prod in [mul(q, &arrow, &el), mul(q, &el, &arrow)] {
                let prod = prod.map_err(SpError::Algebra)?;
                if !prod.is_zero() {
                    work.push(to_vec(&prod));
                }
            }
        }
        for vertex in 0..q.vertices.len() {
            if q.weight(vertex) == 2 {
                let vd = AlgebraElement::idempotent(vertex).v_left(q).map_err(SpError::Algebra)?;
                for prod in [mul(q, &vd, &el), mul(q, &el, &vd)] {
                    let prod = prod.map_err(SpError::Algebra)?;
                    if !prod.is_zero() {
                        work.push(to_vec(&prod));
                    }
                }
            }
        }
        rows.insert(piv, v);
    }

    let mut dims = Vec::with_capacity(n + 1);
    let mut offset = 0usize;
    for level in by_len.iter() {
        let lo = offset;
        let hi = offset + level.len();
        let pivots = rows.range(lo..hi).count();
        dims.push(level.len() - pivots);
        offset = hi;
    }
    Ok(dims)
}

fn sparse_axpy(
    v: &[(usize, Rational)],
    row: &[(usize, Rational)],
    f: &Rational,
) -> Vec<(usize, Rational)> {
    let mut out = Vec::with_capacity(v.len() + row.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < row.len() {
        if j >= row.len() || (i < v.len() && v[i].0 < row[j].0) {
            out.push(v[i].clone());
            i += 1;
        } else if i >= v.len() || row[j].0 < v[i].0 {
            out.push((row[j].0, f * &row[j].1));
            j += 1;
        } else {
            let c = &v[i].1 + &(f * &row[j].1);
            if !c.is_zero() {
                out.push((v[i].0, c));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn vec_to_element(flat: &[Path], v: &[(usize, Rational)], trunc: Option<usize>) -> AlgebraElement {
    let mut el = AlgebraElement::zero_trunc(trunc);
    for (i, c) in v {
        el.insert(c.clone(), flat[*i].clone());
    }
    el
}

// ---------------------------------------------------------------------------
// Right-equivalence verification

/// Applies the witness substitutions in order to the first potential and
/// decides exact cyclic equality with the second, after checking that every
/// step is an untwisted invertible substitution.
pub fn verify_right_equiv(
    sp1: &SpeciesWithPotential,
    sp2: &SpeciesWithPotential,
    witness: &[Endomorphism],
) -> Result<bool, SpError> {
    let q = &sp1.quiver;
    let trunc = min_trunc(sp1.potential.trunc, sp2.potential.trunc);
    let mut cur = sp1.potential.truncated(trunc);
    for e in witness {
        if !e.twists.is_empty() {
            return Err(SpError::Algebra(crate::error::AlgebraError::TwistedWitness));
        }
        if endo_classify(q, e).map_err(SpError::Algebra)? == EndoClass::NonInvertible {
            return Err(SpError::Algebra(crate::error::AlgebraError::NotInvertible));
        }
        cur = apply_endo(q, e, &cur, trunc).map_err(SpError::Algebra)?;
    }
    cyc_equivalent(q, &cur, &sp2.potential.truncated(trunc)).map_err(SpError::Algebra)
}

// ---------------------------------------------------------------------------
// Non-degeneracy probe

#[derive(Clone, Debug)]
pub struct ProbeStep {
    pub vertex: String,
    pub two_acyclic: bool,
    /// order-insensitive digest of the mutated quiver
    pub quiver_hash: u64,
}

/// Deterministic digest of a weighted quiver: weights plus the arrow
/// multiset with labels, invariant under arrow reordering.
pub fn quiver_digest(q: &WeightedQuiver) -> u64 {
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};
    let mut rows: Vec<(String, String, u64, u64, u64)> = q
        .arrows
        .iter()
        .map(|a| {
            (
                q.vertices[a.tail].id.clone(),
                q.vertices[a.head].id.clone(),
                q.vertices[a.tail].weight,
                q.vertices[a.head].weight,
                a.label.residue,
            )
        })
        .collect();
    rows.sort();
    let mut weights: Vec<(String, u64)> =
        q.vertices.iter().map(|v| (v.id.clone(), v.weight)).collect();
    weights.sort();
    let mut h = DefaultHasher::new();
    (rows, weights).hash(&mut h);
    h.finish()
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub sequences: Vec<Vec<ProbeStep>>,
    pub failures: usize,
}

/// Runs each mutation sequence, recording 2-acyclicity after every prefix.
pub fn nondegeneracy_probe(
    sp: &SpeciesWithPotential,
    sequences: &[Vec<String>],
) -> Result<ProbeReport, SpError> {
    let mut out = Vec::new();
    let mut failures = 0;
    for seq in sequences {
        let mut cur = sp.clone();
        let mut steps = Vec::new();
        for vid in seq {
            let k = cur.quiver.vertex_ix(vid).map_err(SpError::Quiver)?;
            match mutate(&cur, k) {
                Ok(next) => {
                    let ok = next.quiver.is_two_acyclic();
                    steps.push(ProbeStep {
                        vertex: vid.clone(),
                        two_acyclic: ok,
                        quiver_hash: quiver_digest(&next.quiver),
                    });
                    if !ok {
                        failures += 1;
                        break;
                    }
                    cur = next;
                }
                Err(_) => {
                    steps.push(ProbeStep { vertex: vid.clone(), two_acyclic: false, quiver_hash: 0 });
                    failures += 1;
                    break;
                }
            }
        }
        out.push(steps);
    }
    Ok(ProbeReport { sequences: out, failures })
}

pub fn quivers_isomorphic(a: &WeightedQuiver, b: &WeightedQuiver, labeled: bool) -> bool {
    wq_isomorphic(a, b, labeled).is_some()
}
