//! Label-level potential tracking for weight tuples beyond the quadratic
//! range of the path algebra. Words carry no eigenbasis decorations; this is
//! enough to follow how degree-2 terms pair arrows after premutation and to
//! decide which 2-cycles a reduction can cancel.



use num_traits::Zero;

use crate::error::QuiverError;
use crate::scalars::Rational;
use crate::wquiver::{premutate_quiver, ArrowIx, PremutedQuiver, WeightedQuiver};

/// Finite linear combination of cyclic arrow words.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FormalPotential {
    pub terms: Vec<(Rational, Vec<String>)>,
}

impl FormalPotential {
    pub fn new(terms: Vec<(Rational, Vec<String>)>) -> Self {
        FormalPotential { terms }
    }
}

fn word_vertices(q: &WeightedQuiver, word: &[ArrowIx]) -> Result<Vec<usize>, QuiverError> {
    // vertex before each arrow in composition order: word a1..al reads
    // right-to-left, junction between a_i and a_{i+1} is t(a_i) = h(a_{i+1}).
    for w in word.windows(2) {
        if q.arrows[w[0]].tail != q.arrows[w[1]].head {
            return Err(QuiverError::NotComposable(q.arrows[w[0]].id.clone(), q.arrows[w[1]].id.clone()));
        }
    }
    let first = word[0];
    let last = word[word.len() - 1];
    if q.arrows[first].head != q.arrows[last].tail {
        return Err(QuiverError::NotComposable(q.arrows[last].id.clone(), q.arrows[first].id.clone()));
    }
    Ok(word.iter().map(|&a| q.arrows[a].head).collect())
}

/// Premutation of a decoration-free potential: rewrites factors through `k`
/// as sums of labeled composites and appends the star-composite triangle
/// terms. Requires every through-`k` eigenbasis factor set to be a singleton,
/// which holds whenever no neighbor pair of `k` has weight divisible by a
/// square; asserted at runtime.
pub fn premutate_formal(
    q: &WeightedQuiver,
    s: &FormalPotential,
    k: usize,
) -> Result<(PremutedQuiver, FormalPotential), QuiverError> {
    let pre = premutate_quiver(q, k)?;
    let mut out: Vec<(Rational, Vec<String>)> = Vec::new();

    for (coeff, word_ids) in &s.terms {
        let word: Vec<ArrowIx> = word_ids.iter().map(|id| q.arrow_ix(id)).collect::<Result<_, _>>()?;
        let mut word = word;
        // rotate so the base vertex (head of the first arrow) is not k
        let l = word.len();
        let mut rot = 0;
        while rot < l && q.arrows[word[0]].head == k {
            word.rotate_left(1);
            rot += 1;
        }
        if rot == l {
            return Err(QuiverError::TwoCycleAt(q.vertices[k].id.clone()));
        }
        word_vertices(q, &word)?;
        // expand factors through k multiplicatively
        let mut expansions: Vec<Vec<Vec<String>>> = Vec::new();
        let mut i = 0;
        while i < word.len() {
            let a = word[i];
            if q.arrows[a].tail == k {
                // next arrow composes through k
                let b = a;
                let a2 = word[(i + 1) % word.len()];
                debug_assert_eq!(q.arrows[a2].head, k);
                let nb = crate::wquiver::basis_count(q, a2, b)?;
                assert_eq!(nb, 1, "decoration-free premutation needs singleton eigenbasis factors");
                let ids: Vec<Vec<String>> = pre
                    .composites
                    .iter()
                    .filter(|c| c.b == q.arrows[b].id && c.a == q.arrows[a2].id)
                    .map(|c| vec![c.id.clone()])
                    .collect();
                expansions.push(ids);
                i += 2;
            } else {
                expansions.push(vec![vec![q.arrows[a].id.clone()]]);
                i += 1;
            }
        }
        // cartesian product of the alternative composites
        let mut acc: Vec<Vec<String>> = vec![Vec::new()];
        for chunk in &expansions {
            let mut next = Vec::new();
            for prefix in &acc {
                for alt in chunk {
                    let mut w = prefix.clone();
                    w.extend(alt.iter().cloned());
                    next.push(w);
                }
            }
            acc = next;
        }
        for w in acc {
            out.push((coeff.clone(), w));
        }
    }

    // triangle terms: b* [b.a]_rho a*  (singleton eigenbasis asserted)
    for c in &pre.composites {
        let b_ix = q.arrow_ix(&c.b)?;
        let a_ix = q.arrow_ix(&c.a)?;
        let nb = crate::wquiver::basis_count(q, a_ix, b_ix)?;
        assert_eq!(nb, 1, "decoration-free premutation needs singleton eigenbasis factors");
        if c.omega_index != 0 {
            continue;
        }
        let bs = pre.stars[&c.b].clone();
        let as_ = pre.stars[&c.a].clone();
        out.push((Rational::from_integer(1.into()), vec![bs, c.id.clone(), as_]));
    }

    Ok((pre, FormalPotential { terms: out }))
}

/// For every unordered vertex pair carrying arrows both ways, computes how
/// many 2-cycle pairs the degree-2 part of `s` can cancel (the rank of the
/// label-compatible pairing matrix) and returns the pairs where arrows
/// survive in both directions.
pub fn surviving_two_cycles(q: &WeightedQuiver, s: &FormalPotential) -> Vec<(String, String, usize, usize)> {
    let counts = q.arrow_counts();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (&(t, h), _) in &counts {
        if t < h && counts.contains_key(&(h, t)) {
            pairs.push((t, h));
        }
    }
    let mut out = Vec::new();
    for (i, j) in pairs {
        let fwd: Vec<ArrowIx> = (0..q.arrows.len()).filter(|&a| q.arrows[a].tail == i && q.arrows[a].head == j).collect();
        let bwd: Vec<ArrowIx> = (0..q.arrows.len()).filter(|&a| q.arrows[a].tail == j && q.arrows[a].head == i).collect();
        let mut m = vec![vec![Rational::zero(); bwd.len()]; fwd.len()];
        for (coeff, word) in &s.terms {
            if word.len() != 2 {
                continue;
            }
            let x = q.arrow_ix(&word[0]).unwrap();
            let y = q.arrow_ix(&word[1]).unwrap();
            let (f, b) = if fwd.contains(&x) && bwd.contains(&y) {
                (x, y)
            } else if fwd.contains(&y) && bwd.contains(&x) {
                (y, x)
            } else {
                continue;
            };
            // cyclically zero unless the labels are mutually inverse
            if q.arrows[f].label != q.arrows[b].label.inverse() {
                continue;
            }
            let fi = fwd.iter().position(|&a| a == f).unwrap();
            let bi = bwd.iter().position(|&a| a == b).unwrap();
            m[fi][bi] = &m[fi][bi] + coeff;
        }
        let r = rank(&mut m);
        if fwd.len() > r && bwd.len() > r {
            out.push((q.vertices[i].id.clone(), q.vertices[j].id.clone(), fwd.len() - r, bwd.len() - r));
        }
    }
    out
}

fn rank(m: &mut [Vec<Rational>]) -> usize {
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
        let pivot = (r..rows).find(|&i| !m[i][c].is_zero());
        let Some(p) = pivot else { continue };
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
    r
}
