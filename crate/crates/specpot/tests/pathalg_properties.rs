//! Property tests for the path-algebra normal form.

use proptest::prelude::*;

use specpot::pathalg::{cyc_canonical, mul, normalize_raw, AlgebraElement, Path};
use specpot::scalars::GaloisElement;
use specpot::wquiver::WeightedQuiver;

fn mixed_quiver() -> WeightedQuiver {
    let mut q = WeightedQuiver::new();
    q.add_vertex("1", 2).unwrap();
    q.add_vertex("2", 2).unwrap();
    q.add_vertex("3", 1).unwrap();
    q.add_arrow_labeled("a", "1", "2", GaloisElement::identity(2)).unwrap();
    q.add_arrow_labeled("b", "2", "1", GaloisElement::theta()).unwrap();
    q.add_arrow("c", "2", "3").unwrap();
    q.add_arrow("d", "3", "1").unwrap();
    q
}

fn random_word(q: &WeightedQuiver, seed: &[usize]) -> Option<Vec<usize>> {
    let mut arrows = vec![seed[0] % q.arrows.len()];
    for &s in &seed[1..] {
        let t = q.arrows[*arrows.last().unwrap()].tail;
        let nexts: Vec<usize> = (0..q.arrows.len()).filter(|&a| q.arrows[a].head == t).collect();
        if nexts.is_empty() {
            return None;
        }
        arrows.push(nexts[s % nexts.len()]);
    }
    Some(arrows)
}

proptest! {
    /// Normalization is idempotent: re-normalizing a canonical path with its
    /// own bits is the identity.
    #[test]
    fn normalize_is_idempotent(seed in prop::collection::vec(0usize..16, 1..6),
                               bits in prop::collection::vec(0u32..4, 7)) {
        let q = mixed_quiver();
        if let Some(arrows) = random_word(&q, &seed) {
            let path0 = Path { arrows: arrows.clone(), vbits: 0, base: 0 };
            let vpow: Vec<u32> = (0..=arrows.len())
                .map(|i| if q.weight(path0.slot_vertex(&q, i)) == 2 { bits[i] } else { 0 })
                .collect();
            let (c1, p1) = normalize_raw(&q, &arrows, &vpow, 0).unwrap();
            let again: Vec<u32> = (0..=p1.len()).map(|i| p1.bit(i) as u32).collect();
            let (c2, p2) = normalize_raw(&q, &p1.arrows, &again, p1.base).unwrap();
            prop_assert_eq!(c2, num_rational::BigRational::from_integer(1.into()));
            prop_assert_eq!(p1, p2);
            let _ = c1;
        }
    }

    /// Multiplication is associative on random triples.
    #[test]
    fn multiplication_associative(s1 in prop::collection::vec(0usize..16, 1..4),
                                  s2 in prop::collection::vec(0usize..16, 1..4),
                                  s3 in prop::collection::vec(0usize..16, 1..4)) {
        let q = mixed_quiver();
        let build = |seed: &[usize]| -> Option<AlgebraElement> {
            let arrows = random_word(&q, seed)?;
            let vpow = vec![0u32; arrows.len() + 1];
            let (c, p) = normalize_raw(&q, &arrows, &vpow, 0).ok()?;
            let mut el = AlgebraElement::zero();
            el.insert(c, p);
            Some(el)
        };
        if let (Some(x), Some(y), Some(z)) = (build(&s1), build(&s2), build(&s3)) {
            let lhs = mul(&q, &mul(&q, &x, &y).unwrap(), &z).unwrap();
            let rhs = mul(&q, &x, &mul(&q, &y, &z).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    /// The cyclic canonical form is idempotent.
    #[test]
    fn cyc_canonical_idempotent(seed in prop::collection::vec(0usize..16, 2..5)) {
        let q = mixed_quiver();
        if let Some(arrows) = random_word(&q, &seed) {
            let first = arrows[0];
            let last = *arrows.last().unwrap();
            if q.arrows[first].head == q.arrows[last].tail {
                let vpow = vec![0u32; arrows.len() + 1];
                let (c, p) = normalize_raw(&q, &arrows, &vpow, 0).unwrap();
                let mut el = AlgebraElement::zero();
                el.insert(c, p);
                let c1 = cyc_canonical(&q, &el).unwrap();
                let c2 = cyc_canonical(&q, &c1).unwrap();
                prop_assert_eq!(c1, c2);
            }
        }
    }
}
