//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its elapsed time. Run with `cargo test -p specpot-cli --test acceptance`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use specpot::formal::{premutate_formal, surviving_two_cycles, FormalPotential};
use specpot::pathalg::{cyc_equivalent, parse_element, Endomorphism};
use specpot::scalars::{rat, GaloisElement};
use specpot::sp::{
    jacobian_dims, mutate, nondegeneracy_probe, quivers_isomorphic, restrict_sp,
    verify_right_equiv, SpeciesWithPotential,
};
use specpot::surface::{
    build_quiver, build_sp, flip, from_spec, popped_orbifold, popped_self_folded, SurfaceSpec,
    TaggedTriangulation,
};
use specpot::wquiver::{
    from_matrix, matrix_mutate, premutate_quiver, to_matrix, to_matrix_with_order, wq_isomorphic,
    wq_mutate, SkewSymmetrizableMatrix, WeightedQuiver,
};

fn done(name: &str, start: Instant, budget: Duration) {
    let elapsed = start.elapsed();
    println!("{name}: PASS ({elapsed:.2?})");
    assert!(elapsed < budget, "{name} exceeded its time budget: {elapsed:.2?}");
}

fn random_quiver(rng: &mut ChaCha8Rng, n: usize, wmax: u64) -> WeightedQuiver {
    let mut q = WeightedQuiver::new();
    let weights: Vec<u64> = (0..n).map(|_| 1 + rng.gen_range(0..wmax)).collect();
    for (i, w) in weights.iter().enumerate() {
        q.add_vertex(&(i + 1).to_string(), *w).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_range(0..3u32) == 0 {
                continue;
            }
            let (t, h) = if rng.gen_bool(0.5) { (i, j) } else { (j, i) };
            for m in 0..rng.gen_range(1..3u32) {
                let id = format!("r{i}_{j}_{m}");
                let g = q.pair_gcd(t, h);
                let tid = q.vertices[t].id.clone();
                let hid = q.vertices[h].id.clone();
                q.add_arrow_labeled(&id, &tid, &hid, GaloisElement::new(rng.gen_range(0..g), g))
                    .unwrap();
            }
        }
    }
    q
}

fn surface(json: &str) -> (TaggedTriangulation, specpot::surface::ScalarChoice) {
    let spec: SurfaceSpec = serde_json::from_str(json).expect("surface json");
    from_spec(&spec).expect("assembles")
}

const PENTAGON: &str = r#"{
    "pieces": [
        {"id": "o", "kind": "IV", "sides": ["u1", "u2"]},
        {"id": "t1", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t2", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t3", "kind": "I", "sides": ["s1", "s2", "s3"]}
    ],
    "matching": [
        {"a": "o.u2", "b": "t1.s1", "arc": "a1"},
        {"a": "t1.s3", "b": "t2.s1", "arc": "a2"},
        {"a": "t2.s3", "b": "t3.s1", "arc": "a3"}
    ]
}"#;

const HEX_1P_2ORB: &str = r#"{
    "pieces": [
        {"id": "da", "kind": "IV", "sides": ["u1", "u2"]},
        {"id": "db", "kind": "IV", "sides": ["u1", "u2"]},
        {"id": "t1", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t2", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t3", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t4", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t5", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t6", "kind": "I", "sides": ["s1", "s2", "s3"]}
    ],
    "matching": [
        {"a": "da.u2", "b": "db.u1", "arc": "z1"},
        {"a": "t6.s3", "b": "da.u1", "arc": "z3"},
        {"a": "db.u2", "b": "t1.s1", "arc": "z2"},
        {"a": "t1.s3", "b": "t2.s1", "arc": "v1"},
        {"a": "t2.s3", "b": "t3.s1", "arc": "v2"},
        {"a": "t3.s3", "b": "t4.s1", "arc": "v3"},
        {"a": "t4.s3", "b": "t5.s1", "arc": "v4"},
        {"a": "t5.s3", "b": "t6.s1", "arc": "v5"}
    ],
    "scalars": {"da.c0": "7"}
}"#;

const HEX_2P_1ORB: &str = r#"{
    "pieces": [
        {"id": "vi", "kind": "VI", "sides": ["u"]},
        {"id": "in", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t1", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t2", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t3", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t4", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t5", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t6", "kind": "I", "sides": ["s1", "s2", "s3"]}
    ],
    "matching": [
        {"a": "vi.u", "b": "in.s2", "arc": "B"},
        {"a": "in.s1", "b": "t1.s1", "arc": "H"},
        {"a": "in.s3", "b": "t6.s3", "arc": "II"},
        {"a": "t1.s3", "b": "t2.s1", "arc": "v1"},
        {"a": "t2.s3", "b": "t3.s1", "arc": "v2"},
        {"a": "t3.s3", "b": "t4.s1", "arc": "v3"},
        {"a": "t4.s3", "b": "t5.s1", "arc": "v4"},
        {"a": "t5.s3", "b": "t6.s1", "arc": "v5"}
    ],
    "scalars": {"vi.p": "2", "vi.c0": "3"}
}"#;

const TORUS: &str = r#"{
    "pieces": [
        {"id": "ta", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "tb", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "o", "kind": "IV", "sides": ["u1", "u2"]}
    ],
    "matching": [
        {"a": "ta.s1", "b": "tb.s1", "arc": "a1"},
        {"a": "ta.s2", "b": "tb.s2", "arc": "a2"},
        {"a": "ta.s3", "b": "o.u1", "arc": "a3"},
        {"a": "tb.s3", "b": "o.u2", "arc": "a4"}
    ],
    "scalars": {"ta.c0": "5"}
}"#;

const SQUARE_2ORB: &str = r#"{
    "pieces": [
        {"id": "m", "kind": "V", "sides": ["s"]},
        {"id": "t1", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t2", "kind": "I", "sides": ["s1", "s2", "s3"]}
    ],
    "matching": [
        {"a": "m.s", "b": "t1.s1", "arc": "el"},
        {"a": "t1.s3", "b": "t2.s1", "arc": "d"}
    ]
}"#;

const SF_TORUS: &str = r#"{
    "pieces": [
        {"id": "dg", "kind": "II", "sides": ["u1", "u2"]},
        {"id": "tb", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "tc", "kind": "I", "sides": ["s1", "s2", "s3"]}
    ],
    "matching": [
        {"a": "dg.u1", "b": "tc.s3", "arc": "i1"},
        {"a": "dg.u2", "b": "tb.s1", "arc": "i4"},
        {"a": "tb.s2", "b": "tc.s1", "arc": "i5"},
        {"a": "tb.s3", "b": "tc.s2", "arc": "i6"}
    ],
    "scalars": {"dg.p": "2"}
}"#;

const CAPPED_PENTAGON: &str = r#"{
    "pieces": [
        {"id": "o", "kind": "IV", "sides": ["u1", "u2"]},
        {"id": "t1", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t2", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "t3", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "c1", "kind": "II", "sides": ["d1", "d2"]},
        {"id": "c2", "kind": "II", "sides": ["d1", "d2"]},
        {"id": "c3", "kind": "II", "sides": ["d1", "d2"]},
        {"id": "c4", "kind": "II", "sides": ["d1", "d2"]},
        {"id": "c5", "kind": "II", "sides": ["d1", "d2"]},
        {"id": "n1", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "n2", "kind": "I", "sides": ["s1", "s2", "s3"]},
        {"id": "n3", "kind": "I", "sides": ["s1", "s2", "s3"]}
    ],
    "matching": [
        {"a": "o.u2", "b": "t1.s1", "arc": "a1"},
        {"a": "t1.s3", "b": "t2.s1", "arc": "a2"},
        {"a": "t2.s3", "b": "t3.s1", "arc": "a3"},
        {"a": "o.u1", "b": "c1.d1", "arc": "b1"},
        {"a": "t1.s2", "b": "c2.d1", "arc": "b2"},
        {"a": "t2.s2", "b": "c3.d1", "arc": "b3"},
        {"a": "t3.s2", "b": "c4.d1", "arc": "b4"},
        {"a": "t3.s3", "b": "c5.d1", "arc": "b5"},
        {"a": "c1.d2", "b": "n1.s1", "arc": "e1"},
        {"a": "c2.d2", "b": "n1.s2", "arc": "e2"},
        {"a": "n1.s3", "b": "n2.s1", "arc": "q1"},
        {"a": "c3.d2", "b": "n2.s2", "arc": "e3"},
        {"a": "n2.s3", "b": "n3.s1", "arc": "q2"},
        {"a": "c4.d2", "b": "n3.s2", "arc": "e4"},
        {"a": "c5.d2", "b": "n3.s3", "arc": "e5"}
    ],
    "scalars": {"c1.p": "2", "c2.p": "3", "c3.p": "5", "c4.p": "7", "c5.p": "11"}
}"#;

fn arrow_between(q: &WeightedQuiver, tail: &str, head: &str, residue: u64) -> String {
    let t = q.vertex_ix(tail).unwrap();
    let h = q.vertex_ix(head).unwrap();
    let hits: Vec<&str> = q
        .arrows
        .iter()
        .filter(|a| a.tail == t && a.head == h && a.label.residue == residue)
        .map(|a| a.id.as_str())
        .collect();
    assert_eq!(hits.len(), 1, "{tail}->{head}#{residue}: {hits:?}");
    hits[0].to_string()
}

#[test]
fn criterion_01_matrix_quiver_bijection() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for _ in 0..200 {
        let n = rng.gen_range(2..7usize);
        let q = random_quiver(&mut rng, n, 6);
        let m = to_matrix(&q).unwrap();
        let q2 = from_matrix(&m).unwrap();
        assert_eq!(to_matrix(&q2).unwrap(), m);
        assert!(wq_isomorphic(&q, &q2, false).is_some());
    }
    // pentagon with one orbifold point reproduces the type-C matrix verbatim
    let (tagged, _) = surface(PENTAGON);
    let q = build_quiver(&tagged.map).unwrap();
    let pending = tagged
        .map
        .arcs()
        .into_iter()
        .find(|&e| tagged.map.is_pending(e))
        .map(|e| tagged.map.edges[e].id.clone())
        .unwrap();
    let m = to_matrix_with_order(&q, &[&pending, "a1", "a2", "a3"]).unwrap();
    let want = SkewSymmetrizableMatrix::new(
        vec![
            vec![0, -1, 0, 0],
            vec![2, 0, -1, 0],
            vec![0, 1, 0, -1],
            vec![0, 0, 1, 0],
        ],
        vec![2, 1, 1, 1],
    )
    .unwrap();
    assert_eq!(m, want);
    done("criterion 01 (matrix<->quiver bijection)", start, Duration::from_secs(1));
}

#[test]
fn criterion_02_mutation_commutes_with_correspondence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    for _ in 0..200 {
        let n = rng.gen_range(2..7usize);
        let q = random_quiver(&mut rng, n, 6);
        let m = to_matrix(&q).unwrap();
        let k = rng.gen_range(0..n);
        let via_quiver = wq_mutate(&q, k).unwrap();
        let via_matrix = from_matrix(&matrix_mutate(&m, k)).unwrap();
        assert!(wq_isomorphic(&via_quiver, &via_matrix, false).is_some());
    }
    done("criterion 02 (mutation commutes with the correspondence)", start, Duration::from_secs(2));
}

#[test]
fn criterion_03_degenerate_example() {
    let start = Instant::now();
    let b = SkewSymmetrizableMatrix::new(
        vec![
            vec![0, 1, 0, -1],
            vec![-3, 0, 3, 0],
            vec![0, -1, 0, 1],
            vec![2, 0, -2, 0],
        ],
        vec![6, 2, 6, 3],
    )
    .unwrap();
    let q0 = from_matrix(&b).unwrap();
    // the degenerate quiver arises from mutating at the weight-3 vertex and
    // then premutating at the weight-2 vertex
    let q1 = wq_mutate(&q0, q0.vertex_ix("4").unwrap()).unwrap();
    let pre = premutate_quiver(&q1, q1.vertex_ix("2").unwrap()).unwrap();
    let q = pre.quiver.clone();
    let counts = q.arrow_counts();
    let v1 = q.vertex_ix("1").unwrap();
    let v3 = q.vertex_ix("3").unwrap();
    assert_eq!(counts.get(&(v1, v3)).copied().unwrap_or(0), 2, "double arrow 1->3");
    assert_eq!(counts.get(&(v3, v1)).copied().unwrap_or(0), 3, "triple arrow 3->1");
    for (&(t, h), &c) in &counts {
        if (t, h) != (v1, v3) && (t, h) != (v3, v1) {
            assert_eq!(c, 1, "all other arrows single");
        }
    }
    let weights: Vec<u64> = q.vertices.iter().map(|v| v.weight).collect();
    assert_eq!(weights, vec![6, 2, 6, 3]);

    // every admissible modulating function satisfying the compatibility
    // conditions leaves some eps-arrow with no eta-partner
    let eps_labels: Vec<(u64, u64)> = {
        let mut out = Vec::new();
        for e1 in 0..6u64 {
            for e2 in 0..6u64 {
                if e1 != e2 && e1 % 3 == e2 % 3 {
                    out.push((e1, e2));
                }
            }
        }
        out
    };
    let eta_labels: Vec<(u64, u64, u64)> = {
        let mut out = Vec::new();
        for n1 in 0..6u64 {
            for n2 in 0..6u64 {
                for n3 in 0..6u64 {
                    if n1 % 2 == n2 % 2 && n2 % 2 == n3 % 2 {
                        out.push((n1, n2, n3));
                    }
                }
            }
        }
        out
    };
    assert_eq!(eps_labels.len(), 6 * 1);
    for &(e1, e2) in &eps_labels {
        for &(n1, n2, n3) in &eta_labels {
            let bad = |e: u64| [n1, n2, n3].iter().any(|&n| (e + n) % 6 == 0);
            assert!(
                !bad(e1) || !bad(e2),
                "some eps has no inverse eta partner: {e1} {e2} vs {n1} {n2} {n3}"
            );
        }
    }

    // random potentials: the pairing matrix cancels at most one 2-cycle pair
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    for trial in 0..50 {
        // random admissible modulating function on the 4-cycle
        let mut qm = WeightedQuiver::new();
        for (v, w) in [("1", 6u64), ("2", 2), ("3", 6), ("4", 3)] {
            qm.add_vertex(v, w).unwrap();
        }
        let mut lab = |m: u64| GaloisElement::new(rng.gen_range(0..m), m);
        qm.add_arrow_labeled("u", "2", "1", lab(2)).unwrap();
        qm.add_arrow_labeled("y", "3", "2", lab(2)).unwrap();
        qm.add_arrow_labeled("x", "4", "3", lab(3)).unwrap();
        qm.add_arrow_labeled("w", "1", "4", lab(3)).unwrap();
        // random potential of degree <= 4: multiples of the 4-cycle
        let c = rat(rng.gen_range(-6i64..7).max(1), 1 + rng.gen_range(0..3i64));
        let s = FormalPotential::new(vec![(
            c,
            vec!["u".into(), "y".into(), "x".into(), "w".into()],
        )]);
        let (pre4, s4) = premutate_formal(&qm, &s, qm.vertex_ix("4").unwrap()).unwrap();
        let q4 = specpot::wquiver::delete_two_cycles(&pre4.quiver);
        // re-express the potential on the 2-acyclic quiver (no deletions hit
        // the support here)
        let s4b = FormalPotential::new(
            s4.terms
                .iter()
                .filter(|(_, w)| w.iter().all(|id| q4.arrow_ix(id).is_ok()))
                .cloned()
                .collect(),
        );
        let (pre2, s2) = premutate_formal(&q4, &s4b, q4.vertex_ix("2").unwrap()).unwrap();
        let surviving = surviving_two_cycles(&pre2.quiver, &s2);
        assert!(
            surviving
                .iter()
                .any(|(a, b, _, _)| (a == "1" && b == "3") || (a == "3" && b == "1")),
            "trial {trial}: a 2-cycle between the weight-6 vertices must survive: {surviving:?}"
        );
    }
    done("criterion 03 (degenerate species example)", start, Duration::from_secs(10));
}

#[test]
fn criterion_04_potential_builders_match_pinned_formulas() {
    let start = Instant::now();

    // hexagon, one puncture, two orbifold points: both triangulations
    let t0 = Instant::now();
    let (tagged, x) = surface(HEX_1P_2ORB);
    let sp = build_sp(&tagged, &x, Some(24)).unwrap();
    let q = &sp.quiver;
    let (pa, pb) = ("da.x", "db.x");
    let al = arrow_between(q, "z2", "z1", 0);
    let be = arrow_between(q, pb, "z2", 0);
    let ga = arrow_between(q, "z1", pb, 0);
    let de = arrow_between(q, "z1", "z3", 0);
    let eta = arrow_between(q, pa, "z1", 0);
    let ep = arrow_between(q, "z3", pa, 0);
    let nus = [
        arrow_between(q, "v5", "z3", 0),
        arrow_between(q, "v4", "v5", 0),
        arrow_between(q, "v3", "v4", 0),
        arrow_between(q, "v2", "v3", 0),
        arrow_between(q, "v1", "v2", 0),
        arrow_between(q, "z2", "v1", 0),
    ];
    let expected = format!(
        "{al}*{be}*{ga} - {al}*{be}.v*{ga} + {de}*{eta}*{ep} - {de}*{eta}.v*{ep} \
         + (7)*{be}*{ga}*{eta}*{ep}*{n1}*{n2}*{n3}*{n4}*{n5}*{n6}",
        n1 = nus[0], n2 = nus[1], n3 = nus[2], n4 = nus[3], n5 = nus[4], n6 = nus[5]
    );
    let exp = parse_element(q, &expected).unwrap();
    assert!(cyc_equivalent(q, &sp.potential, &exp).unwrap(), "hex tau potential");
    assert!(t0.elapsed() < Duration::from_secs(1), "hex tau budget");

    // the flipped triangulation with the orbifold monogon
    let t0 = Instant::now();
    let out = flip(&tagged, "z1").unwrap();
    let sps = build_sp(&out.tagged, &x, Some(24)).unwrap();
    let qs = &sps.quiver;
    let al = arrow_between(qs, pa, pb, 0);
    let dl = arrow_between(qs, pa, pb, 1);
    let be = arrow_between(qs, "z1", pa, 0);
    let ga = arrow_between(qs, pb, "z1", 0);
    let eta = arrow_between(qs, "z1", "z2", 0);
    let ep = arrow_between(qs, "z3", "z1", 0);
    let la = arrow_between(qs, "z2", "z3", 0);
    let nus = [
        arrow_between(qs, "v5", "z3", 0),
        arrow_between(qs, "v4", "v5", 0),
        arrow_between(qs, "v3", "v4", 0),
        arrow_between(qs, "v2", "v3", 0),
        arrow_between(qs, "v1", "v2", 0),
        arrow_between(qs, "z2", "v1", 0),
    ];
    let tail = format!(
        "{be}*{ep}*{n1}*{n2}*{n3}*{n4}*{n5}*{n6}*{eta}*{ga}",
        n1 = nus[0], n2 = nus[1], n3 = nus[2], n4 = nus[3], n5 = nus[4], n6 = nus[5]
    );
    let expected = format!(
        "{eta}*{ep}*{la} - (2)*v*{al}*{be}*{ga} + (2)*{dl}*{be}*{ga} + (7)*{al}*{tail} + (7)*{dl}*{tail}"
    );
    let exp = parse_element(qs, &expected).unwrap();
    assert!(cyc_equivalent(qs, &sps.potential, &exp).unwrap(), "hex sigma potential");
    assert!(t0.elapsed() < Duration::from_secs(1), "hex sigma budget");

    // hexagon with two punctures and one orbifold point
    let t0 = Instant::now();
    let (tagged2, x2) = surface(HEX_2P_1ORB);
    let sp2 = build_sp(&tagged2, &x2, Some(24)).unwrap();
    let q2 = &sp2.quiver;
    let p = "vi.x";
    let al = arrow_between(q2, "B", p, 0);
    let be = arrow_between(q2, "vi.k", "B", 0);
    let de = arrow_between(q2, p, "vi.k", 0);
    let rh = arrow_between(q2, "vi.w", "B", 0);
    let ga = arrow_between(q2, p, "vi.w", 0);
    let eta = arrow_between(q2, "B", "H", 0);
    let ep = arrow_between(q2, "II", "B", 0);
    let la = arrow_between(q2, "H", "II", 0);
    let nus = [
        arrow_between(q2, "v5", "II", 0),
        arrow_between(q2, "v4", "v5", 0),
        arrow_between(q2, "v3", "v4", 0),
        arrow_between(q2, "v2", "v3", 0),
        arrow_between(q2, "v1", "v2", 0),
        arrow_between(q2, "H", "v1", 0),
    ];
    let expected = format!(
        "{eta}*{ep}*{la} + {al}*{be}*{de} - v*{al}*{be}*{de} + (1/2)*v*{al}*{rh}*{ga} \
         - (1/2)*{al}*{rh}*{ga} + (3)*{eta}*{rh}*{ga}*{al}*{ep}*{n1}*{n2}*{n3}*{n4}*{n5}*{n6}",
        n1 = nus[0], n2 = nus[1], n3 = nus[2], n4 = nus[3], n5 = nus[4], n6 = nus[5]
    );
    let exp = parse_element(q2, &expected).unwrap();
    assert!(cyc_equivalent(q2, &sp2.potential, &exp).unwrap(), "two-puncture hex potential");
    assert!(t0.elapsed() < Duration::from_secs(1), "two-puncture hex budget");

    // unpunctured square with two orbifold points: the reduced potential is
    // the orbifold monogon term, right-equivalent to (alpha+delta)*beta*gamma
    let t0 = Instant::now();
    let (tsq, xsq) = surface(SQUARE_2ORB);
    let spq = build_sp(&tsq, &xsq, Some(12)).unwrap();
    let qq = &spq.quiver;
    let (q1, q2n) = ("m.x1", "m.x2");
    let al = arrow_between(qq, q2n, q1, 0);
    let dl = arrow_between(qq, q2n, q1, 1);
    let be = arrow_between(qq, "el", q2n, 0);
    let ga = arrow_between(qq, q1, "el", 0);
    let built = parse_element(qq, &format!("- (2)*v*{al}*{be}*{ga} + (2)*{dl}*{be}*{ga}")).unwrap();
    assert!(cyc_equivalent(qq, &spq.potential, &built).unwrap(), "orbifold monogon term");
    let target = SpeciesWithPotential::new(
        qq.clone(),
        parse_element(qq, &format!("{al}*{be}*{ga} + {dl}*{be}*{ga}")).unwrap().truncated(Some(12)),
    )
    .unwrap();
    let mut w = Endomorphism::identity();
    let a_ix = qq.arrow_ix(&al).unwrap();
    let d_ix = qq.arrow_ix(&dl).unwrap();
    w.images.insert(a_ix, parse_element(qq, &format!("(1/2)*v*{al}")).unwrap());
    w.images.insert(d_ix, parse_element(qq, &format!("(1/2)*{dl}")).unwrap());
    assert!(verify_right_equiv(&spq, &target, &[w]).unwrap(), "unpunctured normal form");
    assert!(t0.elapsed() < Duration::from_secs(1), "square budget");

    // torus with one puncture and one orbifold point, including the
    // (1 - v)-corrected cycle
    let t0 = Instant::now();
    let (tt, xt) = surface(TORUS);
    let spt = build_sp(&tt, &xt, Some(20)).unwrap();
    let qt = &spt.quiver;
    let p5 = "o.x";
    let a1 = "f0.0";
    let b1 = arrow_between(qt, "a3", "a2", 0);
    let g1 = arrow_between(qt, "a1", "a3", 0);
    let a2 = "f1.0";
    let b2 = arrow_between(qt, "a4", "a2", 0);
    let g2 = arrow_between(qt, "a1", "a4", 0);
    let dl = arrow_between(qt, "a4", "a3", 0);
    let ep = arrow_between(qt, p5, "a4", 0);
    let ze = arrow_between(qt, "a3", p5, 0);
    let expected = format!(
        "{a1}*{b1}*{g1} + {a2}*{b2}*{g2} + {dl}*{ep}*{ze} - {dl}*{ep}.v*{ze} \
         + (5)*{a1}*{b2}*{ep}*{ze}*{g1}*{a2}*{b1}*{dl}*{g2}"
    );
    let exp = parse_element(qt, &expected).unwrap();
    assert!(cyc_equivalent(qt, &spt.potential, &exp).unwrap(), "torus potential");
    assert!(t0.elapsed() < Duration::from_secs(1), "torus budget");

    done("criterion 04 (potential builders match pinned formulas)", start, Duration::from_secs(10));
}

fn run_fixture_files(names: &[&str]) {
    for name in names {
        let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let text = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {path}"));
        let case: specpot::fixtures::FixtureCase = serde_json::from_str(&text).unwrap();
        let report = specpot::fixtures::run_fixture(&case).unwrap();
        assert!(report.witness_valid, "{name}: witness invalid");
        assert!(report.cyclic_match, "{name}: cyclic mismatch: {:?}", report.first_difference);
        assert!(report.reduced_quivers_isomorphic, "{name}: reduced quivers differ");
    }
}

#[test]
fn criterion_05_right_equivalence_fixtures() {
    let start = Instant::now();
    run_fixture_files(&[
        "case-vi",
        "case-vii",
        "case-8-y1",
        "case-8-y2",
        "case-8-y3",
        "case-8-y4",
        "case-8-y5",
        "case-8-y6",
        "case-13-y1",
        "case-13-y2",
        "case-14-y1",
        "case-14-y2",
        "case-21-y1",
        "case-21-y2",
        "case-24",
        "case-25",
        "case-26",
        "case-27",
        "case-29",
        "case-36-y1",
        "case-36-y2",
        "case-37-y1",
        "case-37-y2",
        "case-39",
        "case-41",
    ]);
    // negative control: corrupting a sign in the final substitution fails
    let path = format!("{}/fixtures/case-vi.json", env!("CARGO_MANIFEST_DIR"));
    let mut case: specpot::fixtures::FixtureCase =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let last = case.witness.last_mut().unwrap();
    last.images.insert("eps'".into(), "eps'".into());
    let report = specpot::fixtures::run_fixture(&case).unwrap();
    assert!(!report.cyclic_match, "corrupted witness must fail");
    assert!(report.first_difference.is_some());
    done("criterion 05 (case-by-case right-equivalence fixtures)", start, Duration::from_secs(5));
}

#[test]
fn criterion_06_flip_proof_fixtures() {
    let start = Instant::now();
    run_fixture_files(&[
        "case-p1x", "case-p1y", "case-p2", "case-p3", "case-p4", "case-p5",
        "case-f1", "case-f2", "case-f3", "case-f4",
    ]);
    // the scalar rule: flipping a pending arc flips the scalar at the marked
    // point of the flipped arc (when it is a puncture); other flips keep the
    // tuple
    let (tagged, _) = surface(HEX_1P_2ORB);
    let toward_boundary = flip(&tagged, "da.x").unwrap();
    assert!(toward_boundary.sign_flip_at.is_none(), "new base is a boundary point");
    let back = flip(&toward_boundary.tagged, "da.x").unwrap();
    assert_eq!(back.sign_flip_at.as_deref(), Some("da.c0"), "back to the puncture");
    let (torus, _) = surface(TORUS);
    let out = flip(&torus, "o.x").unwrap();
    assert_eq!(out.sign_flip_at.as_deref(), Some("ta.c0"), "torus pending flip");
    let out2 = flip(&tagged, "v3").unwrap();
    assert!(out2.sign_flip_at.is_none());
    done("criterion 06 (flip compatibility as computations)", start, Duration::from_secs(5));
}

#[test]
fn criterion_07_pop_invariants() {
    let start = Instant::now();
    // two-puncture hexagon: self-folded pair and orbifold point
    let (tagged, x) = surface(HEX_2P_1ORB);
    let sp = build_sp(&tagged, &x, Some(16)).unwrap();
    let base = jacobian_dims(&sp, 8).unwrap();
    let w = popped_self_folded(&tagged, &x, "vi.w", "vi.k", Some(16)).unwrap();
    assert!(quivers_isomorphic(&sp.quiver, &w.quiver, true));
    assert_eq!(jacobian_dims(&w, 8).unwrap(), base, "self-folded pop dims");
    let vq = popped_orbifold(&tagged, &x, "vi.q", Some(16)).unwrap();
    assert_eq!(jacobian_dims(&vq, 8).unwrap(), base, "orbifold pop dims");

    // popping with the sign pre-flipped transports back to the original
    let y = x.flipped_at("vi.p");
    let w2 = popped_self_folded(&tagged, &y, "vi.w", "vi.k", Some(16)).unwrap();
    let back = specpot::surface::pops::swap_transport(&w2, "vi.w", "vi.k").unwrap();
    assert!(cyc_equivalent(&sp.quiver, &back.potential, &sp.potential).unwrap(), "pop involution");

    // torus: orbifold pop
    let (tt, xt) = surface(TORUS);
    let spt = build_sp(&tt, &xt, Some(14)).unwrap();
    let vt = popped_orbifold(&tt, &xt, "o.q", Some(14)).unwrap();
    assert_eq!(jacobian_dims(&vt, 8).unwrap(), jacobian_dims(&spt, 8).unwrap(), "torus orb pop");

    // hexagon with two orbifold points: both pops
    let (th, xh) = surface(HEX_1P_2ORB);
    let sph = build_sp(&th, &xh, Some(14)).unwrap();
    let dims_h = jacobian_dims(&sph, 8).unwrap();
    for orb in ["da.q", "db.q"] {
        let v = popped_orbifold(&th, &xh, orb, Some(14)).unwrap();
        assert_eq!(jacobian_dims(&v, 8).unwrap(), dims_h, "hex orb pop at {orb}");
    }

    // twice-punctured torus glued from the once-punctured cylinder: the
    // self-folded pop
    let (ts, xs) = surface(SF_TORUS);
    assert_eq!(ts.map.euler(), 0);
    let sps = build_sp(&ts, &xs, Some(14)).unwrap();
    let ws = popped_self_folded(&ts, &xs, "dg.i", "dg.j", Some(14)).unwrap();
    assert_eq!(jacobian_dims(&ws, 8).unwrap(), jacobian_dims(&sps, 8).unwrap(), "torus sf pop");

    // orbifold pop differs from the plain potential only in v-signs and
    // swapped parallel arrows: same term degrees
    let mut deg_a: Vec<usize> = sph.potential.terms.keys().map(|p| p.len()).collect();
    let vph = popped_orbifold(&th, &xh, "da.q", Some(14)).unwrap();
    let mut deg_b: Vec<usize> = vph.potential.terms.keys().map(|p| p.len()).collect();
    deg_a.sort();
    deg_b.sort();
    assert_eq!(deg_a, deg_b);
    done("criterion 07 (popped potentials at the invariant level)", start, Duration::from_secs(30));
}

#[test]
fn criterion_08_mutation_involution() {
    let start = Instant::now();
    for (name, json, trunc) in [
        ("pentagon", PENTAGON, 12),
        ("hex-1p-2orb", HEX_1P_2ORB, 12),
        ("hex-2p-1orb", HEX_2P_1ORB, 12),
        ("torus", TORUS, 10),
    ] {
        let (tagged, x) = surface(json);
        let sp = build_sp(&tagged, &x, Some(trunc)).unwrap();
        let dims = jacobian_dims(&sp, 6).unwrap();
        for v in 0..sp.quiver.vertices.len() {
            let vid = sp.quiver.vertices[v].id.clone();
            let once = mutate(&sp, v).unwrap();
            let k2 = once.quiver.vertex_ix(&vid).unwrap();
            let twice = mutate(&once, k2).unwrap();
            assert!(
                quivers_isomorphic(&sp.quiver, &twice.quiver, true),
                "{name}: quiver after double mutation at {vid}"
            );
            assert_eq!(
                jacobian_dims(&twice, 6).unwrap(),
                dims,
                "{name}: dims after double mutation at {vid}"
            );
        }
    }
    done("criterion 08 (mutation is an involution)", start, Duration::from_secs(60));
}

#[test]
fn criterion_09_flip_matches_mutation() {
    let start = Instant::now();
    for (name, json, trunc) in [
        ("pentagon", PENTAGON, 14),
        ("hex-1p-2orb", HEX_1P_2ORB, 14),
        ("hex-2p-1orb", HEX_2P_1ORB, 14),
        ("torus", TORUS, 12),
    ] {
        let (tagged, x) = surface(json);
        let sp = build_sp(&tagged, &x, Some(trunc)).unwrap();
        let q0 = build_quiver(&tagged.map).unwrap();
        for arc in tagged.map.arcs() {
            let id = tagged.map.edges[arc].id.clone();
            let out = flip(&tagged, &id).unwrap_or_else(|e| panic!("{name}: flip {id}: {e}"));
            // quiver level
            let q1 = build_quiver(&out.tagged.map).unwrap();
            let k = q0.vertex_ix(&id).unwrap();
            let mu_q = wq_mutate(&q0, k).unwrap();
            assert!(quivers_isomorphic(&q1, &mu_q, false), "{name}: quiver flip at {id}");
            // species level
            let y = match &out.sign_flip_at {
                Some(p) => x.flipped_at(p),
                None => x.clone(),
            };
            let sp_flip = build_sp(&out.tagged, &y, Some(trunc)).unwrap();
            let ksp = sp.quiver.vertex_ix(&id).unwrap();
            let sp_mut = mutate(&sp, ksp).unwrap();
            assert!(
                quivers_isomorphic(&sp_flip.quiver, &sp_mut.quiver, true),
                "{name}: species quiver at {id}"
            );
            assert_eq!(
                jacobian_dims(&sp_flip, 8).unwrap(),
                jacobian_dims(&sp_mut, 8).unwrap(),
                "{name}: Jacobian dimensions at {id}"
            );
        }
    }
    // the torus quiver's mutation class is one isomorphism class
    let (tt, _) = surface(TORUS);
    let q0 = build_quiver(&tt.map).unwrap();
    for k in 0..q0.vertices.len() {
        let m = wq_mutate(&q0, k).unwrap();
        assert!(quivers_isomorphic(&q0, &m, false), "torus closure at {k}");
    }
    done("criterion 09 (flip matches mutation globally)", start, Duration::from_secs(120));
}

#[test]
fn criterion_10_nondegeneracy_probe() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for (name, json, trunc) in [
        ("pentagon", PENTAGON, 10),
        ("hex-1p-2orb", HEX_1P_2ORB, 11),
        ("hex-2p-1orb", HEX_2P_1ORB, 12),
        ("torus", TORUS, 10),
    ] {
        let (tagged, x) = surface(json);
        let sp = build_sp(&tagged, &x, Some(trunc)).unwrap();
        let ids: Vec<String> = sp.quiver.vertices.iter().map(|v| v.id.clone()).collect();
        let mut seqs = Vec::new();
        for _ in 0..50 {
            let mut s: Vec<String> = Vec::new();
            let mut last = usize::MAX;
            for _ in 0..8 {
                let mut k = rng.gen_range(0..ids.len());
                if k == last {
                    k = (k + 1) % ids.len();
                }
                last = k;
                s.push(ids[k].clone());
            }
            seqs.push(s);
        }
        let report = nondegeneracy_probe(&sp, &seqs).unwrap();
        assert_eq!(report.failures, 0, "{name}: all sequences stay 2-acyclic");
    }
    done("criterion 10 (non-degeneracy probe)", start, Duration::from_secs(120));
}

#[test]
fn criterion_11_restriction_commutes_with_mutation() {
    let start = Instant::now();
    let (capped, x) = surface(CAPPED_PENTAGON);
    assert!(!capped.map.has_boundary(), "capping closes the surface");
    let sp_full = build_sp(&capped, &x, Some(12)).unwrap();
    let inner: BTreeSet<String> =
        ["o.x", "a1", "a2", "a3"].iter().map(|s| s.to_string()).collect();

    // the restriction reproduces the boundary surface's species
    let (pentagon, xp) = surface(PENTAGON);
    let sp_pent = build_sp(&pentagon, &xp, Some(12)).unwrap();
    let restricted = restrict_sp(&sp_full, &inner).unwrap();
    let sub = {
        // drop the isolated outer vertices for comparison
        let mut q = WeightedQuiver::new();
        for v in &restricted.quiver.vertices {
            if inner.contains(&v.id) {
                q.add_vertex(&v.id, v.weight).unwrap();
            }
        }
        for a in &restricted.quiver.arrows {
            let t = restricted.quiver.vertices[a.tail].id.clone();
            let h = restricted.quiver.vertices[a.head].id.clone();
            q.add_arrow_labeled(&a.id, &t, &h, a.label.clone()).unwrap();
        }
        q
    };
    assert!(quivers_isomorphic(&sub, &sp_pent.quiver, true), "restriction gives the pentagon");
    assert!(restricted.potential.is_zero(), "pentagon potential is empty");

    for k in ["a1", "a2", "a3", "o.x"] {
        let ix_full = sp_full.quiver.vertex_ix(k).unwrap();
        let mutated = mutate(&sp_full, ix_full).unwrap();
        let mut_then_res = restrict_sp(&mutated, &inner).unwrap();
        let ix_res = restricted.quiver.vertex_ix(k).unwrap();
        let res_then_mut = mutate(&restricted, ix_res).unwrap();
        assert!(
            quivers_isomorphic(&mut_then_res.quiver, &res_then_mut.quiver, true),
            "quiver iso at {k}"
        );
        assert_eq!(
            jacobian_dims(&mut_then_res, 8).unwrap(),
            jacobian_dims(&res_then_mut, 8).unwrap(),
            "dims at {k}"
        );
    }
    done("criterion 11 (restriction commutes with mutation)", start, Duration::from_secs(30));
}
