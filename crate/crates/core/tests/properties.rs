//! Property tests for the structural invariants.

mod common;

use common::brute_aut_count;
use proptest::prelude::*;
use spiketensor::counting::{is_colorful, sample_coloring};
use spiketensor::family::{build_necklaces, enumerate_blocks};
use spiketensor::hypergraph::{automorphisms, canonical_class, orbits_of, Hypergraph};
use spiketensor::tensor::sample_null;
use std::collections::BTreeSet;

/// Every proper nonempty subhypergraph H' of a necklace satisfies
/// 2|V(H')| > p|E(H')|, scanned exhaustively over edge subsets.
#[test]
fn necklace_subgraphs_are_vertex_rich() {
    for (m, ell) in [(1u32, 3u32), (1, 4), (2, 3)] {
        let blocks = enumerate_blocks(m, 3).unwrap();
        let fam = build_necklaces(&blocks, ell).unwrap();
        for class in &fam.classes {
            let edges = class.representative.edges();
            let ne = edges.len();
            for mask in 1..(1u32 << ne) - 1 {
                let mut verts: BTreeSet<u32> = BTreeSet::new();
                let mut count = 0u32;
                for (i, e) in edges.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        verts.extend(e.iter().copied());
                        count += 1;
                    }
                }
                assert!(
                    2 * verts.len() as u32 > 3 * count,
                    "m={m}, ell={ell}: subgraph with {count} edges on {} vertices",
                    verts.len()
                );
            }
        }
    }
}

/// Every produced necklace is 2-regular with 2mℓ edges on mpℓ vertices.
#[test]
fn necklaces_are_two_regular() {
    for (m, ell) in [(1u32, 3u32), (1, 4), (2, 3), (2, 4)] {
        let blocks = enumerate_blocks(m, 3).unwrap();
        let fam = build_necklaces(&blocks, ell).unwrap();
        assert!(!fam.classes.is_empty());
        for class in &fam.classes {
            let rep = &class.representative;
            assert_eq!(rep.n_vertices() as u32, m * 3 * ell);
            assert_eq!(rep.n_edges() as u32, 2 * m * ell);
            for &v in rep.vertices() {
                assert_eq!(rep.degree(v).unwrap(), 2);
            }
        }
    }
}

/// Random small 3-uniform hypergraph: up to 7 vertices, up to 5 edges.
fn small_hypergraph() -> impl Strategy<Value = Hypergraph> {
    (4u32..=7, proptest::collection::vec(0usize..35, 0..5)).prop_map(|(nv, picks)| {
        let mut triples = Vec::new();
        for a in 0..nv {
            for b in 0..a {
                for c in 0..b {
                    triples.push(vec![c, b, a]);
                }
            }
        }
        let mut edges: Vec<Vec<u32>> = picks
            .into_iter()
            .map(|i| triples[i % triples.len()].clone())
            .collect();
        edges.sort();
        edges.dedup();
        Hypergraph::on_range(nv, edges).unwrap()
    })
}

fn seeded_permutation(n: usize, seed: u64) -> Vec<u32> {
    let mut p: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        let j = spiketensor::rng::uniform_u32(
            spiketensor::rng::key(seed, 77, i as u64),
            (i + 1) as u32,
        );
        p.swap(i, j as usize);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_key_is_relabeling_invariant(h in small_hypergraph(), seed in 0u64..1_000_000) {
        let base = canonical_class(&h).unwrap();
        for round in 0..4u64 {
            let perm = seeded_permutation(h.n_vertices(), seed.wrapping_add(round));
            let relabeled = h.relabel(&perm);
            let c = canonical_class(&relabeled).unwrap();
            prop_assert_eq!(&c.key, &base.key);
            prop_assert_eq!(c.aut_size, base.aut_size);
        }
    }

    #[test]
    fn aut_count_matches_full_scan(h in small_hypergraph()) {
        prop_assert_eq!(canonical_class(&h).unwrap().aut_size, brute_aut_count(&h));
    }

    #[test]
    fn orbit_stabilizer_identity(h in small_hypergraph()) {
        let auts = automorphisms(&h).unwrap();
        let data = orbits_of(&h, h.vertices(), &auts).unwrap();
        for (orbit, stab) in data.orbits.iter().zip(&data.stabilizer_sizes) {
            prop_assert_eq!(orbit.len() as u64 * stab, auts.len() as u64);
        }
    }

    #[test]
    fn tensor_lookup_is_order_independent(seed in 0u64..500, a in 0u32..6, b in 0u32..6, c in 0u32..6) {
        prop_assume!(a != b && b != c && a != c);
        let t = sample_null(6, 3, seed).unwrap();
        let v = t.get(&[a, b, c]).unwrap();
        prop_assert_eq!(t.get(&[c, a, b]).unwrap(), v);
        prop_assert_eq!(t.get(&[b, a, c]).unwrap(), v);
    }

    #[test]
    fn coloring_is_deterministic_and_bounded(seed in 0u64..1000, k in 1u32..14) {
        let c1 = sample_coloring(20, k, seed);
        let c2 = sample_coloring(20, k, seed);
        prop_assert_eq!(&c1.colors, &c2.colors);
        prop_assert!(c1.colors.iter().all(|&x| (x as u32) < k));
        // a singleton is always colorful
        prop_assert!(is_colorful(&[3], &c1));
    }
}
