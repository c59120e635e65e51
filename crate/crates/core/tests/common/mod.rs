//! Naive test oracles, deliberately independent of the library's counting
//! paths: plain permutation scans, plain injective-map enumeration with a
//! last-moment or incremental color filter, and edge-set deduplication.
//!
//! Each integration-test target compiles this module separately and uses a
//! different subset of it.
#![allow(dead_code)]

use spiketensor::counting::Coloring;
use spiketensor::hypergraph::Hypergraph;
use spiketensor::tensor::SymmetricTensor;
use std::collections::BTreeSet;

pub fn next_permutation(p: &mut [u32]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// |Aut| by scanning all |V|! bijections.
pub fn brute_aut_count(h: &Hypergraph) -> u64 {
    let n = h.n_vertices();
    let mut perm: Vec<u32> = (0..n as u32).collect();
    let mut count = 0;
    loop {
        if h.relabel(&perm).edges() == h.edges() {
            count += 1;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    count
}

/// Whether some bijection maps `a` onto `b` (full scan).
pub fn brute_isomorphic(a: &Hypergraph, b: &Hypergraph) -> bool {
    if a.n_vertices() != b.n_vertices() || a.n_edges() != b.n_edges() {
        return false;
    }
    let mut perm: Vec<u32> = (0..a.n_vertices() as u32).collect();
    loop {
        if a.relabel(&perm).edges() == b.edges() {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

/// Whether some automorphism swaps the two given vertices (full scan).
pub fn brute_has_swap(h: &Hypergraph, a: u32, b: u32) -> bool {
    let n = h.n_vertices();
    let pa = h.vertices().iter().position(|&v| v == a).unwrap();
    let pb = h.vertices().iter().position(|&v| v == b).unwrap();
    let mut perm: Vec<u32> = (0..n as u32).collect();
    loop {
        if perm[pa] as usize == pb && h.relabel(&perm).edges() == h.edges() {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

/// Distinct labeled copies of `rep` inside K_n, counted by deduplicating
/// image edge sets over all injective vertex maps.
pub fn count_copies_dedup(rep: &Hypergraph, n: u32) -> u64 {
    let k = rep.n_vertices();
    let mut seen: BTreeSet<Vec<Vec<u32>>> = BTreeSet::new();
    let mut img = vec![0u32; k];
    let mut used = vec![false; n as usize];
    fn rec(
        slot: usize,
        k: usize,
        n: usize,
        rep: &Hypergraph,
        img: &mut [u32],
        used: &mut [bool],
        seen: &mut BTreeSet<Vec<Vec<u32>>>,
    ) {
        if slot == k {
            let mut edges: Vec<Vec<u32>> = rep
                .edges()
                .iter()
                .map(|e| {
                    let mut im: Vec<u32> = e.iter().map(|&v| img[v as usize]).collect();
                    im.sort_unstable();
                    im
                })
                .collect();
            edges.sort();
            seen.insert(edges);
            return;
        }
        for v in 0..n {
            if used[v] {
                continue;
            }
            used[v] = true;
            img[slot] = v as u32;
            rec(slot + 1, k, n, rep, img, used, seen);
            used[v] = false;
        }
    }
    rec(0, k, n as usize, rep, &mut img, &mut used, &mut seen);
    seen.len() as u64
}

/// Σ over labeled copies of `rep` (isomorphic subhypergraphs of K_n) of
/// χ_colorful · ∏ Y_e, computed as an embedding sum divided by |Aut| given
/// by the caller. Pins, when present, fix rep vertex ids to host vertices.
pub fn naive_colorful_sum(
    tensor: &SymmetricTensor,
    rep: &Hypergraph,
    coloring: Option<&Coloring>,
    pins: &[(u32, u32)],
    aut: u64,
) -> f64 {
    let k = rep.n_vertices();
    let n = tensor.n as usize;
    let mut img = vec![u32::MAX; k];
    let mut used = vec![false; n];
    let mut cmask = 0u32;
    for &(rv, host) in pins {
        img[rv as usize] = host;
        used[host as usize] = true;
        if let Some(c) = coloring {
            let bit = 1u32 << c.colors[host as usize];
            if cmask & bit != 0 {
                return 0.0;
            }
            cmask |= bit;
        }
    }
    let mut total = 0.0;
    #[allow(clippy::too_many_arguments)]
    fn rec(
        slot: usize,
        k: usize,
        n: usize,
        rep: &Hypergraph,
        tensor: &SymmetricTensor,
        coloring: Option<&Coloring>,
        img: &mut [u32],
        used: &mut [bool],
        cmask: u32,
        total: &mut f64,
    ) {
        if slot == k {
            let mut prod = 1.0;
            for e in rep.edges() {
                let mut im: Vec<u32> = e.iter().map(|&v| img[v as usize]).collect();
                im.sort_unstable();
                prod *= tensor.get_sorted(&im);
            }
            *total += prod;
            return;
        }
        if img[slot] != u32::MAX {
            rec(
                slot + 1,
                k,
                n,
                rep,
                tensor,
                coloring,
                img,
                used,
                cmask,
                total,
            );
            return;
        }
        for v in 0..n {
            if used[v] {
                continue;
            }
            let mut mask = cmask;
            if let Some(c) = coloring {
                let bit = 1u32 << c.colors[v];
                if mask & bit != 0 {
                    continue;
                }
                mask |= bit;
            }
            used[v] = true;
            img[slot] = v as u32;
            rec(
                slot + 1,
                k,
                n,
                rep,
                tensor,
                coloring,
                img,
                used,
                mask,
                total,
            );
            used[v] = false;
            img[slot] = u32::MAX;
        }
    }
    rec(
        0, k, n, rep, tensor, coloring, &mut img, &mut used, cmask, &mut total,
    );
    total / aut as f64
}

/// All 3-subsets of 0..nv, for exhaustive block filters.
pub fn all_triples(nv: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for a in 0..nv {
        for b in 0..a {
            for c in 0..b {
                out.push(vec![c, b, a]);
            }
        }
    }
    out
}
