//! Labeled p-uniform hypergraphs with isomorphism machinery: canonical
//! labeling by iterative partition refinement with branching, automorphism
//! enumeration by pruned backtracking, and vertex orbits.
//!
//! Vertices are arbitrary `u32` ids. Edges are sorted vertex lists; after
//! induced-subgraph truncation an edge may have fewer than `p` vertices,
//! which the type tolerates (such hypergraphs are only fed to connectivity
//! tests and canonicalization, never to tensor evaluation).

use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// Hard ceiling for canonicalization, not a paper requirement.
pub const CANON_VERTEX_CAP: usize = 64;

/// Ceiling for exhaustive automorphism listing.
pub const AUT_LIST_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hypergraph {
    /// Sorted, deduplicated vertex ids. May include isolated vertices.
    vertices: Vec<u32>,
    /// Sorted list of sorted vertex subsets; no duplicate edges.
    edges: Vec<Vec<u32>>,
}

/// A vertex permutation, stored positionally: `perm[i]` is the position
/// (index into `vertices`) that the `i`-th vertex maps to.
pub type Perm = Vec<u32>;

impl Hypergraph {
    pub fn new(vertices: impl IntoIterator<Item = u32>, edges: Vec<Vec<u32>>) -> Result<Self> {
        let vertices: BTreeSet<u32> = vertices.into_iter().collect();
        let mut norm: BTreeSet<Vec<u32>> = BTreeSet::new();
        for mut e in edges {
            e.sort_unstable();
            e.dedup();
            if e.is_empty() {
                return Err(Error::Shape("empty edge".into()));
            }
            for v in &e {
                if !vertices.contains(v) {
                    return Err(Error::Lookup(format!("edge vertex {v} not in vertex set")));
                }
            }
            if !norm.insert(e) {
                return Err(Error::Shape("duplicate edge".into()));
            }
        }
        Ok(Hypergraph {
            vertices: vertices.into_iter().collect(),
            edges: norm.into_iter().collect(),
        })
    }

    /// Hypergraph on vertices 0..n with the given edges.
    pub fn on_range(n: u32, edges: Vec<Vec<u32>>) -> Result<Self> {
        Self::new(0..n, edges)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// True when every edge has exactly `p` vertices.
    pub fn is_uniform(&self, p: usize) -> bool {
        self.edges.iter().all(|e| e.len() == p)
    }

    fn vertex_pos(&self, v: u32) -> Result<usize> {
        self.vertices
            .binary_search(&v)
            .map_err(|_| Error::Lookup(format!("vertex {v}")))
    }

    pub fn degree(&self, v: u32) -> Result<usize> {
        self.vertex_pos(v)?;
        Ok(self
            .edges
            .iter()
            .filter(|e| e.binary_search(&v).is_ok())
            .count())
    }

    /// Degree-1 vertices, sorted.
    pub fn leaves(&self) -> Vec<u32> {
        let deg = self.degree_vec();
        self.vertices
            .iter()
            .zip(&deg)
            .filter(|(_, &d)| d == 1)
            .map(|(&v, _)| v)
            .collect()
    }

    /// Degree-0 vertices, sorted.
    pub fn isolated(&self) -> Vec<u32> {
        let deg = self.degree_vec();
        self.vertices
            .iter()
            .zip(&deg)
            .filter(|(_, &d)| d == 0)
            .map(|(&v, _)| v)
            .collect()
    }

    fn degree_vec(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.vertices.len()];
        for e in &self.edges {
            for v in e {
                deg[self.vertices.binary_search(v).unwrap()] += 1;
            }
        }
        deg
    }

    /// Connectivity of the projected graph; the empty hypergraph and
    /// singletons count as connected.
    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n <= 1 {
            return true;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let first = self.vertices.binary_search(&e[0]).unwrap();
            let r0 = find(&mut parent, first);
            for v in &e[1..] {
                let p = self.vertices.binary_search(v).unwrap();
                let r = find(&mut parent, p);
                parent[r] = find(&mut parent, r0);
            }
        }
        let root0 = find(&mut parent, 0);
        (1..n).all(|i| find(&mut parent, i) == root0)
    }

    /// Subhypergraph induced by `x`: vertex set `x`, edges are the nonempty
    /// truncations `e ∩ x`. Duplicate truncations collapse.
    pub fn induced(&self, x: &BTreeSet<u32>) -> Hypergraph {
        let mut edges: BTreeSet<Vec<u32>> = BTreeSet::new();
        for e in &self.edges {
            let t: Vec<u32> = e.iter().copied().filter(|v| x.contains(v)).collect();
            if !t.is_empty() {
                edges.insert(t);
            }
        }
        Hypergraph {
            vertices: self
                .vertices
                .iter()
                .copied()
                .filter(|v| x.contains(v))
                .collect(),
            edges: edges.into_iter().collect(),
        }
    }

    pub fn induced_without(&self, v: u32) -> Hypergraph {
        let x: BTreeSet<u32> = self.vertices.iter().copied().filter(|&u| u != v).collect();
        self.induced(&x)
    }

    /// Applies a positional permutation, keeping the same vertex id set.
    pub fn relabel(&self, perm: &Perm) -> Hypergraph {
        let map = |v: u32| -> u32 {
            let pos = self.vertices.binary_search(&v).unwrap();
            self.vertices[perm[pos] as usize]
        };
        let mut edges: Vec<Vec<u32>> = self
            .edges
            .iter()
            .map(|e| {
                let mut e2: Vec<u32> = e.iter().map(|&v| map(v)).collect();
                e2.sort_unstable();
                e2
            })
            .collect();
        edges.sort();
        Hypergraph {
            vertices: self.vertices.clone(),
            edges,
        }
    }

    /// Renames vertices through an arbitrary injective map.
    pub fn map_vertices(&self, f: impl Fn(u32) -> u32) -> Result<Hypergraph> {
        let vertices: BTreeSet<u32> = self.vertices.iter().map(|&v| f(v)).collect();
        if vertices.len() != self.vertices.len() {
            return Err(Error::Param("vertex map is not injective".into()));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| e.iter().map(|&v| f(v)).collect())
            .collect();
        Hypergraph::new(vertices, edges)
    }

    // ------------------------------------------------------------------
    // Text format: first line "p |V| |E|", then one edge per line of
    // space-separated 1-based vertex ids. Vertices are 1..|V|.
    // ------------------------------------------------------------------

    pub fn to_text(&self, p: usize) -> String {
        let pos: BTreeMap<u32, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i + 1))
            .collect();
        let mut s = format!("{} {} {}\n", p, self.vertices.len(), self.edges.len());
        for e in &self.edges {
            let ids: Vec<String> = e.iter().map(|v| pos[v].to_string()).collect();
            s.push_str(&ids.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<(Hypergraph, usize)> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty hypergraph text".into()))?;
        let head: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::Format(format!("bad header token {t}")))
            })
            .collect::<Result<_>>()?;
        if head.len() != 3 {
            return Err(Error::Format("header must be 'p |V| |E|'".into()));
        }
        let (p, nv, ne) = (head[0], head[1], head[2]);
        let mut edges = Vec::with_capacity(ne);
        for line in lines {
            let e: Vec<u32> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| Error::Format(format!("bad vertex {t}")))
                })
                .collect::<Result<_>>()?;
            if e.iter().any(|&v| v == 0 || v as usize > nv) {
                return Err(Error::Format("vertex id out of range".into()));
            }
            edges.push(e.iter().map(|&v| v - 1).collect());
        }
        if edges.len() != ne {
            return Err(Error::Format("edge count mismatch".into()));
        }
        Ok((Hypergraph::on_range(nv as u32, edges)?, p))
    }
}

// ----------------------------------------------------------------------
// Dense working form for canonicalization and automorphism search.
// ----------------------------------------------------------------------

struct Dense {
    n: usize,
    edges: Vec<Vec<u32>>,    // dense vertex indices, sorted
    incident: Vec<Vec<u32>>, // per vertex: incident edge indices
    edge_set: BTreeSet<Vec<u32>>,
}

impl Dense {
    fn build(h: &Hypergraph) -> Dense {
        let n = h.vertices.len();
        let edges: Vec<Vec<u32>> = h
            .edges
            .iter()
            .map(|e| {
                let mut d: Vec<u32> = e
                    .iter()
                    .map(|v| h.vertices.binary_search(v).unwrap() as u32)
                    .collect();
                d.sort_unstable();
                d
            })
            .collect();
        let mut incident = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            for &v in e {
                incident[v as usize].push(i as u32);
            }
        }
        let edge_set = edges.iter().cloned().collect();
        Dense {
            n,
            edges,
            incident,
            edge_set,
        }
    }
}

/// Isomorphism-class key plus automorphism data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalClass {
    /// Canonical byte string; equal iff the hypergraphs are isomorphic.
    pub key: Vec<u8>,
    /// Order of the automorphism group.
    pub aut_size: u64,
    /// The input relabeled to canonical vertex order, on ids 0..|V|.
    pub representative: Hypergraph,
}

impl CanonicalClass {
    pub fn key_hex(&self) -> String {
        self.key.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// One round of partition refinement. Colors are `0..k`; returns the refined
/// coloring with colors renumbered in signature order.
fn refine(d: &Dense, colors: &mut Vec<u32>) {
    loop {
        // Edge profile: (arity, sorted colors of members).
        let eprof: Vec<Vec<u32>> = d
            .edges
            .iter()
            .map(|e| {
                let mut p: Vec<u32> = e.iter().map(|&v| colors[v as usize]).collect();
                p.sort_unstable();
                p.insert(0, e.len() as u32);
                p
            })
            .collect();
        // Vertex signature: own color then sorted incident edge profiles.
        let mut sig: Vec<(u32, Vec<&Vec<u32>>, usize)> = (0..d.n)
            .map(|v| {
                let mut inc: Vec<&Vec<u32>> =
                    d.incident[v].iter().map(|&e| &eprof[e as usize]).collect();
                inc.sort();
                (colors[v], inc, v)
            })
            .collect();
        sig.sort();
        let mut next = vec![0u32; d.n];
        let mut c = 0u32;
        for i in 0..d.n {
            if i > 0 && (sig[i].0, &sig[i].1) != (sig[i - 1].0, &sig[i - 1].1) {
                c += 1;
            }
            next[sig[i].2] = c;
        }
        let stable = next == *colors;
        *colors = next;
        if stable {
            return;
        }
    }
}

/// Serializes the edge set under the labeling `label[v] = canonical position`.
fn key_under(d: &Dense, label: &[u32]) -> Vec<u8> {
    let mut edges: Vec<Vec<u8>> = d
        .edges
        .iter()
        .map(|e| {
            let mut m: Vec<u8> = e.iter().map(|&v| label[v as usize] as u8).collect();
            m.sort_unstable();
            m
        })
        .collect();
    edges.sort();
    let mut out = Vec::new();
    for e in edges {
        out.push(e.len() as u8);
        out.extend_from_slice(&e);
    }
    out
}

fn canon_search(d: &Dense, colors: Vec<u32>, best: &mut Option<(Vec<u8>, Vec<u32>)>) {
    let k = colors.iter().max().map_or(0, |&m| m + 1) as usize;
    if k == d.n {
        // Discrete: color is the canonical position.
        let key = key_under(d, &colors);
        let better = match best {
            None => true,
            Some((b, _)) => key < *b,
        };
        if better {
            *best = Some((key, colors));
        }
        return;
    }
    // Target cell: non-singleton cell minimizing (size, color id).
    let mut cell_sizes = vec![0usize; k];
    for &c in &colors {
        cell_sizes[c as usize] += 1;
    }
    let target = (0..k)
        .filter(|&c| cell_sizes[c] > 1)
        .min_by_key(|&c| (cell_sizes[c], c))
        .unwrap();
    let members: Vec<usize> = (0..d.n).filter(|&v| colors[v] as usize == target).collect();
    for v in members {
        let mut child = colors.clone();
        // Individualize: v sorts strictly before the rest of its cell.
        for c in child.iter_mut() {
            if *c as usize > target {
                *c += 1;
            }
        }
        child[v] = target as u32; // rest of the cell now has color target+1
        for (u, c) in child.iter_mut().enumerate() {
            if u != v && *c as usize == target {
                *c = target as u32 + 1;
            }
        }
        refine(d, &mut child);
        canon_search(d, child, best);
    }
}

/// Canonical key only (no automorphism count); cheaper for bulk dedup.
pub fn canonical_key(h: &Hypergraph) -> Result<Vec<u8>> {
    if h.n_vertices() > CANON_VERTEX_CAP {
        return Err(Error::Capacity(format!(
            "canonicalization supports at most {CANON_VERTEX_CAP} vertices, got {}",
            h.n_vertices()
        )));
    }
    let iso = h.isolated();
    let core_vs: BTreeSet<u32> = h
        .vertices
        .iter()
        .copied()
        .filter(|v| iso.binary_search(v).is_err())
        .collect();
    let core = h.induced(&core_vs);
    let d = Dense::build(&core);
    let mut colors = vec![0u32; d.n];
    refine(&d, &mut colors);
    let mut best: Option<(Vec<u8>, Vec<u32>)> = None;
    if d.n > 0 {
        canon_search(&d, colors, &mut best);
    }
    let core_key = best.map(|(k, _)| k).unwrap_or_default();
    let mut key = Vec::with_capacity(core_key.len() + 6);
    key.extend_from_slice(&(h.n_vertices() as u16).to_le_bytes());
    key.extend_from_slice(&(iso.len() as u16).to_le_bytes());
    key.extend_from_slice(&(h.n_edges() as u16).to_le_bytes());
    key.extend_from_slice(&core_key);
    Ok(key)
}

/// Canonical class of a hypergraph: exact canonical labeling plus the
/// automorphism group order. Isolated vertices are factored out first and
/// appended after the canonical core.
pub fn canonical_class(h: &Hypergraph) -> Result<CanonicalClass> {
    if h.n_vertices() > CANON_VERTEX_CAP {
        return Err(Error::Capacity(format!(
            "canonicalization supports at most {CANON_VERTEX_CAP} vertices, got {}",
            h.n_vertices()
        )));
    }
    let iso = h.isolated();
    let core_vs: BTreeSet<u32> = h
        .vertices
        .iter()
        .copied()
        .filter(|v| iso.binary_search(v).is_err())
        .collect();
    let core = h.induced(&core_vs);
    let d = Dense::build(&core);

    let mut colors = vec![0u32; d.n];
    refine(&d, &mut colors);
    let mut best: Option<(Vec<u8>, Vec<u32>)> = None;
    if d.n > 0 {
        canon_search(&d, colors, &mut best);
    }
    let (core_key, label) = best.unwrap_or((Vec::new(), Vec::new()));

    // Assemble the representative on ids 0..|V|: canonical core order,
    // then isolated vertices.
    let mut rep_edges: Vec<Vec<u32>> = d
        .edges
        .iter()
        .map(|e| e.iter().map(|&v| label[v as usize]).collect())
        .collect();
    rep_edges.sort();
    let representative = Hypergraph::on_range(h.n_vertices() as u32, rep_edges)?;

    let mut key = Vec::with_capacity(core_key.len() + 6);
    key.extend_from_slice(&(h.n_vertices() as u16).to_le_bytes());
    key.extend_from_slice(&(iso.len() as u16).to_le_bytes());
    key.extend_from_slice(&(h.n_edges() as u16).to_le_bytes());
    key.extend_from_slice(&core_key);

    let core_aut = count_isomorphisms(&core, &core, &[])?;
    let mut aut: u128 = core_aut as u128;
    for i in 2..=iso.len() as u128 {
        aut = aut
            .checked_mul(i)
            .ok_or_else(|| Error::Capacity("aut size overflow".into()))?;
    }
    let aut_size = u64::try_from(aut).map_err(|_| Error::Capacity("aut size overflow".into()))?;

    Ok(CanonicalClass {
        key,
        aut_size,
        representative,
    })
}

// ----------------------------------------------------------------------
// Isomorphism / automorphism backtracking.
// ----------------------------------------------------------------------

struct IsoSearch<'a> {
    a: &'a Dense,
    b: &'a Dense,
    order: Vec<usize>, // assignment order over a's vertices
    img: Vec<i32>,     // a-vertex -> b-vertex or -1
    used: Vec<bool>,   // b-vertex used
    deg_a: Vec<usize>,
    deg_b: Vec<usize>,
    collect: Option<Vec<Perm>>,
    count: u64,
    cap: Option<usize>,
    overflow: bool,
}

impl<'a> IsoSearch<'a> {
    /// Assignment order: pinned vertices first, then BFS-like order that keeps
    /// each prefix as connected as possible (better pruning).
    fn make_order(a: &Dense, pinned: &[usize]) -> Vec<usize> {
        let mut order: Vec<usize> = pinned.to_vec();
        let mut placed = vec![false; a.n];
        for &v in pinned {
            placed[v] = true;
        }
        while order.len() < a.n {
            // prefer a vertex sharing an edge with the placed set, with max
            // placed-neighbor count; fall back to max degree
            let mut bestv = None;
            let mut bestscore = (0usize, 0usize);
            for v in 0..a.n {
                if placed[v] {
                    continue;
                }
                let mut shared = 0;
                for &e in &a.incident[v] {
                    shared += a.edges[e as usize]
                        .iter()
                        .filter(|&&u| placed[u as usize])
                        .count();
                }
                let score = (shared, a.incident[v].len());
                if bestv.is_none() || score > bestscore {
                    bestv = Some(v);
                    bestscore = score;
                }
            }
            let v = bestv.unwrap();
            placed[v] = true;
            order.push(v);
        }
        order
    }

    fn run(&mut self, depth: usize) {
        if self.overflow {
            return;
        }
        if depth == self.order.len() {
            self.count += 1;
            if let Some(list) = &mut self.collect {
                if let Some(cap) = self.cap {
                    if list.len() >= cap {
                        self.overflow = true;
                        return;
                    }
                }
                list.push(self.img.iter().map(|&x| x as u32).collect());
            }
            return;
        }
        let v = self.order[depth];
        for w in 0..self.b.n {
            if self.used[w] || self.deg_a[v] != self.deg_b[w] {
                continue;
            }
            if !self.compatible(v, w) {
                continue;
            }
            self.img[v] = w as i32;
            self.used[w] = true;
            self.run(depth + 1);
            self.img[v] = -1;
            self.used[w] = false;
        }
    }

    /// Every edge incident to `v` whose vertices are all mapped (after v→w)
    /// must land on an edge of `b`.
    fn compatible(&self, v: usize, w: usize) -> bool {
        for &ei in &self.a.incident[v] {
            let e = &self.a.edges[ei as usize];
            let mut image: Vec<u32> = Vec::with_capacity(e.len());
            let mut full = true;
            for &u in e {
                let m = if u as usize == v {
                    w as i32
                } else {
                    self.img[u as usize]
                };
                if m < 0 {
                    full = false;
                    break;
                }
                image.push(m as u32);
            }
            if full {
                image.sort_unstable();
                if !self.b.edge_set.contains(&image) {
                    return false;
                }
            }
        }
        true
    }
}

fn iso_search(
    a: &Hypergraph,
    b: &Hypergraph,
    pinned: &[(u32, u32)],
    collect: bool,
    cap: Option<usize>,
) -> Result<(u64, Option<Vec<Perm>>)> {
    if a.n_vertices() != b.n_vertices() || a.n_edges() != b.n_edges() {
        return Ok((0, if collect { Some(Vec::new()) } else { None }));
    }
    let da = Dense::build(a);
    let db = Dense::build(b);
    let mut img = vec![-1i32; da.n];
    let mut used = vec![false; db.n];
    let mut pins = Vec::new();
    for &(va, vb) in pinned {
        let pa = a.vertex_pos(va)?;
        let pb = b.vertex_pos(vb)?;
        if img[pa] >= 0 || used[pb] {
            return Err(Error::Param("conflicting pinned vertices".into()));
        }
        img[pa] = pb as i32;
        used[pb] = true;
        pins.push(pa);
    }
    let deg_a: Vec<usize> = (0..da.n).map(|v| da.incident[v].len()).collect();
    let deg_b: Vec<usize> = (0..db.n).map(|v| db.incident[v].len()).collect();
    // verify pinned assignments are locally consistent
    let order = IsoSearch::make_order(&da, &pins);
    let mut s = IsoSearch {
        a: &da,
        b: &db,
        order,
        img,
        used,
        deg_a,
        deg_b,
        collect: if collect { Some(Vec::new()) } else { None },
        count: 0,
        cap,
        overflow: false,
    };
    // pinned vertices occupy the first `pins` positions of the order; their
    // images are already set, so skip them by validating compatibility once
    for (i, &v) in s.order.clone().iter().enumerate().take(pins.len()) {
        let w = s.img[v];
        debug_assert!(w >= 0);
        let w = w as usize;
        s.used[w] = false;
        s.img[v] = -1;
        if s.deg_a[v] != s.deg_b[w] || !s.compatible(v, w) {
            return Ok((0, s.collect));
        }
        s.img[v] = w as i32;
        s.used[w] = true;
        let _ = i;
    }
    s.run(pins.len());
    if s.overflow {
        return Err(Error::Capacity("isomorphism list exceeds cap".into()));
    }
    Ok((s.count, s.collect))
}

/// All isomorphisms from `a` to `b` mapping each pinned pair `(va, vb)`.
/// Returned as positional permutations over `a.vertices()` / `b.vertices()`.
pub fn isomorphisms(a: &Hypergraph, b: &Hypergraph, pinned: &[(u32, u32)]) -> Result<Vec<Perm>> {
    if a.n_vertices() > AUT_LIST_CAP {
        return Err(Error::Capacity(format!(
            "isomorphism listing supports at most {AUT_LIST_CAP} vertices"
        )));
    }
    let (_, list) = iso_search(a, b, pinned, true, Some(5_000_000))?;
    Ok(list.unwrap())
}

pub fn count_isomorphisms(a: &Hypergraph, b: &Hypergraph, pinned: &[(u32, u32)]) -> Result<u64> {
    let (count, _) = iso_search(a, b, pinned, false, None)?;
    Ok(count)
}

/// Complete automorphism list (positional permutations).
pub fn automorphisms(h: &Hypergraph) -> Result<Vec<Perm>> {
    isomorphisms(h, h, &[])
}

/// Automorphisms fixing the listed vertices pointwise.
pub fn automorphisms_fixing(h: &Hypergraph, fixed: &[u32]) -> Result<Vec<Perm>> {
    let pins: Vec<(u32, u32)> = fixed.iter().map(|&v| (v, v)).collect();
    isomorphisms(h, h, &pins)
}

pub fn automorphism_count(h: &Hypergraph) -> Result<u64> {
    count_isomorphisms(h, h, &[])
}

// ----------------------------------------------------------------------
// Orbits.
// ----------------------------------------------------------------------

/// Orbit partition of a vertex subset under a list of automorphisms, with
/// per-orbit stabilizer sizes via orbit-stabilizer.
#[derive(Clone, Debug)]
pub struct VertexOrbitData {
    /// Each orbit as a sorted list of vertex ids.
    pub orbits: Vec<Vec<u32>>,
    /// |Aut_v(H)| for (any) representative of the matching orbit.
    pub stabilizer_sizes: Vec<u64>,
}

pub fn orbits_of(h: &Hypergraph, subset: &[u32], auts: &[Perm]) -> Result<VertexOrbitData> {
    let n = h.n_vertices();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for perm in auts {
        for i in 0..n {
            let j = perm[i] as usize;
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for &v in subset {
        let p = h.vertex_pos(v)?;
        groups.entry(find(&mut parent, p)).or_default().push(v);
    }
    let aut_size = auts.len() as u64;
    let mut orbits = Vec::new();
    let mut stabs = Vec::new();
    for (_, mut members) in groups {
        members.sort_unstable();
        stabs.push(aut_size / members.len() as u64);
        orbits.push(members);
    }
    Ok(VertexOrbitData {
        orbits,
        stabilizer_sizes: stabs,
    })
}

/// Orbits of the leaves of `h` under its full automorphism group.
pub fn leaf_orbits(h: &Hypergraph) -> Result<VertexOrbitData> {
    let auts = automorphisms(h)?;
    orbits_of(h, &h.leaves(), &auts)
}
