//! Enumeration of the block family U(m,p) and assembly of the necklace and
//! chain families, with exact automorphism counts and rational β weights.
//!
//! Blocks are connected p-uniform hypergraphs on mp+1 vertices with 2m edges,
//! all degrees in {1,2}, that stay connected after deleting any one vertex;
//! such a hypergraph has exactly two leaves. Necklaces glue ℓ blocks
//! leaf-to-leaf in a cycle, chains in a path. A chain class is kept only if
//! no automorphism of the assembled hypergraph swaps its two endpoints.
//!
//! Because the unlabeled class of a block forgets which leaf is which, block
//! references inside sequences are oriented: (class index, flipped). For a
//! leaf-reversible block the flip is normalized away.

use crate::combinatorics::{binomial, masks_with_popcount};
use crate::error::{Error, Result};
use crate::hypergraph::{
    automorphisms, canonical_class, canonical_key, isomorphisms, leaf_orbits, Hypergraph, Perm,
};
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub type Rational = Ratio<BigInt>;

fn recip(x: u64) -> Rational {
    Rational::new(BigInt::from(1), BigInt::from(x))
}

/// Caps the raw block search space C(C(mp+1,p), 2m).
const BLOCK_SEARCH_CAP: u64 = 10_000_000_000;
/// Caps the number of oriented block sequences considered.
const SEQUENCE_CAP: u64 = 10_000_000;

// ----------------------------------------------------------------------
// Blocks.
// ----------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct BlockClass {
    /// Canonical representative on vertices 0..mp+1.
    pub representative: Hypergraph,
    pub key: Vec<u8>,
    pub aut_size: u64,
    /// The two leaves of the representative, ascending.
    pub leaf_in: u32,
    pub leaf_out: u32,
    /// Whether some automorphism exchanges the two leaves.
    pub reversible: bool,
    /// Automorphisms fixing both leaves pointwise.
    pub both_leaf_stabilizer: u64,
    /// 1 if the leaves form one orbit, else 2.
    pub leaf_orbit_count: usize,
    /// |Aut_v| per leaf orbit, aligned with `leaf_orbit_count`.
    pub leaf_stabilizers: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct BlockFamily {
    pub m: u32,
    pub p: u32,
    pub classes: Vec<BlockClass>,
    /// β_U = Σ 1/|Aut(U)| over classes.
    pub beta_u: Rational,
    /// β◇_U = Σ over classes and leaf orbits of 1/|Aut_v(U)|.
    pub beta_diamond: Rational,
}

impl BlockFamily {
    pub fn block_vertices(&self) -> u32 {
        self.m * self.p + 1
    }
}

/// Builds per-class data from a hypergraph already known to satisfy the
/// block conditions.
fn classify_block(rep: Hypergraph, key: Vec<u8>) -> Result<BlockClass> {
    let auts = automorphisms(&rep)?;
    let leaves = rep.leaves();
    debug_assert_eq!(leaves.len(), 2);
    let (a, b) = (leaves[0], leaves[1]);
    let pos_of = |v: u32| rep.vertices().iter().position(|&u| u == v).unwrap();
    let (pa, pb) = (pos_of(a), pos_of(b));
    let reversible = auts.iter().any(|perm| perm[pa] == pb as u32);
    let both = auts
        .iter()
        .filter(|perm| perm[pa] == pa as u32 && perm[pb] == pb as u32)
        .count() as u64;
    let orbit_data = leaf_orbits(&rep)?;
    Ok(BlockClass {
        key,
        aut_size: auts.len() as u64,
        leaf_in: a,
        leaf_out: b,
        reversible,
        both_leaf_stabilizer: both,
        leaf_orbit_count: orbit_data.orbits.len(),
        leaf_stabilizers: orbit_data.stabilizer_sizes.clone(),
        representative: rep,
    })
}

/// Enumerates U(m,p): depth-first search over edge sets with incremental
/// degree caps and coverage pruning, then the connectivity filters, then
/// canonical dedup.
pub fn enumerate_blocks(m: u32, p: u32) -> Result<BlockFamily> {
    if m < 1 || p < 2 {
        return Err(Error::Param(format!(
            "need m >= 1 and p >= 2, got m={m}, p={p}"
        )));
    }
    let nv = (m * p + 1) as usize;
    let ne = (2 * m) as usize;
    let n_candidates = binomial(nv as u64, p as u64);
    if binomial(n_candidates, ne as u64) > BLOCK_SEARCH_CAP {
        return Err(Error::Capacity(format!(
            "block search space C({n_candidates},{ne}) exceeds cap {BLOCK_SEARCH_CAP}"
        )));
    }
    if nv > 31 {
        return Err(Error::Capacity("block vertex count exceeds 31".into()));
    }

    // Candidate edges as bitmasks, in lexicographic order of the sorted
    // vertex lists, so triples through low vertices come first and the
    // lowest-uncovered-vertex prune bites early.
    let mut candidates: Vec<u32> = masks_with_popcount(nv as u32, p);
    candidates.sort_by_key(|&m| {
        let mut key = 0u64;
        let mut mm = m;
        for slot in 0..p {
            let v = mm.trailing_zeros() as u64;
            mm &= mm - 1;
            key |= v << (8 * (p - 1 - slot));
        }
        key
    });
    // last candidate index containing each vertex, for coverage pruning
    let mut last_idx = vec![0usize; nv];
    for (i, &c) in candidates.iter().enumerate() {
        for v in 0..nv {
            if c >> v & 1 == 1 {
                last_idx[v] = i;
            }
        }
    }

    let mut found: Vec<(Vec<u8>, Hypergraph)> = Vec::new();
    let mut seen_keys: std::collections::BTreeSet<Vec<u8>> = std::collections::BTreeSet::new();
    let mut chosen: Vec<u32> = Vec::with_capacity(ne);
    let full: u32 = if nv == 31 {
        0x7fff_ffff
    } else {
        (1u32 << nv) - 1
    };

    struct Dfs<'a> {
        candidates: &'a [u32],
        last_idx: &'a [usize],
        ne: usize,
        p: u32,
        full: u32,
    }

    impl<'a> Dfs<'a> {
        /// `deg1`/`deg2`: masks of degree-1 / degree-2 vertices.
        fn run(
            &self,
            start: usize,
            deg1: u32,
            deg2: u32,
            chosen: &mut Vec<u32>,
            out: &mut dyn FnMut(&[u32]),
        ) {
            if chosen.len() == self.ne {
                if deg1 | deg2 == self.full {
                    out(chosen);
                }
                return;
            }
            let remaining = (self.ne - chosen.len()) as u32;
            let uncovered = self.full & !(deg1 | deg2);
            if uncovered.count_ones() > remaining * self.p {
                return;
            }
            // each future edge consumes p units of remaining degree capacity
            if 2 * uncovered.count_ones() + deg1.count_ones() < remaining * self.p {
                return;
            }
            let min_uncovered = if uncovered == 0 {
                usize::MAX
            } else {
                self.last_idx[uncovered.trailing_zeros() as usize]
            };
            let end = self.candidates.len() - remaining as usize + 1;
            for i in start..end.min(min_uncovered.saturating_add(1)) {
                let cand = self.candidates[i];
                if cand & deg2 != 0 {
                    continue;
                }
                let bump = cand & deg1;
                chosen.push(cand);
                self.run(i + 1, (deg1 | cand) & !bump, deg2 | bump, chosen, out);
                chosen.pop();
            }
        }
    }

    // Reachability over vertex masks: union in every edge that touches the
    // current reach set, restricted to `vset`.
    fn mask_connected(vset: u32, edge_masks: &[u32]) -> bool {
        if vset == 0 {
            return true;
        }
        let mut reach = vset & vset.wrapping_neg();
        loop {
            let before = reach;
            for &e in edge_masks {
                let e = e & vset;
                if e & reach != 0 {
                    reach |= e;
                }
            }
            if reach == before {
                break;
            }
        }
        reach == vset
    }

    let dfs = Dfs {
        candidates: &candidates,
        last_idx: &last_idx,
        ne,
        p,
        full,
    };
    let mut check_and_insert = |masks: &[u32]| {
        if !mask_connected(full, masks) {
            return;
        }
        for v in 0..nv as u32 {
            if !mask_connected(full & !(1 << v), masks) {
                return;
            }
        }
        let edges: Vec<Vec<u32>> = masks
            .iter()
            .map(|&mask| (0..nv as u32).filter(|v| mask >> v & 1 == 1).collect())
            .collect();
        let h = Hypergraph::on_range(nv as u32, edges).expect("valid candidate edge set");
        let key = canonical_key(&h).expect("block within canon capacity");
        if seen_keys.insert(key.clone()) {
            found.push((key, h));
        }
    };
    dfs.run(0, 0, 0, &mut chosen, &mut check_and_insert);

    found.sort_by(|a, b| a.0.cmp(&b.0));
    let classes: Vec<BlockClass> = found
        .into_iter()
        .map(|(key, h)| classify_block(canonical_class(&h)?.representative, key))
        .collect::<Result<_>>()?;

    let mut beta_u = Rational::zero();
    let mut beta_diamond = Rational::zero();
    for c in &classes {
        beta_u += recip(c.aut_size);
        for &s in &c.leaf_stabilizers {
            beta_diamond += recip(s);
        }
    }
    Ok(BlockFamily {
        m,
        p,
        classes,
        beta_u,
        beta_diamond,
    })
}

// ----------------------------------------------------------------------
// Oriented sequences.
// ----------------------------------------------------------------------

/// A block reference with a gluing direction. `flipped` swaps which leaf is
/// glued on which side; it is always false for reversible classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrientedRef {
    pub class: u32,
    pub flipped: bool,
}

fn flip(blocks: &BlockFamily, r: OrientedRef) -> OrientedRef {
    if blocks.classes[r.class as usize].reversible {
        r
    } else {
        OrientedRef {
            class: r.class,
            flipped: !r.flipped,
        }
    }
}

fn all_refs(blocks: &BlockFamily) -> Vec<OrientedRef> {
    let mut refs = Vec::new();
    for (i, c) in blocks.classes.iter().enumerate() {
        refs.push(OrientedRef {
            class: i as u32,
            flipped: false,
        });
        if !c.reversible {
            refs.push(OrientedRef {
                class: i as u32,
                flipped: true,
            });
        }
    }
    refs
}

fn sequences(refs: &[OrientedRef], ell: usize) -> Result<Vec<Vec<OrientedRef>>> {
    let total = (refs.len() as u64)
        .checked_pow(ell as u32)
        .unwrap_or(u64::MAX);
    if total > SEQUENCE_CAP {
        return Err(Error::Capacity(format!(
            "{total} oriented sequences exceed cap {SEQUENCE_CAP}"
        )));
    }
    let mut out: Vec<Vec<OrientedRef>> = vec![Vec::new()];
    for _ in 0..ell {
        let mut next = Vec::with_capacity(out.len() * refs.len());
        for seq in &out {
            for &r in refs {
                let mut s = seq.clone();
                s.push(r);
                next.push(s);
            }
        }
        out = next;
    }
    Ok(out)
}

fn reverse_flip(blocks: &BlockFamily, seq: &[OrientedRef]) -> Vec<OrientedRef> {
    seq.iter().rev().map(|&r| flip(blocks, r)).collect()
}

fn rotations(seq: &[OrientedRef]) -> impl Iterator<Item = Vec<OrientedRef>> + '_ {
    (0..seq.len()).map(move |k| {
        let mut s = seq[k..].to_vec();
        s.extend_from_slice(&seq[..k]);
        s
    })
}

/// Canonical form of a cyclic oriented sequence under rotation and
/// reflection-with-flip.
fn cyclic_canonical(blocks: &BlockFamily, seq: &[OrientedRef]) -> Vec<OrientedRef> {
    let rev = reverse_flip(blocks, seq);
    rotations(seq).chain(rotations(&rev)).min().unwrap()
}

// ----------------------------------------------------------------------
// Assembly.
// ----------------------------------------------------------------------

/// How one block of an assembled necklace or chain sits inside the
/// representative hypergraph.
#[derive(Clone, Debug)]
pub struct BlockEmbedding {
    pub r: OrientedRef,
    /// Block representative vertex id -> assembled vertex id.
    pub vertex_map: Vec<u32>,
}

/// Glues the oriented sequence; junctions first (ids 0..n_junctions), then
/// block interiors. `cyclic` wraps the last block back to junction 0.
fn assemble(
    blocks: &BlockFamily,
    seq: &[OrientedRef],
    cyclic: bool,
) -> Result<(Hypergraph, Vec<u32>, Vec<BlockEmbedding>)> {
    let ell = seq.len();
    let nv_block = blocks.block_vertices() as usize;
    let n_junctions = if cyclic { ell } else { ell + 1 };
    let mut next_id = n_junctions as u32;
    let mut edges: Vec<Vec<u32>> = Vec::new();
    let mut embeddings = Vec::with_capacity(ell);
    for (i, &r) in seq.iter().enumerate() {
        let class = &blocks.classes[r.class as usize];
        let (leaf_a, leaf_b) = if r.flipped {
            (class.leaf_out, class.leaf_in)
        } else {
            (class.leaf_in, class.leaf_out)
        };
        let j_in = i as u32;
        let j_out = if cyclic {
            ((i + 1) % ell) as u32
        } else {
            (i + 1) as u32
        };
        let mut vmap = vec![u32::MAX; nv_block];
        vmap[leaf_a as usize] = j_in;
        vmap[leaf_b as usize] = j_out;
        for v in 0..nv_block as u32 {
            if v != leaf_a && v != leaf_b {
                vmap[v as usize] = next_id;
                next_id += 1;
            }
        }
        for e in class.representative.edges() {
            edges.push(e.iter().map(|&v| vmap[v as usize]).collect());
        }
        embeddings.push(BlockEmbedding {
            r,
            vertex_map: vmap,
        });
    }
    let h = Hypergraph::on_range(next_id, edges)?;
    let junctions: Vec<u32> = (0..n_junctions as u32).collect();
    Ok((h, junctions, embeddings))
}

// ----------------------------------------------------------------------
// Necklaces.
// ----------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct NecklaceClass {
    pub seq: Vec<OrientedRef>,
    /// Assembled representative: junction i sits at vertex id i.
    pub representative: Hypergraph,
    pub junctions: Vec<u32>,
    pub embeddings: Vec<BlockEmbedding>,
    /// Realized rotations (including the identity).
    pub a_plus: u64,
    /// Realized reflections.
    pub a_minus: u64,
    /// |Aut(H)| = (𝔞₊+𝔞₋)·∏ both-leaf stabilizers.
    pub aut_size: u64,
}

impl NecklaceClass {
    pub fn symmetry_factor(&self) -> u64 {
        self.a_plus + self.a_minus
    }
}

#[derive(Clone, Debug)]
pub struct NecklaceFamily {
    pub blocks: BlockFamily,
    pub ell: u32,
    pub classes: Vec<NecklaceClass>,
    /// β_H = Σ 1/|Aut(H)|.
    pub beta: Rational,
}

impl NecklaceFamily {
    pub fn n_vertices(&self) -> u32 {
        self.blocks.m * self.blocks.p * self.ell
    }

    pub fn n_edges(&self) -> u32 {
        2 * self.blocks.m * self.ell
    }
}

pub fn build_necklaces(blocks: &BlockFamily, ell: u32) -> Result<NecklaceFamily> {
    if ell < 3 {
        return Err(Error::Param(format!(
            "necklaces need ell >= 3 (the gluing constraints are contradictory below), got {ell}"
        )));
    }
    let refs = all_refs(blocks);
    let mut classes = Vec::new();
    if !refs.is_empty() {
        let mut reps: std::collections::BTreeSet<Vec<OrientedRef>> =
            std::collections::BTreeSet::new();
        for seq in sequences(&refs, ell as usize)? {
            reps.insert(cyclic_canonical(blocks, &seq));
        }
        for seq in reps {
            let (h, junctions, embeddings) = assemble(blocks, &seq, true)?;
            let a_plus = rotations(&seq).filter(|r| *r == seq).count() as u64;
            let rev = reverse_flip(blocks, &seq);
            let a_minus = rotations(&rev).filter(|r| *r == seq).count() as u64;
            let stab_product: u64 = seq
                .iter()
                .map(|r| blocks.classes[r.class as usize].both_leaf_stabilizer)
                .product();
            classes.push(NecklaceClass {
                aut_size: (a_plus + a_minus) * stab_product,
                seq,
                representative: h,
                junctions,
                embeddings,
                a_plus,
                a_minus,
            });
        }
    }
    // structural dedup double-checked by canonical keys when feasible
    if !classes.is_empty() && classes[0].representative.n_vertices() <= 64 {
        let mut keys = std::collections::BTreeSet::new();
        for c in &classes {
            if !keys.insert(canonical_key(&c.representative)?) {
                return Err(Error::Family(
                    "necklace dedup failure: two sequences canonicalized equal".into(),
                ));
            }
        }
    }
    let beta = classes.iter().map(|c| recip(c.aut_size)).sum();
    Ok(NecklaceFamily {
        blocks: blocks.clone(),
        ell,
        classes,
        beta,
    })
}

/// Materializes Aut(H) for an assembled necklace by splicing per-block
/// isomorphism sets over every realized rotation and reflection.
/// Returns positional permutations over the representative's vertices
/// (ids are 0..|V|, so position equals id).
pub fn aut_necklace_alg7(blocks: &BlockFamily, h: &NecklaceClass) -> Result<Vec<Perm>> {
    let ell = h.seq.len();
    let n = h.representative.n_vertices();
    let sub = |i: usize| -> Result<Hypergraph> {
        let class = &blocks.classes[h.seq[i].class as usize];
        let ids: Vec<u32> = h.embeddings[i].vertex_map.clone();
        class.representative.map_vertices(|v| ids[v as usize])
    };
    let subs: Vec<Hypergraph> = (0..ell).map(sub).collect::<Result<_>>()?;
    let junction = |i: usize| h.junctions[i % ell];

    let mut out: Vec<Perm> = Vec::new();
    let mut push_spliced = |per_block: &[Vec<Perm>], block_image: &dyn Fn(usize) -> usize| {
        // cartesian product of per-block isomorphism choices
        let mut stack: Vec<Vec<u32>> = vec![vec![u32::MAX; n]];
        for (i, isos) in per_block.iter().enumerate() {
            let src = &subs[i];
            let dst = &subs[block_image(i)];
            let mut next = Vec::with_capacity(stack.len() * isos.len());
            for base in &stack {
                for iso in isos {
                    let mut g = base.clone();
                    let mut ok = true;
                    for (pos, &v) in src.vertices().iter().enumerate() {
                        let img = dst.vertices()[iso[pos] as usize];
                        if g[v as usize] != u32::MAX && g[v as usize] != img {
                            ok = false;
                            break;
                        }
                        g[v as usize] = img;
                    }
                    if ok {
                        next.push(g);
                    }
                }
            }
            stack = next;
        }
        for g in stack {
            debug_assert!(g.iter().all(|&x| x != u32::MAX));
            out.push(g);
        }
    };

    for k in 0..ell {
        // rotation by k: block i -> block i+k, junction j -> j+k
        let rotated: Vec<OrientedRef> = (0..ell).map(|i| h.seq[(i + k) % ell]).collect();
        if rotated == h.seq {
            let per_block: Vec<Vec<Perm>> = (0..ell)
                .map(|i| {
                    isomorphisms(
                        &subs[i],
                        &subs[(i + k) % ell],
                        &[
                            (junction(i), junction(i + k)),
                            (junction(i + 1), junction(i + k + 1)),
                        ],
                    )
                })
                .collect::<Result<_>>()?;
            push_spliced(&per_block, &|i| (i + k) % ell);
        }
        // reflection with offset k: block i -> block (ℓ-1-i-k), flipped;
        // junction j -> (ℓ-j-k)
        let rev = reverse_flip(blocks, &h.seq);
        let reflected: Vec<OrientedRef> = (0..ell).map(|i| rev[(i + k) % ell]).collect();
        if reflected == h.seq {
            let per_block: Vec<Vec<Perm>> = (0..ell)
                .map(|i| {
                    let img = (2 * ell - 1 - i - k) % ell;
                    isomorphisms(
                        &subs[i],
                        &subs[img],
                        &[
                            (junction(i), junction(2 * ell - i - k)),
                            (junction(i + 1), junction(img)),
                        ],
                    )
                })
                .collect::<Result<_>>()?;
            push_spliced(&per_block, &|i| (2 * ell - 1 - i - k) % ell);
        }
    }
    Ok(out)
}

// ----------------------------------------------------------------------
// Chains.
// ----------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ChainClass {
    pub seq: Vec<OrientedRef>,
    /// Assembled representative: junctions at ids 0..=ℓ; endpoints 0 and ℓ.
    pub representative: Hypergraph,
    pub junctions: Vec<u32>,
    pub embeddings: Vec<BlockEmbedding>,
    /// |Aut(J)| = ∏ both-leaf stabilizers.
    pub aut_size: u64,
}

#[derive(Clone, Debug)]
pub struct ChainFamily {
    pub blocks: BlockFamily,
    pub ell: u32,
    pub classes: Vec<ChainClass>,
    /// β_J = Σ 1/|Aut(J)|.
    pub beta: Rational,
}

impl ChainFamily {
    pub fn n_vertices(&self) -> u32 {
        self.blocks.m * self.blocks.p * self.ell + 1
    }
}

/// Chains of any length ℓ ≥ 1 are enumerable; the statistics' guarantees
/// target long chains, so ℓ ∈ {1,2} is legal but outside the analyzed
/// regime.
pub fn build_chains(blocks: &BlockFamily, ell: u32) -> Result<ChainFamily> {
    if ell < 1 {
        return Err(Error::Param("chains need ell >= 1".into()));
    }
    let refs = all_refs(blocks);
    let mut classes = Vec::new();
    if !refs.is_empty() {
        let mut reps: std::collections::BTreeSet<Vec<OrientedRef>> =
            std::collections::BTreeSet::new();
        for seq in sequences(&refs, ell as usize)? {
            let rev = reverse_flip(blocks, &seq);
            if rev == seq {
                // the whole-chain reflection is an endpoint-swapping
                // automorphism, which the chain family excludes
                continue;
            }
            reps.insert(seq.min(rev));
        }
        for seq in reps {
            let (h, junctions, embeddings) = assemble(blocks, &seq, false)?;
            let aut_size: u64 = seq
                .iter()
                .map(|r| blocks.classes[r.class as usize].both_leaf_stabilizer)
                .product();
            classes.push(ChainClass {
                seq,
                representative: h,
                junctions,
                embeddings,
                aut_size,
            });
        }
    }
    if !classes.is_empty() && classes[0].representative.n_vertices() <= 64 {
        let mut keys = std::collections::BTreeSet::new();
        for c in &classes {
            if !keys.insert(canonical_key(&c.representative)?) {
                return Err(Error::Family(
                    "chain dedup failure: two sequences canonicalized equal".into(),
                ));
            }
        }
    }
    let beta = classes.iter().map(|c| recip(c.aut_size)).sum();
    Ok(ChainFamily {
        blocks: blocks.clone(),
        ell,
        classes,
        beta,
    })
}

// ----------------------------------------------------------------------
// Manifest (JSON) format.
// ----------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ManifestClass {
    pub key: String,
    pub aut_size: u64,
    /// 1/aut_size as "num/den".
    pub beta_contribution: String,
    /// Text hypergraph format.
    pub representative: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<OrientedRef>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FamilyManifest {
    pub kind: String,
    pub m: u32,
    pub p: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<u32>,
    pub beta: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_diamond: Option<String>,
    pub classes: Vec<ManifestClass>,
}

fn ratio_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_ratio(s: &str) -> Result<Rational> {
    let (n, d) = s
        .split_once('/')
        .ok_or_else(|| Error::Format(format!("bad rational {s}")))?;
    let n: BigInt = n
        .parse()
        .map_err(|_| Error::Format(format!("bad numerator {n}")))?;
    let d: BigInt = d
        .parse()
        .map_err(|_| Error::Format(format!("bad denominator {d}")))?;
    if d.is_zero() {
        return Err(Error::Format("zero denominator".into()));
    }
    Ok(Rational::new(n, d))
}

impl BlockFamily {
    pub fn manifest(&self) -> FamilyManifest {
        FamilyManifest {
            kind: "block".into(),
            m: self.m,
            p: self.p,
            ell: None,
            beta: ratio_string(&self.beta_u),
            beta_diamond: Some(ratio_string(&self.beta_diamond)),
            classes: self
                .classes
                .iter()
                .map(|c| ManifestClass {
                    key: hex(&c.key),
                    aut_size: c.aut_size,
                    beta_contribution: ratio_string(&recip(c.aut_size)),
                    representative: c.representative.to_text(self.p as usize),
                    sequence: None,
                })
                .collect(),
        }
    }
}

impl NecklaceFamily {
    pub fn manifest(&self) -> FamilyManifest {
        FamilyManifest {
            kind: "necklace".into(),
            m: self.blocks.m,
            p: self.blocks.p,
            ell: Some(self.ell),
            beta: ratio_string(&self.beta),
            beta_diamond: None,
            classes: self
                .classes
                .iter()
                .map(|c| ManifestClass {
                    key: hex(&canonical_key_or_empty(&c.representative)),
                    aut_size: c.aut_size,
                    beta_contribution: ratio_string(&recip(c.aut_size)),
                    representative: c.representative.to_text(self.blocks.p as usize),
                    sequence: Some(c.seq.clone()),
                })
                .collect(),
        }
    }
}

impl ChainFamily {
    pub fn manifest(&self) -> FamilyManifest {
        FamilyManifest {
            kind: "chain".into(),
            m: self.blocks.m,
            p: self.blocks.p,
            ell: Some(self.ell),
            beta: ratio_string(&self.beta),
            beta_diamond: None,
            classes: self
                .classes
                .iter()
                .map(|c| ManifestClass {
                    key: hex(&canonical_key_or_empty(&c.representative)),
                    aut_size: c.aut_size,
                    beta_contribution: ratio_string(&recip(c.aut_size)),
                    representative: c.representative.to_text(self.blocks.p as usize),
                    sequence: Some(c.seq.clone()),
                })
                .collect(),
        }
    }
}

fn canonical_key_or_empty(h: &Hypergraph) -> Vec<u8> {
    canonical_class(h).map(|c| c.key).unwrap_or_default()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unique_block_at_m1_p3() {
        let fam = enumerate_blocks(1, 3).unwrap();
        assert_eq!(fam.classes.len(), 1);
        let c = &fam.classes[0];
        assert_eq!(c.aut_size, 4);
        assert!(c.reversible);
        assert_eq!(c.leaf_orbit_count, 1);
        assert_eq!(c.leaf_stabilizers, vec![2]);
        assert_eq!(c.both_leaf_stabilizer, 2);
        assert_eq!(fam.beta_u, Rational::new(BigInt::from(1), BigInt::from(4)));
        assert_eq!(
            fam.beta_diamond,
            Rational::new(BigInt::from(1), BigInt::from(2))
        );
    }

    #[test]
    fn empty_family_at_m1_p2() {
        let fam = enumerate_blocks(1, 2).unwrap();
        assert!(fam.classes.is_empty());
        assert!(fam.beta_u.is_zero());
    }

    #[test]
    fn triangle_necklace() {
        let blocks = enumerate_blocks(1, 3).unwrap();
        let neck = build_necklaces(&blocks, 3).unwrap();
        assert_eq!(neck.classes.len(), 1);
        let h = &neck.classes[0];
        assert_eq!(h.representative.n_vertices(), 9);
        assert_eq!(h.representative.n_edges(), 6);
        assert!(h
            .representative
            .vertices()
            .iter()
            .all(|&v| { h.representative.degree(v).unwrap() == 2 }));
        assert_eq!(h.a_plus, 3);
        assert_eq!(h.a_minus, 3);
        assert_eq!(h.aut_size, 48);
        assert_eq!(neck.beta, Rational::new(BigInt::from(1), BigInt::from(48)));
    }

    #[test]
    fn necklace_ell_guard() {
        let blocks = enumerate_blocks(1, 3).unwrap();
        assert!(build_necklaces(&blocks, 2).is_err());
    }

    #[test]
    fn alg7_matches_listing_on_triangle() {
        let blocks = enumerate_blocks(1, 3).unwrap();
        let neck = build_necklaces(&blocks, 3).unwrap();
        let auts = aut_necklace_alg7(&blocks, &neck.classes[0]).unwrap();
        assert_eq!(auts.len() as u64, neck.classes[0].aut_size);
        // closure under composition
        let perms: std::collections::BTreeSet<Perm> = auts.iter().cloned().collect();
        assert_eq!(perms.len(), auts.len());
        for a in &auts {
            for b in &auts {
                let comp: Perm = (0..a.len()).map(|i| b[a[i] as usize] as u32).collect();
                assert!(perms.contains(&comp));
            }
        }
        // each is a genuine automorphism of the representative
        let rep = &neck.classes[0].representative;
        for a in &auts {
            assert_eq!(&rep.relabel(a), rep);
        }
    }

    #[test]
    fn reversible_chains_are_excluded() {
        let blocks = enumerate_blocks(1, 3).unwrap();
        for ell in 1..=3 {
            let fam = build_chains(&blocks, ell).unwrap();
            assert!(fam.classes.is_empty(), "ell={ell}");
            assert!(fam.beta.is_zero());
        }
    }

    #[test]
    fn manifest_roundtrip_json() {
        let blocks = enumerate_blocks(1, 3).unwrap();
        let m = blocks.manifest();
        let json = serde_json::to_string_pretty(&m).unwrap();
        let back: FamilyManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert_eq!(parse_ratio(&back.beta).unwrap(), blocks.beta_u);
    }
}
