//! Counting statistics: exact detection/recovery sums by symmetry-reduced
//! embedding enumeration, and their color-coding approximations by the
//! block-splice dynamic program.
//!
//! The DP works for any color count K: colorings with K = mpℓ (detection) or
//! K = mpℓ+1 (recovery) give the colorful counts g_H and h_J, while the
//! identity coloring with K = n makes "colorful" mean "distinct vertices",
//! recovering the exact sums (used as a cross-route check in tests; the
//! shipped exact path enumerates embeddings instead and shares no code with
//! the DP).

use crate::combinatorics::masks_with_popcount;
use crate::error::{Error, Result};
use crate::family::{
    BlockFamily, ChainClass, ChainFamily, NecklaceClass, NecklaceFamily, Rational,
};
use crate::hypergraph::{automorphisms_fixing, Hypergraph};
use crate::rng;
use crate::tensor::SymmetricTensor;
use num_traits::ToPrimitive;
use rayon::prelude::*;

const STREAM_COLOR: u64 = 0x636f_6c6f;
const STREAM_REP: u64 = 0x7265_7065;

/// Estimated-operation ceiling for the exact (embedding) statistics.
const EXACT_OPS_CAP: f64 = 1e10;
/// Entry ceiling for one DP table.
const DP_ENTRY_CAP: u64 = 50_000_000;

pub fn ratio_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

// ----------------------------------------------------------------------
// Colorings.
// ----------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Coloring {
    pub k: u32,
    pub colors: Vec<u8>,
}

impl Coloring {
    pub fn n(&self) -> usize {
        self.colors.len()
    }

    /// Per-color vertex lists.
    pub fn classes(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.k as usize];
        for (v, &c) in self.colors.iter().enumerate() {
            out[c as usize].push(v as u32);
        }
        out
    }
}

/// I.i.d. uniform coloring of [n] with K colors.
pub fn sample_coloring(n: u32, k: u32, seed: u64) -> Coloring {
    assert!(k >= 1 && k <= 31);
    let colors = (0..n)
        .map(|v| rng::uniform_u32(rng::key(seed, STREAM_COLOR, v as u64), k) as u8)
        .collect();
    Coloring { k, colors }
}

/// Coloring where every vertex has its own color; colorful = injective.
pub fn identity_coloring(n: u32) -> Coloring {
    assert!(n <= 31);
    Coloring {
        k: n,
        colors: (0..n as u8).collect(),
    }
}

pub fn is_colorful(vs: &[u32], c: &Coloring) -> bool {
    let mut mask = 0u32;
    for &v in vs {
        let bit = 1u32 << c.colors[v as usize];
        if mask & bit != 0 {
            return false;
        }
        mask |= bit;
    }
    true
}

// ----------------------------------------------------------------------
// Color-coding plans.
// ----------------------------------------------------------------------

/// Repetition schedule for one color-coding estimate.
#[derive(Clone, Copy, Debug)]
pub struct ColorCodingPlan {
    pub k: u32,
    /// Probability that a set of k vertices is colorful: k!/k^k.
    pub rate: f64,
    /// Number of independent colorings, ⌈1/rate⌉ unless overridden.
    pub t: u32,
    pub seed: u64,
}

fn colorful_rate(k: u32) -> f64 {
    (1..=k).map(|i| i as f64 / k as f64).product()
}

/// A hypergraph on v vertices has no colorful copy unless the coloring
/// realizes at least v distinct colors.
fn distinct_colors(c: &Coloring) -> u32 {
    let mut mask = 0u32;
    for &x in &c.colors {
        mask |= 1 << x;
    }
    mask.count_ones()
}

impl ColorCodingPlan {
    /// K = mpℓ colors for the detection statistic.
    pub fn detection(fam: &NecklaceFamily, seed: u64) -> Result<Self> {
        let k = fam.n_vertices();
        Self::for_colors(k, seed)
    }

    /// K = mpℓ+1 colors for the recovery scores.
    pub fn recovery(fam: &ChainFamily, seed: u64) -> Result<Self> {
        let k = fam.n_vertices();
        Self::for_colors(k, seed)
    }

    pub fn for_colors(k: u32, seed: u64) -> Result<Self> {
        if k == 0 || k > 31 {
            return Err(Error::Param(format!("color count {k} out of range 1..=31")));
        }
        let rate = colorful_rate(k);
        let t = (1.0 / rate).ceil() as u32;
        Ok(ColorCodingPlan { k, rate, t, seed })
    }

    /// Overrides the repetition count. Fewer repetitions than ⌈1/rate⌉
    /// inflate the estimator variance by the same factor.
    pub fn with_t(mut self, t: u32) -> Result<Self> {
        if t == 0 {
            return Err(Error::Param("repetition count must be positive".into()));
        }
        self.t = t;
        Ok(self)
    }

    pub fn rep_coloring(&self, n: u32, rep: u32) -> Coloring {
        sample_coloring(n, self.k, rng::key(self.seed, STREAM_REP, rep as u64))
    }
}

// ----------------------------------------------------------------------
// Embedding enumeration (exact path and Λ tables).
// ----------------------------------------------------------------------

/// Precomputed walk over the vertices of a representative hypergraph.
/// Slots are assigned in order; the first `pinned` slots are set by the
/// caller. Each slot lists the edges completed by it; each check span makes
/// the assignment canonical under a permutation group acting on its slots.
struct EmbedPlan {
    slot_vertex: Vec<u32>,
    pinned: usize,
    /// closing[s] = edges, each as the list of slot indices of its vertices.
    closing: Vec<Vec<Vec<u32>>>,
    /// (end_slot, perms) where each perm maps span-local offsets; the span
    /// covers slots [end - perm.len(), end).
    checks: Vec<(usize, Vec<Vec<u32>>)>,
    /// checks indexed by end slot.
    checks_at: Vec<Vec<u32>>,
}

impl EmbedPlan {
    fn new(rep: &Hypergraph, slot_vertex: Vec<u32>, pinned: usize) -> Self {
        let n_slots = slot_vertex.len();
        debug_assert_eq!(n_slots, rep.n_vertices());
        let slot_of = |v: u32| slot_vertex.iter().position(|&u| u == v).unwrap() as u32;
        let mut closing: Vec<Vec<Vec<u32>>> = vec![Vec::new(); n_slots];
        for e in rep.edges() {
            let slots: Vec<u32> = e.iter().map(|&v| slot_of(v)).collect();
            let last = *slots.iter().max().unwrap() as usize;
            closing[last].push(slots);
        }
        EmbedPlan {
            slot_vertex,
            pinned,
            closing,
            checks: Vec::new(),
            checks_at: vec![Vec::new(); n_slots + 1],
        }
    }

    /// Canonical-selection span ending at `end`, given permutations of the
    /// vertices occupying its slots. Identity permutations are dropped.
    fn add_check(&mut self, end: usize, vertex_perms: &[Vec<u32>], span_len: usize) {
        let start = end - span_len;
        let local: Vec<Vec<u32>> = vertex_perms
            .iter()
            .map(|perm| {
                (start..end)
                    .map(|s| {
                        let v = self.slot_vertex[s];
                        let img = perm[v as usize];
                        let s2 = self.slot_vertex.iter().position(|&u| u == img).unwrap();
                        debug_assert!((start..end).contains(&s2));
                        (s2 - start) as u32
                    })
                    .collect()
            })
            .filter(|p: &Vec<u32>| p.iter().enumerate().any(|(i, &x)| x != i as u32))
            .collect();
        if !local.is_empty() {
            self.checks_at[end].push(self.checks.len() as u32);
            self.checks.push((end, local));
        }
    }
}

/// Runs the walk, multiplying closed-edge tensor values along the way.
/// `coloring` adds the all-distinct-colors constraint and tracks the color
/// mask handed to the sink.
struct EmbedRun<'a> {
    plan: &'a EmbedPlan,
    tensor: &'a SymmetricTensor,
    coloring: Option<&'a Coloring>,
    /// per-color vertex lists when a coloring is present
    by_color: Vec<Vec<u32>>,
    /// rank_rows[i][v] = C(v, i+1) for branch-free subset ranking
    rank_rows: Vec<Vec<u32>>,
    images: Vec<u32>,
    used: Vec<bool>,
    color_mask: u32,
}

impl<'a> EmbedRun<'a> {
    fn new(
        plan: &'a EmbedPlan,
        tensor: &'a SymmetricTensor,
        coloring: Option<&'a Coloring>,
    ) -> Self {
        EmbedRun {
            plan,
            tensor,
            coloring,
            by_color: coloring.map(|c| c.classes()).unwrap_or_default(),
            rank_rows: tensor.rank_rows(),
            images: vec![u32::MAX; plan.slot_vertex.len()],
            used: vec![false; tensor.n as usize],
            color_mask: 0,
        }
    }

    /// Pins the leading slots to the given vertices; false when the pins
    /// collide (vertex or color).
    fn pin(&mut self, images: &[u32]) -> bool {
        debug_assert_eq!(images.len(), self.plan.pinned);
        self.color_mask = 0;
        for u in &mut self.used {
            *u = false;
        }
        for (s, &v) in images.iter().enumerate() {
            if self.used[v as usize] {
                return false;
            }
            if let Some(c) = self.coloring {
                let bit = 1u32 << c.colors[v as usize];
                if self.color_mask & bit != 0 {
                    return false;
                }
                self.color_mask |= bit;
            }
            self.used[v as usize] = true;
            self.images[s] = v;
        }
        true
    }

    fn closed_product(&mut self, slot: usize) -> f64 {
        let mut prod = 1.0;
        for edge_slots in &self.plan.closing[slot] {
            let mut buf = [0u32; 8];
            let len = edge_slots.len();
            for (i, &s) in edge_slots.iter().enumerate() {
                // insertion into the sorted prefix
                let v = self.images[s as usize];
                let mut j = i;
                while j > 0 && buf[j - 1] > v {
                    buf[j] = buf[j - 1];
                    j -= 1;
                }
                buf[j] = v;
            }
            let mut rank = 0usize;
            for (i, &v) in buf[..len].iter().enumerate() {
                rank += self.rank_rows[i][v as usize] as usize;
            }
            prod *= self.tensor.values()[rank];
        }
        prod
    }

    #[inline]
    fn canonical_at(&self, slot_end: usize) -> bool {
        for &ci in &self.plan.checks_at[slot_end] {
            let (end, perms) = &self.plan.checks[ci as usize];
            let start = end - perms[0].len();
            let span = &self.images[start..*end];
            for perm in perms {
                for i in 0..span.len() {
                    let a = span[i];
                    let b = span[perm[i] as usize];
                    if a < b {
                        break;
                    }
                    if a > b {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn run(&mut self, sink: &mut impl FnMut(&[u32], f64, u32)) {
        // pinned slots may close edges among themselves
        let mut prod = 1.0;
        for s in 0..self.plan.pinned {
            prod *= self.closed_product(s);
        }
        if !self.canonical_at(self.plan.pinned) {
            return;
        }
        self.descend(self.plan.pinned, prod, sink);
    }

    #[inline]
    fn enter(
        &mut self,
        slot: usize,
        v: u32,
        bit: u32,
        prod: f64,
        sink: &mut impl FnMut(&[u32], f64, u32),
    ) {
        self.images[slot] = v;
        self.used[v as usize] = true;
        self.color_mask |= bit;
        if self.canonical_at(slot + 1) {
            let p = prod * self.closed_product(slot);
            self.descend(slot + 1, p, sink);
        }
        self.used[v as usize] = false;
        self.color_mask &= !bit;
    }

    fn descend(&mut self, slot: usize, prod: f64, sink: &mut impl FnMut(&[u32], f64, u32)) {
        if slot == self.plan.slot_vertex.len() {
            sink(&self.images, prod, self.color_mask);
            return;
        }
        if self.coloring.is_some() {
            // iterate unused colors, then their unused vertices
            let k = self.by_color.len();
            for c in 0..k {
                let bit = 1u32 << c;
                if self.color_mask & bit != 0 {
                    continue;
                }
                for vi in 0..self.by_color[c].len() {
                    let v = self.by_color[c][vi];
                    if self.used[v as usize] {
                        continue;
                    }
                    self.enter(slot, v, bit, prod, sink);
                }
            }
        } else {
            let n = self.used.len() as u32;
            for v in 0..n {
                if self.used[v as usize] {
                    continue;
                }
                self.enter(slot, v, 0, prod, sink);
            }
        }
        self.images[slot] = u32::MAX;
    }
}

/// Interior vertices of a block class representative, ascending.
fn block_interiors(blocks: &BlockFamily, class: usize) -> Vec<u32> {
    let c = &blocks.classes[class];
    (0..blocks.block_vertices())
        .filter(|&v| v != c.leaf_in && v != c.leaf_out)
        .collect()
}

/// Non-identity automorphisms of the block fixing both leaves, for
/// canonical interior selection.
fn block_stab_perms(blocks: &BlockFamily, class: usize) -> Result<Vec<Vec<u32>>> {
    let c = &blocks.classes[class];
    Ok(automorphisms_fixing(
        &c.representative,
        &[c.leaf_in, c.leaf_out],
    )?)
}

// ----------------------------------------------------------------------
// Λ base tables.
// ----------------------------------------------------------------------

/// Index over the fixed-popcount color masks of one DP level.
#[derive(Clone)]
struct MaskIndex {
    masks: Vec<u32>,
    lookup: Vec<u32>,
}

impl MaskIndex {
    fn new(k: u32, count: u32) -> Self {
        let masks = masks_with_popcount(k, count);
        let mut lookup = vec![u32::MAX; 1usize << k];
        for (i, &m) in masks.iter().enumerate() {
            lookup[m as usize] = i as u32;
        }
        MaskIndex { masks, lookup }
    }

    #[inline]
    fn idx(&self, mask: u32) -> usize {
        let i = self.lookup[mask as usize];
        debug_assert!(i != u32::MAX);
        i as usize
    }
}

/// Oriented block sums Λ(x,y;C): total edge weight of copies of the block
/// with its designated first leaf at x, second leaf at y, and colorful
/// vertex set with color set C (|C| = mp+1). Each unlabeled copy counts
/// once. Values are stored tail-major: `vals[(mask, y, x)]`.
pub struct LambdaTable {
    pub k: u32,
    pub subset_size: u32,
    n: usize,
    index: MaskIndex,
    vals: Vec<f64>,
}

impl LambdaTable {
    #[inline]
    pub fn get(&self, mask: u32, x: u32, y: u32) -> f64 {
        self.vals[(self.index.idx(mask) * self.n + y as usize) * self.n + x as usize]
    }

    pub fn masks(&self) -> &[u32] {
        &self.index.masks
    }

    /// Transposed copy: the table of the flipped orientation.
    fn transposed(&self) -> LambdaTable {
        let n = self.n;
        let mut vals = vec![0.0; self.vals.len()];
        for mi in 0..self.index.masks.len() {
            let base = mi * n * n;
            for y in 0..n {
                for x in 0..n {
                    vals[base + x * n + y] = self.vals[base + y * n + x];
                }
            }
        }
        LambdaTable {
            k: self.k,
            subset_size: self.subset_size,
            n,
            index: self.index.clone(),
            vals,
        }
    }
}

/// Builds the oriented Λ table of one block class under one coloring.
pub fn block_table(
    tensor: &SymmetricTensor,
    coloring: &Coloring,
    blocks: &BlockFamily,
    class: usize,
) -> Result<LambdaTable> {
    let n = tensor.n as usize;
    let k = coloring.k;
    let subset_size = blocks.block_vertices();
    if subset_size > k {
        return Err(Error::Param(format!(
            "block needs {subset_size} colors but coloring has {k}"
        )));
    }
    let index = MaskIndex::new(k, subset_size);
    let entries = index.masks.len() as u64 * (n * n) as u64;
    if entries > DP_ENTRY_CAP {
        return Err(Error::Capacity(format!(
            "Λ table would hold {entries} entries"
        )));
    }
    let mut vals = vec![0.0; entries as usize];

    // interiors first so their enumeration is shared across all leaf pairs;
    // the two leaves occupy the last two slots
    let c = &blocks.classes[class];
    let mut slots = block_interiors(blocks, class);
    let span = slots.len();
    slots.push(c.leaf_in);
    slots.push(c.leaf_out);
    let mut plan = EmbedPlan::new(&c.representative, slots, 0);
    let stab = block_stab_perms(blocks, class)?;
    plan.add_check(span, &stab, span);

    let mut run = EmbedRun::new(&plan, tensor, Some(coloring));
    run.pin(&[]);
    let mut sink = |images: &[u32], prod: f64, mask: u32| {
        let x = images[span] as usize;
        let y = images[span + 1] as usize;
        vals[(index.idx(mask) * n + y) * n + x] += prod;
    };
    run.run(&mut sink);
    Ok(LambdaTable {
        k,
        subset_size,
        n,
        index,
        vals,
    })
}

// ----------------------------------------------------------------------
// The splice DP.
// ----------------------------------------------------------------------

/// One suffix level: S(C; x, y) over masks of a fixed popcount, stored
/// head-major: `vals[(mask, x, y)]` with x the open junction and y the tail.
struct DpLevel {
    n: usize,
    index: MaskIndex,
    vals: Vec<f64>,
}

impl DpLevel {
    #[inline]
    fn get(&self, mi: usize, x: u32, y: u32) -> f64 {
        self.vals[(mi * self.n + x as usize) * self.n + y as usize]
    }
}

/// Tables for every (class, flip) orientation a family's sequences use.
struct TableSet {
    fwd: Vec<Option<LambdaTable>>,
    bwd: Vec<Option<LambdaTable>>,
}

impl TableSet {
    fn build(
        tensor: &SymmetricTensor,
        coloring: &Coloring,
        blocks: &BlockFamily,
        seqs: &[&[crate::family::OrientedRef]],
    ) -> Result<TableSet> {
        let nc = blocks.classes.len();
        let mut need_f = vec![false; nc];
        let mut need_b = vec![false; nc];
        for seq in seqs {
            for r in *seq {
                if r.flipped {
                    need_b[r.class as usize] = true;
                } else {
                    need_f[r.class as usize] = true;
                }
            }
        }
        let mut fwd: Vec<Option<LambdaTable>> = Vec::with_capacity(nc);
        let mut bwd: Vec<Option<LambdaTable>> = Vec::with_capacity(nc);
        for class in 0..nc {
            let base = if need_f[class] || need_b[class] {
                Some(block_table(tensor, coloring, blocks, class)?)
            } else {
                None
            };
            bwd.push(if need_b[class] {
                Some(base.as_ref().unwrap().transposed())
            } else {
                None
            });
            fwd.push(if need_f[class] { base } else { None });
        }
        Ok(TableSet { fwd, bwd })
    }

    fn table(&self, r: crate::family::OrientedRef) -> &LambdaTable {
        if r.flipped {
            self.bwd[r.class as usize].as_ref().unwrap()
        } else {
            self.fwd[r.class as usize].as_ref().unwrap()
        }
    }
}

/// Seeds the suffix DP with the last block's Λ table, copied head-major.
fn base_level(table: &LambdaTable) -> DpLevel {
    let n = table.n;
    let nm = table.index.masks.len();
    let mut vals = vec![0.0; nm * n * n];
    for mi in 0..nm {
        for y in 0..n {
            for x in 0..n {
                // Λ is tail-major: vals[(mask, y, x)] = Λ(x, y)
                vals[(mi * n + x) * n + y] = table.vals[(mi * n + y) * n + x];
            }
        }
    }
    DpLevel {
        n,
        index: table.index.clone(),
        vals,
    }
}

/// One splice step: S'(C1 ∪ C2; x, y) += Λ(C1; x, z)·S(C2; z, y) over all
/// mask pairs sharing exactly the junction color τ(z).
fn contract(
    table: &LambdaTable,
    suffix: &DpLevel,
    by_color: &[Vec<u32>],
    k: u32,
) -> Result<DpLevel> {
    let n = suffix.n;
    let out_size = table.subset_size + (suffix.index.masks[0].count_ones()) - 1;
    let index = MaskIndex::new(k, out_size);
    let entries = index.masks.len() as u64 * (n * n) as u64;
    if entries > DP_ENTRY_CAP {
        return Err(Error::Capacity(format!(
            "DP level would hold {entries} entries"
        )));
    }
    let mut vals = vec![0.0; entries as usize];
    for (mi1, &m1) in table.index.masks.iter().enumerate() {
        for (mi2, &m2) in suffix.index.masks.iter().enumerate() {
            let shared = m1 & m2;
            if shared.count_ones() != 1 {
                continue;
            }
            let c = shared.trailing_zeros() as usize;
            let oi = index.idx(m1 | m2);
            let lam_base = mi1 * n * n;
            let suf_base = mi2 * n * n;
            let out_base = oi * n * n;
            for &z in &by_color[c] {
                let lam_row =
                    &table.vals[lam_base + (z as usize) * n..lam_base + (z as usize + 1) * n];
                let suf_row =
                    &suffix.vals[suf_base + (z as usize) * n..suf_base + (z as usize + 1) * n];
                // heads x live in the block's colors other than the junction
                let mut heads = m1 & !shared;
                while heads != 0 {
                    let cx = heads.trailing_zeros() as usize;
                    heads &= heads - 1;
                    for &x in &by_color[cx] {
                        let a = lam_row[x as usize];
                        if a == 0.0 {
                            continue;
                        }
                        let out_row =
                            &mut vals[out_base + x as usize * n..out_base + (x as usize + 1) * n];
                        for y in 0..n {
                            out_row[y] += a * suf_row[y];
                        }
                    }
                }
            }
        }
    }
    Ok(DpLevel { n, index, vals })
}

/// Suffix DP over blocks `from..ℓ` of a sequence.
fn suffix_levels(
    seq: &[crate::family::OrientedRef],
    from: usize,
    tables: &TableSet,
    by_color: &[Vec<u32>],
    k: u32,
) -> Result<DpLevel> {
    let ell = seq.len();
    let mut level = base_level(tables.table(seq[ell - 1]));
    for j in (from..ell - 1).rev() {
        level = contract(tables.table(seq[j]), &level, by_color, k)?;
    }
    Ok(level)
}

/// Colorful signed count g_H(Y,τ) of one necklace class under one coloring,
/// computed by the splice DP (suffix recursion, cycle closure, division by
/// the symmetry factor 𝔞).
pub fn g_necklace_dp(
    tensor: &SymmetricTensor,
    coloring: &Coloring,
    blocks: &BlockFamily,
    h: &NecklaceClass,
) -> Result<f64> {
    let tables = TableSet::build(tensor, coloring, blocks, &[&h.seq])?;
    g_necklace_with_tables(coloring, blocks, h, &tables)
}

fn g_necklace_with_tables(
    coloring: &Coloring,
    blocks: &BlockFamily,
    h: &NecklaceClass,
    tables: &TableSet,
) -> Result<f64> {
    let needed = blocks.m * blocks.p * h.seq.len() as u32;
    if coloring.k < needed {
        return Err(Error::Param(format!(
            "necklace needs {needed} colors, coloring has {}",
            coloring.k
        )));
    }
    let by_color = coloring.classes();
    let suffix = suffix_levels(&h.seq, 1, tables, &by_color, coloring.k)?;
    let first = tables.table(h.seq[0]);
    let n = suffix.n;
    let mut total = 0.0;
    for (mi1, &m1) in first.index.masks.iter().enumerate() {
        for (mi2, &m2) in suffix.index.masks.iter().enumerate() {
            let shared = m1 & m2;
            if shared.count_ones() != 2 {
                continue;
            }
            let ca = shared.trailing_zeros() as usize;
            let cb = (31 - shared.leading_zeros()) as usize;
            let lam_base = mi1 * n * n;
            let suf = |x: u32, y: u32| suffix.get(mi2, x, y);
            for (c_x, c_y) in [(ca, cb), (cb, ca)] {
                for &x in &by_color[c_x] {
                    for &y in &by_color[c_y] {
                        // Λ tail-major: Λ(x, y) at [mask, y, x]
                        let a = first.vals[lam_base + (y as usize) * n + x as usize];
                        if a != 0.0 {
                            total += a * suf(y, x);
                        }
                    }
                }
            }
        }
    }
    Ok(total / h.symmetry_factor() as f64)
}

/// Colorful signed count h_J(Y,ξ) over copies of one chain class with leaf
/// set {i, j}: the oriented DP is run with the endpoints pinned both ways.
pub fn h_chain_dp(
    tensor: &SymmetricTensor,
    coloring: &Coloring,
    blocks: &BlockFamily,
    chain: &ChainClass,
    i: u32,
    j: u32,
) -> Result<f64> {
    if i == j {
        return Err(Error::Param("chain endpoints must differ".into()));
    }
    let grid = h_chain_dp_all_pairs(tensor, coloring, blocks, chain)?;
    let n = tensor.n as usize;
    Ok(grid[i as usize * n + j as usize] + grid[j as usize * n + i as usize])
}

/// Oriented chain sums for all ordered endpoint pairs: entry (x, y) is the
/// colorful signed count of copies with the first chain endpoint at x and
/// the last at y.
pub fn h_chain_dp_all_pairs(
    tensor: &SymmetricTensor,
    coloring: &Coloring,
    blocks: &BlockFamily,
    chain: &ChainClass,
) -> Result<Vec<f64>> {
    let tables = TableSet::build(tensor, coloring, blocks, &[&chain.seq])?;
    h_chain_with_tables(coloring, blocks, chain, &tables)
}

fn h_chain_with_tables(
    coloring: &Coloring,
    blocks: &BlockFamily,
    chain: &ChainClass,
    tables: &TableSet,
) -> Result<Vec<f64>> {
    let needed = blocks.m * blocks.p * chain.seq.len() as u32 + 1;
    if coloring.k < needed {
        return Err(Error::Param(format!(
            "chain needs {needed} colors, coloring has {}",
            coloring.k
        )));
    }
    let by_color = coloring.classes();
    let level = suffix_levels(&chain.seq, 0, tables, &by_color, coloring.k)?;
    let n = level.n;
    let mut out = vec![0.0; n * n];
    for mi in 0..level.index.masks.len() {
        for x in 0..n {
            for y in 0..n {
                out[x * n + y] += level.get(mi, x as u32, y as u32);
            }
        }
    }
    Ok(out)
}

// ----------------------------------------------------------------------
// Exact statistics by symmetry-reduced embedding enumeration.
// ----------------------------------------------------------------------

/// Embedding count n·(n−1)···(n−k+1) as the work estimate for exact mode.
fn exact_ops_estimate(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|i| (n - i) as f64).product()
}

/// Permutations of {0..ℓ-1} realized by the necklace's rotation/reflection
/// symmetries, identity excluded; used to pick one junction tuple per copy.
fn junction_symmetry_maps(blocks: &BlockFamily, h: &NecklaceClass) -> Vec<Vec<u32>> {
    let ell = h.seq.len();
    let rev: Vec<_> = h
        .seq
        .iter()
        .rev()
        .map(|&r| {
            if blocks.classes[r.class as usize].reversible {
                r
            } else {
                crate::family::OrientedRef {
                    class: r.class,
                    flipped: !r.flipped,
                }
            }
        })
        .collect();
    let mut maps: Vec<Vec<u32>> = Vec::new();
    for k in 0..ell {
        let rotated: Vec<_> = (0..ell).map(|i| h.seq[(i + k) % ell]).collect();
        if rotated == h.seq && k != 0 {
            maps.push((0..ell).map(|i| ((i + k) % ell) as u32).collect());
        }
        let reflected: Vec<_> = (0..ell).map(|i| rev[(i + k) % ell]).collect();
        if reflected == h.seq {
            maps.push((0..ell).map(|i| ((2 * ell - i - k) % ell) as u32).collect());
        }
    }
    maps
}

/// Walk plan for one assembled class: junction slots first (pinned ones at
/// the very front), then each block's interiors.
fn assembled_plan(
    blocks: &BlockFamily,
    rep: &Hypergraph,
    seq: &[crate::family::OrientedRef],
    embeddings: &[crate::family::BlockEmbedding],
    junctions: &[u32],
    pinned: &[u32],
    junction_maps: &[Vec<u32>],
) -> Result<EmbedPlan> {
    let mut slots: Vec<u32> = pinned.to_vec();
    slots.extend(junctions.iter().copied().filter(|j| !pinned.contains(j)));
    let n_junctions = slots.len();
    let mut spans: Vec<(usize, usize, usize)> = Vec::new(); // (class, emb index, end)
    for (i, emb) in embeddings.iter().enumerate() {
        let class = seq[i].class as usize;
        for v in block_interiors(blocks, class) {
            slots.push(emb.vertex_map[v as usize]);
        }
        spans.push((class, i, slots.len()));
    }
    let mut plan = EmbedPlan::new(rep, slots, pinned.len());
    if !junction_maps.is_empty() {
        // lex-min junction tuple over the realized symmetry maps; maps act
        // on junction indices, which occupy the first slots in index order
        let perms: Vec<Vec<u32>> = junction_maps
            .iter()
            .map(|g| {
                // vertex-level permutation on junction ids only
                let mut perm: Vec<u32> = (0..rep.n_vertices() as u32).collect();
                for (i, &gi) in g.iter().enumerate() {
                    perm[junctions[i] as usize] = junctions[gi as usize];
                }
                perm
            })
            .collect();
        plan.add_check(n_junctions, &perms, n_junctions);
    }
    let interiors_per_block = (blocks.block_vertices() - 2) as usize;
    for (class, emb_idx, end) in spans {
        if interiors_per_block == 0 {
            break;
        }
        let stab = block_stab_perms(blocks, class)?;
        // stab perms are on block-rep vertices; translate through the
        // embedding of this block instance
        let emb = &embeddings[emb_idx];
        let translated: Vec<Vec<u32>> = stab
            .iter()
            .map(|perm| {
                let mut out: Vec<u32> = (0..rep.n_vertices() as u32).collect();
                for v in 0..blocks.block_vertices() {
                    out[emb.vertex_map[v as usize] as usize] =
                        emb.vertex_map[perm[v as usize] as usize];
                }
                out
            })
            .collect();
        plan.add_check(end, &translated, interiors_per_block);
    }
    Ok(plan)
}

/// Exact detection statistic f_H(Y): the normalized sum of edge monomials
/// over all labeled copies of every class in the family.
pub fn exact_detection_stat(tensor: &SymmetricTensor, fam: &NecklaceFamily) -> Result<f64> {
    let nv = fam.n_vertices();
    if exact_ops_estimate(tensor.n, nv) > EXACT_OPS_CAP {
        return Err(Error::Capacity(format!(
            "exact detection needs ~{:.2e} embeddings (cap {EXACT_OPS_CAP:.0e})",
            exact_ops_estimate(tensor.n, nv)
        )));
    }
    let mut total = 0.0;
    for h in &fam.classes {
        let maps = junction_symmetry_maps(&fam.blocks, h);
        debug_assert_eq!(maps.len() as u64 + 1, h.symmetry_factor());
        let plan = assembled_plan(
            &fam.blocks,
            &h.representative,
            &h.seq,
            &h.embeddings,
            &h.junctions,
            &[],
            &maps,
        )?;
        let mut run = EmbedRun::new(&plan, tensor, None);
        let mut sum = 0.0;
        run.pin(&[]);
        run.run(&mut |_, prod, _| sum += prod);
        total += sum;
    }
    let norm = ((tensor.n as f64).powi(nv as i32) * ratio_f64(&fam.beta)).sqrt();
    Ok(total / norm)
}

/// Exact recovery score Φ_{i,j}: normalized sum over copies of every chain
/// class with leaf set {i, j}.
pub fn exact_recovery_score(
    tensor: &SymmetricTensor,
    fam: &ChainFamily,
    lambda: f64,
    i: u32,
    j: u32,
) -> Result<f64> {
    if i == j {
        return Err(Error::Param(
            "recovery score needs two distinct vertices".into(),
        ));
    }
    if !(lambda > 0.0) {
        return Err(Error::Param(
            "recovery normalization needs lambda > 0".into(),
        ));
    }
    if fam.classes.is_empty() {
        return Err(Error::Family(format!(
            "chain family (m={}, p={}, ell={}) is empty",
            fam.blocks.m, fam.blocks.p, fam.ell
        )));
    }
    let nv = fam.n_vertices();
    if exact_ops_estimate(tensor.n.saturating_sub(2), nv - 2) > EXACT_OPS_CAP {
        return Err(Error::Capacity(format!(
            "exact recovery needs ~{:.2e} embeddings per pair (cap {EXACT_OPS_CAP:.0e})",
            exact_ops_estimate(tensor.n.saturating_sub(2), nv - 2)
        )));
    }
    let mut total = 0.0;
    for chain in &fam.classes {
        let ends = [chain.junctions[0], *chain.junctions.last().unwrap()];
        for (a, b) in [(i, j), (j, i)] {
            let plan = assembled_plan(
                &fam.blocks,
                &chain.representative,
                &chain.seq,
                &chain.embeddings,
                &chain.junctions,
                &ends,
                &[],
            )?;
            let mut run = EmbedRun::new(&plan, tensor, None);
            if !run.pin(&[a, b]) {
                continue;
            }
            run.run(&mut |_, prod, _| total += prod);
        }
    }
    let m = fam.blocks.m;
    let ell = fam.ell;
    let exponent = (fam.blocks.p * m * ell) as f64 / 2.0 - 1.0;
    let norm =
        lambda.powi(2 * (m * ell) as i32) * (tensor.n as f64).powf(exponent) * ratio_f64(&fam.beta);
    Ok(total / norm)
}

// ----------------------------------------------------------------------
// Color-coding estimators.
// ----------------------------------------------------------------------

/// A color-coding estimate with its schedule.
#[derive(Clone, Copy, Debug)]
pub struct CcEstimate {
    pub statistic: f64,
    pub t: u32,
    pub rate: f64,
}

/// Approximate detection statistic f̃_H: average of g_H over t colorings,
/// scaled by 1/rate and the family normalization.
pub fn f_tilde(
    tensor: &SymmetricTensor,
    fam: &NecklaceFamily,
    plan: &ColorCodingPlan,
) -> Result<CcEstimate> {
    let k_needed = fam.n_vertices();
    if plan.k != k_needed {
        return Err(Error::Param(format!(
            "detection plan needs K = {k_needed}, got {}",
            plan.k
        )));
    }
    let seqs: Vec<&[crate::family::OrientedRef]> =
        fam.classes.iter().map(|c| c.seq.as_slice()).collect();
    let per_rep: Result<Vec<f64>> = (0..plan.t)
        .into_par_iter()
        .map(|rep| {
            let coloring = plan.rep_coloring(tensor.n, rep);
            if distinct_colors(&coloring) < k_needed {
                return Ok(0.0);
            }
            let tables = TableSet::build(tensor, &coloring, &fam.blocks, &seqs)?;
            let mut g_sum = 0.0;
            for h in &fam.classes {
                g_sum += g_necklace_with_tables(&coloring, &fam.blocks, h, &tables)?;
            }
            Ok(g_sum)
        })
        .collect();
    let sum: f64 = per_rep?.iter().sum();
    let norm = ((tensor.n as f64).powi(k_needed as i32) * ratio_f64(&fam.beta)).sqrt();
    Ok(CcEstimate {
        statistic: sum / (plan.t as f64 * plan.rate) / norm,
        t: plan.t,
        rate: plan.rate,
    })
}

/// Approximate recovery score Φ̃_{i,j}.
pub fn phi_tilde(
    tensor: &SymmetricTensor,
    fam: &ChainFamily,
    lambda: f64,
    plan: &ColorCodingPlan,
    i: u32,
    j: u32,
) -> Result<CcEstimate> {
    let grid = phi_tilde_grid(tensor, fam, lambda, plan)?;
    let n = tensor.n as usize;
    if i == j {
        return Err(Error::Param(
            "recovery score needs two distinct vertices".into(),
        ));
    }
    Ok(CcEstimate {
        statistic: grid[i as usize * n + j as usize] + grid[j as usize * n + i as usize],
        t: plan.t,
        rate: plan.rate,
    })
}

/// All oriented pair scores at once (entry (x,y) + entry (y,x) is Φ̃_{x,y}):
/// one DP pass per coloring serves every pair.
pub fn phi_tilde_grid(
    tensor: &SymmetricTensor,
    fam: &ChainFamily,
    lambda: f64,
    plan: &ColorCodingPlan,
) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::Param(
            "recovery normalization needs lambda > 0".into(),
        ));
    }
    if fam.classes.is_empty() {
        return Err(Error::Family(format!(
            "chain family (m={}, p={}, ell={}) is empty",
            fam.blocks.m, fam.blocks.p, fam.ell
        )));
    }
    let k_needed = fam.n_vertices();
    if plan.k != k_needed {
        return Err(Error::Param(format!(
            "recovery plan needs K = {k_needed}, got {}",
            plan.k
        )));
    }
    let n = tensor.n as usize;
    let seqs: Vec<&[crate::family::OrientedRef]> =
        fam.classes.iter().map(|c| c.seq.as_slice()).collect();
    let per_rep: Result<Vec<Vec<f64>>> = (0..plan.t)
        .into_par_iter()
        .map(|rep| {
            let coloring = plan.rep_coloring(tensor.n, rep);
            if distinct_colors(&coloring) < k_needed {
                return Ok(Vec::new());
            }
            let tables = TableSet::build(tensor, &coloring, &fam.blocks, &seqs)?;
            let mut grid = vec![0.0; n * n];
            for chain in &fam.classes {
                let g = h_chain_with_tables(&coloring, &fam.blocks, chain, &tables)?;
                for (acc, v) in grid.iter_mut().zip(&g) {
                    *acc += v;
                }
            }
            Ok(grid)
        })
        .collect();
    // normalization 1/(λ^{2mℓ} n^{mpℓ/2 - 1} β_J), averaged over t·rate
    let m = fam.blocks.m;
    let ell = fam.ell;
    let pow = (m * fam.blocks.p * ell) as f64 / 2.0 - 1.0;
    let norm =
        lambda.powi(2 * (m * ell) as i32) * (tensor.n as f64).powf(pow) * ratio_f64(&fam.beta);
    let scale = 1.0 / (plan.t as f64 * plan.rate) / norm;
    let mut out = vec![0.0; n * n];
    for grid in per_rep? {
        if grid.is_empty() {
            continue;
        }
        for (acc, v) in out.iter_mut().zip(&grid) {
            *acc += v;
        }
    }
    for v in &mut out {
        *v *= scale;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{build_chains, build_necklaces, enumerate_blocks};
    use crate::tensor::{sample_null, SymmetricTensor};

    fn m1_family(ell: u32) -> NecklaceFamily {
        let blocks = enumerate_blocks(1, 3).unwrap();
        build_necklaces(&blocks, ell).unwrap()
    }

    #[test]
    fn coloring_basics() {
        let c = sample_coloring(20, 9, 5);
        assert!(c.colors.iter().all(|&x| x < 9));
        assert!(is_colorful(&[3], &c));
        let mut twin = c.clone();
        twin.colors[4] = twin.colors[7];
        assert!(!is_colorful(&[4, 7], &twin));
        assert_eq!(sample_coloring(20, 9, 5).colors, c.colors);
    }

    #[test]
    fn colorful_frequency_matches_rate() {
        let k = 9u32;
        let rate = colorful_rate(k);
        let reps = 100_000u64;
        let vs: Vec<u32> = (0..k).collect();
        let mut hits = 0u64;
        for seed in 0..reps {
            let c = sample_coloring(k, k, seed);
            if is_colorful(&vs, &c) {
                hits += 1;
            }
        }
        let freq = hits as f64 / reps as f64;
        let se = (rate * (1.0 - rate) / reps as f64).sqrt();
        assert!((freq - rate).abs() <= 4.0 * se, "freq {freq} rate {rate}");
    }

    #[test]
    fn plan_schedule() {
        let fam = m1_family(3);
        let plan = ColorCodingPlan::detection(&fam, 7).unwrap();
        assert_eq!(plan.k, 9);
        let r9 = crate::combinatorics::factorial(9) as f64 / 9f64.powi(9);
        assert!((plan.rate - r9).abs() < 1e-15);
        assert_eq!(plan.t, (1.0 / r9).ceil() as u32);
        let short = plan.with_t(5).unwrap();
        assert_eq!(short.t, 5);
    }

    #[test]
    fn zero_tensor_zero_everything() {
        let fam = m1_family(3);
        let t = SymmetricTensor::constant(10, 3, 0.0).unwrap();
        assert_eq!(exact_detection_stat(&t, &fam).unwrap(), 0.0);
        let col = sample_coloring(10, 9, 3);
        assert_eq!(
            g_necklace_dp(&t, &col, &fam.blocks, &fam.classes[0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn too_few_vertices_gives_zero() {
        let fam = m1_family(3);
        let t = sample_null(8, 3, 1).unwrap();
        assert_eq!(exact_detection_stat(&t, &fam).unwrap(), 0.0);
        let col = sample_coloring(8, 9, 1);
        assert_eq!(
            g_necklace_dp(&t, &col, &fam.blocks, &fam.classes[0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn all_ones_closed_form() {
        // every copy contributes 1, so the sum counts labeled copies
        let fam = m1_family(3);
        let n = 10u32;
        let t = SymmetricTensor::constant(n, 3, 1.0).unwrap();
        let copies = crate::combinatorics::binomial(10, 9) as f64
            * crate::combinatorics::factorial(9) as f64
            / 48.0;
        let norm = ((n as f64).powi(9) / 48.0).sqrt();
        let expect = copies / norm;
        let got = exact_detection_stat(&t, &fam).unwrap();
        assert!(
            (got - expect).abs() / expect < 1e-12,
            "got {got}, expect {expect}"
        );
    }

    #[test]
    fn identity_coloring_dp_equals_exact() {
        let fam = m1_family(3);
        let n = 10u32;
        let t = sample_null(n, 3, 99).unwrap();
        let exact = exact_detection_stat(&t, &fam).unwrap();
        let col = identity_coloring(n);
        let g = g_necklace_dp(&t, &col, &fam.blocks, &fam.classes[0]).unwrap();
        let dp_stat = g / ((n as f64).powi(9) * ratio_f64(&fam.beta)).sqrt();
        assert!(
            (dp_stat - exact).abs() <= 1e-9 * exact.abs().max(1.0),
            "dp {dp_stat} vs exact {exact}"
        );
    }

    #[test]
    fn lambda_table_symmetric_for_reversible_block() {
        let blocks = enumerate_blocks(1, 3).unwrap();
        let t = sample_null(8, 3, 4).unwrap();
        let col = sample_coloring(8, 9, 11);
        let tab = block_table(&t, &col, &blocks, 0).unwrap();
        for &mask in tab.masks() {
            for x in 0..8u32 {
                for y in 0..8u32 {
                    let a = tab.get(mask, x, y);
                    let b = tab.get(mask, y, x);
                    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn f_tilde_single_rep_arithmetic() {
        let fam = m1_family(3);
        let n = 10u32;
        let t = sample_null(n, 3, 2).unwrap();
        let plan = ColorCodingPlan::detection(&fam, 123)
            .unwrap()
            .with_t(1)
            .unwrap();
        let est = f_tilde(&t, &fam, &plan).unwrap();
        let col = plan.rep_coloring(n, 0);
        let g = g_necklace_dp(&t, &col, &fam.blocks, &fam.classes[0]).unwrap();
        let norm = ((n as f64).powi(9) * ratio_f64(&fam.beta)).sqrt();
        let manual = g / plan.rate / norm;
        assert!((est.statistic - manual).abs() <= 1e-12 * manual.abs().max(1.0));
    }

    #[test]
    fn phi_lambda_scaling_is_exact_power() {
        let blocks = enumerate_blocks(2, 3).unwrap();
        let fam = build_chains(&blocks, 2).unwrap();
        assert_eq!(fam.classes.len(), 1);
        let n = 16u32;
        let t = sample_null(n, 3, 8).unwrap();
        // seed 190's first coloring uses all 13 colors, so rainbow copies exist
        let plan = ColorCodingPlan::recovery(&fam, 190)
            .unwrap()
            .with_t(1)
            .unwrap();
        let g1 = phi_tilde_grid(&t, &fam, 1.0, &plan).unwrap();
        let g2 = phi_tilde_grid(&t, &fam, 2.0, &plan).unwrap();
        // 2mℓ = 8, so doubling λ divides every score by 2^8
        assert!(g1.iter().any(|&v| v != 0.0));
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - 256.0 * b).abs() <= 1e-9 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn empty_chain_family_is_an_error() {
        let blocks = enumerate_blocks(1, 3).unwrap();
        let fam = build_chains(&blocks, 2).unwrap();
        let t = sample_null(8, 3, 0).unwrap();
        assert!(matches!(
            exact_recovery_score(&t, &fam, 1.0, 0, 1),
            Err(Error::Family(_))
        ));
        let plan = ColorCodingPlan::for_colors(7, 1).unwrap();
        assert!(matches!(
            phi_tilde(&t, &fam, 1.0, &plan, 0, 1),
            Err(Error::Family(_))
        ));
    }

    #[test]
    fn exact_capacity_guard() {
        // (30)_9 ≈ 1.1e13 embeddings is over the exact-mode cap
        let fam = m1_family(3);
        let t = SymmetricTensor::constant(30, 3, 0.0).unwrap();
        assert!(matches!(
            exact_detection_stat(&t, &fam),
            Err(Error::Capacity(_))
        ));
    }
}
