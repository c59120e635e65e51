//! Symmetric order-p tensors under the null and planted laws.
//!
//! Only entries at distinct-index p-subsets are stored (the counting
//! statistics never read repeated-index entries), one f64 per subset in
//! colexicographic order. Sampling is keyed by (seed, subset rank), so it is
//! order-independent and reproducible across thread counts.

use crate::combinatorics::BinomTable;
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::rng;
use std::io::{Read, Write};

const STREAM_NOISE: u64 = 0x6e6f_6973; // entry noise
const STREAM_SPIKE: u64 = 0x7370_6b65; // spike signs

/// Model parameters (n, p, λ). The statistics use SNR κ = λ·n^{−p/4}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub n: u32,
    pub p: u32,
    pub lambda: f64,
}

impl ModelParams {
    pub fn new(n: u32, p: u32, lambda: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::Param(format!("p must be at least 2, got {p}")));
        }
        if n < p {
            return Err(Error::Param(format!("need n >= p, got n={n}, p={p}")));
        }
        if !(lambda >= 0.0) {
            return Err(Error::Param(format!(
                "lambda must be non-negative, got {lambda}"
            )));
        }
        Ok(ModelParams { n, p, lambda })
    }

    /// κ = λ·n^{−p/4}.
    pub fn snr(&self) -> f64 {
        self.lambda * (self.n as f64).powf(-(self.p as f64) / 4.0)
    }
}

/// The planted ±1 vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spike {
    pub entries: Vec<i8>,
}

impl Spike {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::Param("spike entries must be ±1".into()));
        }
        Ok(Spike { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// x^e = ∏_{v ∈ e} x(v), vertices 0-based.
    pub fn edge_sign(&self, edge: &[u32]) -> i8 {
        let mut s = 1i8;
        for &v in edge {
            s *= self.entries[v as usize];
        }
        s
    }

    pub fn sample(n: u32, seed: u64) -> Spike {
        let entries = (0..n)
            .map(|i| rng::sign(rng::key(seed, STREAM_SPIKE, i as u64)))
            .collect();
        Spike { entries }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for &x in &self.entries {
            s.push_str(if x > 0 { "1\n" } else { "-1\n" });
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Spike> {
        let entries: Vec<i8> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| match l.trim() {
                "1" | "+1" => Ok(1),
                "-1" => Ok(-1),
                other => Err(Error::Format(format!("bad spike entry {other}"))),
            })
            .collect::<Result<_>>()?;
        Spike::new(entries)
    }
}

/// Order-p symmetric tensor restricted to distinct-index entries.
#[derive(Clone)]
pub struct SymmetricTensor {
    pub n: u32,
    pub p: u32,
    values: Vec<f64>,
    binom: BinomTable,
}

impl PartialEq for SymmetricTensor {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.p == other.p && self.values == other.values
    }
}

impl std::fmt::Debug for SymmetricTensor {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.debug_struct("SymmetricTensor")
            .field("n", &self.n)
            .field("p", &self.p)
            .field("entries", &self.values.len())
            .finish()
    }
}

impl SymmetricTensor {
    pub fn from_values(n: u32, p: u32, values: Vec<f64>) -> Result<Self> {
        ModelParams::new(n, p, 0.0)?;
        let binom = BinomTable::new(n as usize);
        let want = binom.c(n as usize, p as usize) as usize;
        if values.len() != want {
            return Err(Error::Shape(format!(
                "expected {want} entries for n={n}, p={p}, got {}",
                values.len()
            )));
        }
        Ok(SymmetricTensor {
            n,
            p,
            values,
            binom,
        })
    }

    pub fn constant(n: u32, p: u32, value: f64) -> Result<Self> {
        let count = crate::combinatorics::binomial(n as u64, p as u64) as usize;
        Self::from_values(n, p, vec![value; count])
    }

    pub fn n_entries(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn rank_of(&self, sorted_edge: &[u32]) -> usize {
        self.binom.colex_rank(sorted_edge)
    }

    /// Value at a p-subset given in any order.
    pub fn get(&self, edge: &[u32]) -> Result<f64> {
        if edge.len() != self.p as usize {
            return Err(Error::Shape(format!(
                "edge arity {} does not match tensor order {}",
                edge.len(),
                self.p
            )));
        }
        let mut e: Vec<u32> = edge.to_vec();
        e.sort_unstable();
        if e.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Shape("repeated index in edge".into()));
        }
        if e[e.len() - 1] >= self.n {
            return Err(Error::Lookup(format!(
                "vertex {} out of range",
                e[e.len() - 1]
            )));
        }
        Ok(self.values[self.binom.colex_rank(&e)])
    }

    /// Value at an already-sorted, validated p-subset. Hot path for counting.
    #[inline]
    pub fn get_sorted(&self, sorted_edge: &[u32]) -> f64 {
        self.values[self.binom.colex_rank(sorted_edge)]
    }

    /// Branch-free rank rows: `rows[i][v] = C(v, i+1)`, so the colex rank of
    /// a sorted subset is Σ rows[i][e[i]].
    pub fn rank_rows(&self) -> Vec<Vec<u32>> {
        (0..self.p as usize)
            .map(|i| {
                (0..self.n as usize + 1)
                    .map(|v| self.binom.c(v, i + 1) as u32)
                    .collect()
            })
            .collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// f_S(Y) = ∏_{e ∈ E(S)} Y_e; the empty edge set yields 1.
    pub fn edge_monomial(&self, s: &Hypergraph) -> Result<f64> {
        let mut prod = 1.0;
        for e in s.edges() {
            prod *= self.get(e)?;
        }
        Ok(prod)
    }

    // ------------------------------------------------------------------
    // File formats.
    // ------------------------------------------------------------------

    /// Binary: magic "SPT1", LE u32 n, u32 p, then C(n,p) f64 values in
    /// colexicographic subset order.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(b"SPT1")?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&self.p.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"SPT1" {
            return Err(Error::Format("bad magic; expected SPT1".into()));
        }
        let mut buf4 = [0u8; 4];
        r.read_exact(&mut buf4)?;
        let n = u32::from_le_bytes(buf4);
        r.read_exact(&mut buf4)?;
        let p = u32::from_le_bytes(buf4);
        let count = crate::combinatorics::binomial(n as u64, p as u64) as usize;
        let mut values = Vec::with_capacity(count);
        let mut buf8 = [0u8; 8];
        for _ in 0..count {
            r.read_exact(&mut buf8)?;
            values.push(f64::from_le_bytes(buf8));
        }
        Self::from_values(n, p, values)
    }

    /// Text: one line "e_1 ... e_p value" per subset, 1-based vertex ids.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut subset = vec![0u32; self.p as usize];
        for (rank, v) in self.values.iter().enumerate() {
            self.binom
                .colex_unrank(rank as u64, self.p as usize, &mut subset);
            for s in &subset {
                out.push_str(&(s + 1).to_string());
                out.push(' ');
            }
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows: Vec<(Vec<u32>, f64)> = Vec::new();
        let mut n = 0u32;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < 2 {
                return Err(Error::Format(format!("bad tensor line: {line}")));
            }
            let mut subset: Vec<u32> = toks[..toks.len() - 1]
                .iter()
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| Error::Format(format!("bad index {t}")))
                })
                .collect::<Result<_>>()?;
            if subset.iter().any(|&v| v == 0) {
                return Err(Error::Format("text tensor uses 1-based indices".into()));
            }
            for v in subset.iter_mut() {
                *v -= 1;
                n = n.max(*v + 1);
            }
            subset.sort_unstable();
            let value: f64 = toks[toks.len() - 1]
                .parse()
                .map_err(|_| Error::Format(format!("bad value in: {line}")))?;
            rows.push((subset, value));
        }
        let p = rows
            .first()
            .map(|(s, _)| s.len() as u32)
            .ok_or_else(|| Error::Format("empty tensor text".into()))?;
        let binom = BinomTable::new(n as usize);
        let count = binom.c(n as usize, p as usize) as usize;
        if rows.len() != count {
            return Err(Error::Format(format!(
                "expected {count} rows for n={n}, p={p}, got {}",
                rows.len()
            )));
        }
        let mut values = vec![f64::NAN; count];
        for (subset, value) in rows {
            if subset.len() != p as usize {
                return Err(Error::Format("mixed arities in tensor text".into()));
            }
            values[binom.colex_rank(&subset)] = value;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Format(
                "duplicate or missing subsets in tensor text".into(),
            ));
        }
        Self::from_values(n, p, values)
    }
}

/// Pure noise: each p-subset entry an independent standard normal.
pub fn sample_null(n: u32, p: u32, seed: u64) -> Result<SymmetricTensor> {
    ModelParams::new(n, p, 0.0)?;
    let count = crate::combinatorics::binomial(n as u64, p as u64) as usize;
    let values = (0..count)
        .map(|rank| rng::normal(rng::key(seed, STREAM_NOISE, rank as u64)))
        .collect();
    SymmetricTensor::from_values(n, p, values)
}

/// Planted law: Y_e = λ·n^{−p/4}·x^e + G_e with a fresh uniform spike.
pub fn sample_planted(params: ModelParams, seed: u64) -> Result<(SymmetricTensor, Spike)> {
    let spike = Spike::sample(params.n, seed);
    let tensor = sample_planted_with_spike(params, &spike, seed)?;
    Ok((tensor, spike))
}

/// Planted law with a caller-supplied spike (same noise stream as
/// `sample_null` at the same seed).
pub fn sample_planted_with_spike(
    params: ModelParams,
    spike: &Spike,
    seed: u64,
) -> Result<SymmetricTensor> {
    if spike.len() != params.n as usize {
        return Err(Error::Shape(format!(
            "spike length {} does not match n={}",
            spike.len(),
            params.n
        )));
    }
    let mut tensor = sample_null(params.n, params.p, seed)?;
    let kappa = params.snr();
    if kappa != 0.0 {
        let p = params.p as usize;
        let mut subset = vec![0u32; p];
        for rank in 0..tensor.values.len() {
            tensor.binom.colex_unrank(rank as u64, p, &mut subset);
            tensor.values[rank] += kappa * spike.edge_sign(&subset) as f64;
        }
    }
    Ok(tensor)
}
