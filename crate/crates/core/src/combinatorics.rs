//! Small combinatorial helpers: binomial coefficients, factorials,
//! colexicographic ranking of sorted subsets, and iteration over
//! fixed-popcount bitmasks.

/// Binomial coefficient as u64, saturating on overflow.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}

pub fn factorial(n: u64) -> u64 {
    (2..=n).product::<u64>().max(1)
}

/// Falling factorial n·(n−1)···(n−k+1).
pub fn falling(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).map(|i| n - i).product::<u64>().max(1)
}

/// Precomputed Pascal triangle for fast subset ranking.
#[derive(Clone)]
pub struct BinomTable {
    max_n: usize,
    table: Vec<u64>,
}

impl BinomTable {
    pub fn new(max_n: usize) -> Self {
        let w = max_n + 1;
        let mut table = vec![0u64; w * w];
        for n in 0..=max_n {
            table[n * w] = 1;
            for k in 1..=n {
                let above = if k < n { table[(n - 1) * w + k] } else { 0 };
                table[n * w + k] = table[(n - 1) * w + k - 1].saturating_add(above);
            }
        }
        BinomTable { max_n, table }
    }

    #[inline]
    pub fn c(&self, n: usize, k: usize) -> u64 {
        if k > n || n > self.max_n {
            return if k == 0 { 1 } else { 0 };
        }
        self.table[n * (self.max_n + 1) + k]
    }

    /// Colexicographic rank of a strictly increasing 0-based subset.
    #[inline]
    pub fn colex_rank(&self, subset: &[u32]) -> usize {
        let mut r = 0u64;
        for (i, &v) in subset.iter().enumerate() {
            r += self.c(v as usize, i + 1);
        }
        r as usize
    }

    /// Inverse of `colex_rank`: writes the subset of size `k` with the given rank.
    pub fn colex_unrank(&self, mut rank: u64, k: usize, out: &mut [u32]) {
        debug_assert_eq!(out.len(), k);
        for i in (1..=k).rev() {
            // largest v with C(v, i) <= rank
            let mut v = i - 1;
            while self.c(v + 1, i) <= rank {
                v += 1;
            }
            rank -= self.c(v, i);
            out[i - 1] = v as u32;
        }
    }
}

/// Iterates all bitmasks of `width` bits with exactly `count` bits set,
/// in increasing numeric order (Gosper's hack).
pub fn masks_with_popcount(width: u32, count: u32) -> Vec<u32> {
    assert!(width <= 31);
    if count == 0 {
        return vec![0];
    }
    if count > width {
        return Vec::new();
    }
    let mut out = Vec::new();
    let limit: u32 = 1 << width;
    let mut m: u32 = (1 << count) - 1;
    while m < limit {
        out.push(m);
        let c = m & m.wrapping_neg();
        let r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_basics() {
        assert_eq!(binomial(4, 3), 4);
        assert_eq!(binomial(35, 4), 52360);
        assert_eq!(binomial(30, 9), 14307150);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn rank_roundtrip() {
        let bt = BinomTable::new(16);
        let mut seen = vec![false; binomial(10, 3) as usize];
        let mut buf = [0u32; 3];
        for a in 0..10u32 {
            for b in 0..a {
                for c in 0..b {
                    let s = [c, b, a];
                    let r = bt.colex_rank(&s);
                    assert!(!seen[r]);
                    seen[r] = true;
                    bt.colex_unrank(r as u64, 3, &mut buf);
                    assert_eq!(buf, s);
                }
            }
        }
        assert!(seen.iter().all(|&x| x));
    }

    #[test]
    fn gosper_counts() {
        assert_eq!(masks_with_popcount(9, 7).len(), binomial(9, 7) as usize);
        assert_eq!(masks_with_popcount(13, 7).len(), binomial(13, 7) as usize);
        for m in masks_with_popcount(9, 4) {
            assert_eq!(m.count_ones(), 4);
        }
    }
}
