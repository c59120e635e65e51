//! Counter-based random source.
//!
//! Every draw is a pure function of a (seed, stream, counter) key, so sampling
//! is order-independent: entry k of a tensor gets the same value no matter how
//! many threads are used or in which order entries are filled.

/// SplitMix64 finalizer; passes standard avalanche tests.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Combines a seed with stream/counter labels into a fresh 64-bit key.
#[inline]
pub fn key(seed: u64, stream: u64, counter: u64) -> u64 {
    mix(mix(seed ^ mix(stream)) ^ counter)
}

/// Uniform f64 in (0, 1), never exactly 0 or 1.
#[inline]
pub fn uniform(k: u64) -> f64 {
    let bits = mix(k) >> 11; // 53 random bits
    (bits as f64 + 0.5) / 9007199254740992.0
}

/// Standard normal via Box-Muller on two derived uniforms.
#[inline]
pub fn normal(k: u64) -> f64 {
    let u1 = uniform(mix(k ^ 0x5bf0_3635));
    let u2 = uniform(mix(k ^ 0xc2b2_ae35));
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Uniform integer in [0, bound) by rejection-free scaling (bound ≤ 2^32).
#[inline]
pub fn uniform_u32(k: u64, bound: u32) -> u32 {
    debug_assert!(bound > 0);
    ((mix(k) >> 32).wrapping_mul(bound as u64) >> 32) as u32
}

/// Rademacher ±1 draw.
#[inline]
pub fn sign(k: u64) -> i8 {
    if mix(k) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Sequential generator for places where a stream is more convenient than
/// explicit counters (e.g. test scaffolding). Still fully seed-determined.
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream { state: mix(seed) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        mix(self.state)
    }

    pub fn next_range(&mut self, bound: u32) -> u32 {
        uniform_u32(self.next_u64(), bound)
    }
}
