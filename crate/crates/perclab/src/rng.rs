//! Counter-based random streams.
//!
//! Every Bernoulli coin in a Monte Carlo run is a pure function of
//! (master seed, replicate index, edge key).  Replicates can therefore be
//! evaluated in any order, on any number of workers, and edges can be
//! queried lazily in data-dependent order, without changing a single
//! coin.  Tally merges are exact integer sums, so parallel and serial
//! execution produce bit-identical results.

/// SplitMix64 finalizer. Full-avalanche 64-bit mixer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Stream key for one replicate of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicateStream {
    key: u64,
}

impl ReplicateStream {
    pub fn new(master_seed: u64, replicate: u64) -> Self {
        let key = mix64(mix64(master_seed.wrapping_add(GOLDEN)) ^ replicate.wrapping_mul(GOLDEN));
        ReplicateStream { key }
    }

    /// Uniform in [0, 1) for the given counter (e.g. a canonical edge key).
    #[inline]
    pub fn u01(&self, counter: u64) -> f64 {
        let bits = mix64(self.key ^ mix64(counter.wrapping_add(GOLDEN)));
        // 53 high-quality bits -> [0, 1)
        (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli(p) coin for the given counter.
    #[inline]
    pub fn coin(&self, counter: u64, p: f64) -> bool {
        self.u01(counter) < p
    }
}

/// Small sequential PRNG for test-vector generation and optimizer restarts.
/// Same mixer, explicit counter; not used for percolation coins.
#[derive(Debug, Clone)]
pub struct SeqRng {
    key: u64,
    counter: u64,
}

impl SeqRng {
    pub fn new(seed: u64) -> Self {
        SeqRng { key: mix64(seed.wrapping_add(GOLDEN)), counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key ^ mix64(self.counter.wrapping_mul(GOLDEN)))
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: u64) -> u64 {
        // Modulo bias is irrelevant at the n used here (n << 2^64).
        self.next_u64() % n
    }
}
