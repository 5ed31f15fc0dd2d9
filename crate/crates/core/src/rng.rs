//! Counter-based keyed uniform draws.
//!
//! Every draw is a pure function of its key, so the order in which blocks or
//! superblocks are visited never changes the value a given block receives.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into a single well-mixed 64-bit hash.
pub fn hash_words(words: &[u64]) -> u64 {
    let mut h = mix64(0x243F_6A88_85A3_08D3);
    for (i, &w) in words.iter().enumerate() {
        h = mix64(h ^ w.wrapping_add(GOLDEN.wrapping_mul(i as u64 + 1)));
    }
    h
}

/// Maps a hash to `[0, 1)` using its top 53 bits.
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Identity of a single gate draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GateKey {
    pub seed: u64,
    pub instance: u64,
    pub frame: u64,
    pub superblock: u64,
    pub x: u64,
    pub y: u64,
    pub depth: u64,
}

impl GateKey {
    pub fn uniform(&self) -> f64 {
        unit_f64(hash_words(&[
            self.seed,
            self.instance,
            self.frame,
            self.superblock,
            self.x,
            self.y,
            self.depth,
        ]))
    }
}

/// Sequential stream over a fixed key; draw `n` is `hash(key, n)`.
#[derive(Clone, Debug)]
pub struct CounterStream {
    key: u64,
    counter: u64,
}

impl CounterStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            key: hash_words(&[seed, stream]),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = mix64(self.key ^ mix64(self.counter.wrapping_mul(GOLDEN)));
        self.counter += 1;
        out
    }

    pub fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }
}
