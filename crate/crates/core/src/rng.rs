//! Seeded random streams with random access.
//!
//! Every stream is a ChaCha8 keystream selected by `(seed, stream id)`. A
//! variate is one `u64` (two keystream words), so a consumer that draws a
//! fixed number of variates per unit of work can jump straight to unit `k`
//! with [`Stream::at_variate`]. Chunked or parallel execution therefore sees
//! exactly the same numbers as a single sequential pass.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Keystream words consumed by one variate.
const WORDS_PER_VARIATE: u128 = 2;

/// 2^-53, the spacing of [`Stream::uniform`] outputs.
const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Stream positioned just before variate number `index`.
    pub fn at_variate(seed: u64, stream: u64, index: u64) -> Self {
        let mut s = Self::new(seed, stream);
        s.inner.set_word_pos(index as u128 * WORDS_PER_VARIATE);
        s
    }

    /// Uniform draw from `[0, 1)` with 53 bits of resolution. Consumes one variate.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * UNIT
    }

    /// Raw 64-bit draw. Consumes one variate.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Number of variates consumed since the start of the stream.
    pub fn position(&self) -> u64 {
        (self.inner.get_word_pos() / WORDS_PER_VARIATE) as u64
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Stream ids are partitioned into domains so that different experiments
/// sharing a seed never overlap. The low 32 bits carry the cell/unit index.
pub mod domain {
    pub const CORRELATION: u64 = 0;
    pub const BIAS_SETUP: u64 = 1;
    pub const BIAS_DRAWS: u64 = 2;
    pub const GEOMETRY: u64 = 3;
    pub const CHANNEL: u64 = 4;
    pub const BOOTSTRAP: u64 = 5;
    pub const BOX_SAMPLES: u64 = 6;
    pub const IDENTITY: u64 = 7;

    pub fn stream(domain: u64, index: u64) -> u64 {
        (domain << 32) | (index & 0xffff_ffff)
    }
}
