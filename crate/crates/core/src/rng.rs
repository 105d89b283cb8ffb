//! Reproducible, splittable random streams.
//!
//! A stream is a ChaCha12 generator keyed by `seed` with its 64-bit stream
//! counter set to `stream`, so distinct stream ids never overlap and every
//! `(seed, stream)` pair reproduces the same sequence on any thread.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    /// Stream for replica `index` of the task labelled `tag`.
    pub fn for_replica(seed: u64, tag: u32, index: u64) -> Self {
        debug_assert!(index < 1 << 40);
        Self::new(seed, ((tag as u64) << 40) | index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngStream {
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
