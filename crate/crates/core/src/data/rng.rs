use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A reproducible random stream identified by `(master_seed, stream_id)`.
///
/// Backed by ChaCha8 with the 64-bit stream selector set to `stream_id`, so
/// every trajectory gets an independent keystream and the draws of one
/// stream never depend on how many other streams exist or in which order
/// they are consumed.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u128 {
        self.inner.get_word_pos()
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
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

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(seed: u64, stream: u64, k: usize) -> Vec<u64> {
        let mut rng = RngStream::new(seed, stream);
        (0..k).map(|_| rng.next_u64()).collect()
    }

    #[test]
    fn same_seed_and_stream_reproduce() {
        assert_eq!(draws(7, 0, 100), draws(7, 0, 100));
    }

    #[test]
    fn reseeding_restarts_sequence() {
        let mut rng = RngStream::new(7, 0);
        let first: Vec<u64> = (0..10).map(|_| rng.next_u64()).collect();
        for _ in 0..1000 {
            rng.next_u64();
        }
        rng = RngStream::new(7, 0);
        let again: Vec<u64> = (0..10).map(|_| rng.next_u64()).collect();
        assert_eq!(first, again);
        assert_eq!(rng.position(), 20);
    }

    #[test]
    fn distinct_streams_differ() {
        let a = draws(7, 0, 4);
        let b = draws(7, 1, 4);
        assert_ne!(a[0], b[0]);
        // regression fixtures recorded from the first run
        assert_eq!(a, STREAM_7_0);
        assert_eq!(b, STREAM_7_1);
    }

    #[test]
    fn unit_in_range() {
        let mut rng = RngStream::new(1, 2);
        for _ in 0..10_000 {
            let u = rng.unit();
            assert!((0.0..1.0).contains(&u));
        }
    }

    const STREAM_7_0: [u64; 4] = [2910824217569608635, 3098856782162503994, 12991601491111613745, 13406010708265417443];
    const STREAM_7_1: [u64; 4] = [18301176669829311175, 166969048821288533, 13311386896195443538, 9741831564152063589];
}
