//! Deterministic, stream-addressable random numbers.
//!
//! Every replication draws from its own stream keyed by `(master_seed,
//! stream_id)`, so results do not depend on how replications are spread over
//! worker threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// A counter-based random stream: a pure function of `(master_seed, stream_id)`.
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
        Self { master_seed, stream_id, inner }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream keyed by `key` under this one. Ignores how much of
    /// `self` has been consumed.
    pub fn derive(&self, key: u64) -> Self {
        Self::new(self.master_seed, mix(self.stream_id ^ mix(key.wrapping_add(0x6a09_e667_f3bc_c909))))
    }

    /// Stream for replication `rep`.
    pub fn replication(&self, rep: u64) -> Self {
        self.derive(rep)
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Exponential with the given rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        let e: f64 = Exp1.sample(&mut self.inner);
        e / rate
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

/// splitmix64 finalizer.
pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a tuple of keys into one stream key.
pub fn stream_key(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243f_6a88_85a3_08d3, |acc, &p| mix(acc ^ mix(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_repeat() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.normal().to_bits(), b.normal().to_bits());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 4);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn derive_ignores_consumption() {
        let a = RngStream::new(1, 2);
        let mut used = a.clone();
        used.normal();
        let mut x = a.derive(9);
        let mut y = used.derive(9);
        assert_eq!(x.uniform(), y.uniform());
    }

    #[test]
    fn adjacent_streams_uncorrelated() {
        // 10^4 samples: |corr| must stay within 4/sqrt(10^4)
        let n = 10_000;
        let base = RngStream::new(2024, 0);
        let xs: Vec<f64> = (0..n).map(|r| base.replication(r).normal()).collect();
        let ys: Vec<f64> = (0..n).map(|r| base.replication(r + 1).normal()).collect();
        let zs: Vec<f64> = (0..n).map(|r| RngStream::new(2024, r + 1).normal()).collect();
        for (a, b) in [(&xs, &ys), (&xs, &zs)] {
            let ma = a.iter().sum::<f64>() / n as f64;
            let mb = b.iter().sum::<f64>() / n as f64;
            let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
            let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
            let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
            let corr = cov / (va * vb).sqrt();
            assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr = {corr}");
        }
    }
}
