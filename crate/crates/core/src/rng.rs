//! Reproducible random number streams for parallel simulation.
//!
//! Every simulated path owns a stream derived from `(seed, path_index)` by
//! counter-style mixing, so results depend only on the seed and the path
//! index — never on how paths are distributed over workers.

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// xoshiro256++ stream, seeded from a (seed, counter) pair.
#[derive(Clone, Debug)]
pub struct Stream {
    s: [u64; 4],
}

impl Stream {
    /// Stream for path `index` of the batch identified by `seed`.
    pub fn for_path(seed: u64, index: u64) -> Self {
        let mut mix = seed ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03);
        // Run the mixer a few times so (seed, index) and (seed', index')
        // collisions need 128 matching bits, then expand to the full state.
        let mut s = [0u64; 4];
        splitmix64(&mut mix);
        for slot in &mut s {
            *slot = splitmix64(&mut mix);
        }
        // xoshiro must not start from the all-zero state.
        if s == [0, 0, 0, 0] {
            s[0] = 0x9e37_79b9_7f4a_7c15;
        }
        Stream { s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform draw strictly inside (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Exponential draw with the given rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        -self.uniform().ln() / rate
    }

    /// Fair coin.
    #[inline]
    pub fn coin(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = Stream::for_path(42, 7);
        let mut b = Stream::for_path(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ_across_indices() {
        let mut a = Stream::for_path(42, 7);
        let mut b = Stream::for_path(42, 8);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn uniform_is_open_interval() {
        let mut s = Stream::for_path(1, 1);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn exponential_mean_roughly_inverse_rate() {
        let mut s = Stream::for_path(3, 0);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| s.exponential(4.0)).sum::<f64>() / n as f64;
        assert!((mean - 0.25).abs() < 0.005, "mean {mean}");
    }
}
