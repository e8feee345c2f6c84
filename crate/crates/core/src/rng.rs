//! Deterministic random streams.
//!
//! Every replicate draws from its own ChaCha8 stream keyed by `(seed, stream)`.
//! ChaCha is a counter-based generator, so replicate `k` can be generated on any
//! thread without touching the state of any other replicate, and results do not
//! depend on scheduling.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Stream offset reserved for each grid point in multi-point experiments.
pub const GRID_STRIDE: u64 = 1 << 40;

/// Generator for replicate `stream` under master `seed`.
pub fn replicate_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform integer in `0..bound` by Lemire's multiply-and-reject method.
///
/// Exactly uniform: draws falling into the short zone at the bottom of each
/// residue class are rejected.
#[inline]
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, bound: u32) -> u32 {
    debug_assert!(bound > 0);
    let mut m = u64::from(rng.next_u32()) * u64::from(bound);
    let mut low = m as u32;
    if low < bound {
        let threshold = bound.wrapping_neg() % bound;
        while low < threshold {
            m = u64::from(rng.next_u32()) * u64::from(bound);
            low = m as u32;
        }
    }
    (m >> 32) as u32
}

/// Bernoulli(p) sampler comparing one 64-bit draw against a fixed threshold.
#[derive(Debug, Clone, Copy)]
pub struct Coin {
    threshold: u64,
    always: bool,
}

impl Coin {
    pub fn new(p: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&p));
        if p >= 1.0 {
            return Coin {
                threshold: u64::MAX,
                always: true,
            };
        }
        // 2^64 * p, exact for dyadic p
        let threshold = (p * 18_446_744_073_709_551_616.0) as u64;
        Coin {
            threshold,
            always: false,
        }
    }

    #[inline]
    pub fn flip<R: RngCore + ?Sized>(&self, rng: &mut R) -> bool {
        self.always || rng.next_u64() < self.threshold
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| replicate_rng(7, 3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut x = replicate_rng(7, 3);
        let mut y = replicate_rng(7, 4);
        assert_ne!(x.next_u64(), y.next_u64());
    }

    #[test]
    fn uniform_below_small_bound_is_flat() {
        let mut rng = replicate_rng(1, 0);
        let mut counts = [0u32; 3];
        let draws = 300_000;
        for _ in 0..draws {
            counts[uniform_below(&mut rng, 3) as usize] += 1;
        }
        let expect = f64::from(draws) / 3.0;
        let sd = (f64::from(draws) * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((f64::from(c) - expect).abs() < 4.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn uniform_below_one_is_zero() {
        let mut rng = replicate_rng(2, 0);
        assert!((0..100).all(|_| uniform_below(&mut rng, 1) == 0));
    }

    #[test]
    fn coin_frequency() {
        let mut rng = replicate_rng(3, 0);
        let coin = Coin::new(0.3);
        let n = 200_000;
        let heads = (0..n).filter(|_| coin.flip(&mut rng)).count() as f64;
        let sd = (n as f64 * 0.3 * 0.7).sqrt();
        assert!((heads - 0.3 * n as f64).abs() < 4.0 * sd);
    }
}
