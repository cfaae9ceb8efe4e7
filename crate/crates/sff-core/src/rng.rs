//! Counter-based random streams: one independent generator per
//! `(master_seed, stream_index)` pair, with no state shared between streams.

use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{invalid, Result};
use crate::math;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output finaliser; a bijection on `u64`.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random stream for a single sample index.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: Xoshiro256PlusPlus,
}

impl RngStream {
    /// Stream number `stream_index` of the family selected by `master_seed`.
    ///
    /// Distinct indices give distinct generator keys for any fixed seed.
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let key =
            mix64(mix64(master_seed) ^ stream_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(key),
        }
    }

    /// A standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Circularly symmetric complex Gaussian with `E|z|^2 = variance`.
    pub fn complex_gaussian(&mut self, variance: f64) -> Result<Complex64> {
        if !variance.is_finite() || variance <= 0.0 {
            return Err(invalid(
                "complex Gaussian variance must be positive and finite",
            ));
        }
        let s = math::sqrt(0.5 * variance);
        let re = self.normal();
        let im = self.normal();
        Ok(Complex64::new(s * re, s * im))
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

    #[test]
    fn same_key_same_stream() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn neighbouring_indices_differ() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 4);
        let mut c = RngStream::new(8, 3);
        let x = a.next_u64();
        assert_ne!(x, b.next_u64());
        assert_ne!(x, c.next_u64());
    }

    #[test]
    fn complex_gaussian_rejects_bad_variance() {
        let mut r = RngStream::new(1, 1);
        assert!(r.complex_gaussian(0.0).is_err());
        assert!(r.complex_gaussian(-1.0).is_err());
        assert!(r.complex_gaussian(f64::NAN).is_err());
    }

    #[test]
    fn complex_gaussian_second_moments() {
        let mut r = RngStream::new(11, 0);
        let n = 200_000;
        let (mut abs2, mut re2, mut reim) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = r.complex_gaussian(2.0).unwrap();
            abs2 += z.norm_sqr();
            re2 += z.re * z.re;
            reim += z.re * z.im;
        }
        let n = n as f64;
        assert!((abs2 / n - 2.0).abs() < 0.03);
        assert!((re2 / n - 1.0).abs() < 0.02);
        assert!((reim / n).abs() < 0.02);
    }
}
