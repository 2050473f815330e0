//! Seeded random streams for trajectory simulation.
//!
//! Generator: xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Trajectory `k` of an ensemble with
//! base seed `s` uses the stream seeded by `s ^ mix(k)`, where `mix` is the
//! SplitMix64 output function applied to `(k + 1) * 0x9E3779B97F4A7C15`.
//! Streams are therefore bit-reproducible for a given `(s, k)` and
//! independent of how trajectories are scheduled across workers.
//!
//! Uniform variates take the top 53 bits of a 64-bit draw. Gaussian variates
//! use the Marsaglia polar method; the second variate of each accepted pair
//! is cached and returned by the next call.

#[allow(unused_imports)]
use num_traits::Float;
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Base seed used when none is given.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// SplitMix64 finalizer of `(index + 1) * golden_gamma`.
pub fn mix(index: u64) -> u64 {
    let mut z = index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct TrajectoryRng {
    inner: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl TrajectoryRng {
    /// Stream for trajectory `index` of an ensemble seeded with `seed`.
    pub fn stream(seed: u64, index: u64) -> Self {
        Self::from_seed(seed ^ mix(index))
    }

    pub fn from_seed(seed: u64) -> Self {
        Self { inner: Xoshiro256PlusPlus::seed_from_u64(seed), spare: None }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate (Marsaglia polar method).
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }

    /// Wiener increment over a step of length `dt`.
    #[inline]
    pub fn wiener_increment(&mut self, dt: f64) -> f64 {
        dt.sqrt() * self.standard_normal()
    }
}
