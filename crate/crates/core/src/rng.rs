//! Random number plumbing.
//!
//! Every run owns a ChaCha8 stream keyed by its seed, so results depend only on
//! `(seed, draw count)` and never on scheduling. Seeds for replicates, shards
//! and experiments are derived from a root seed by mixing in their indices.
//! Edge weights are not drawn from a stream at all: each unordered site pair
//! hashes to its own uniform variate.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `root` and a path of indices.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(root), |acc, &i| splitmix64(acc ^ splitmix64(i.wrapping_add(GOLDEN))))
}

#[inline]
fn fold_mul(a: u64, b: u64) -> u64 {
    let r = (a as u128).wrapping_mul(b as u128);
    (r as u64) ^ ((r >> 64) as u64)
}

/// 128-bit multiply-fold hash of `(seed, key)`.
#[inline]
pub fn hash_pair(seed: u64, key: u64) -> u64 {
    let s = splitmix64(seed);
    let a = fold_mul(s ^ 0xa076_1d64_78bd_642f, key ^ 0xe703_7ed1_a0b4_28db);
    let b = fold_mul(a ^ 0x8ebc_6af0_9c88_c6e3, splitmix64(key ^ s));
    splitmix64(b)
}

/// Top 53 bits as a uniform in `(0, 1]`.
#[inline]
pub fn unit_open_closed(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Top 52 bits as a uniform in `(0, 1)`.
#[inline]
pub fn unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Per-run generator.
#[derive(Debug, Clone)]
pub struct RunRng {
    inner: ChaCha8Rng,
}

impl RunRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `(0, 1]`, never 0.
    #[inline]
    pub fn uniform<F: Real>(&mut self) -> F {
        F::lit(unit_open_closed(self.next_u64()))
    }

    /// Uniform in `(0, 1)`.
    #[inline]
    pub fn uniform_open<F: Real>(&mut self) -> F {
        F::lit(unit_open(self.next_u64()))
    }

    /// `Exp(rate)` via `-ln(U) / rate`.
    #[inline]
    pub fn exponential<F: Real>(&mut self, rate: F) -> F {
        -self.uniform::<F>().ln() / rate
    }

    /// Uniform integer in `[0, bound)` by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }
}

/// `Gamma(shape, 1)` sampler for `shape ∈ (0, 1]` (Ahrens–Dieter GS).
///
/// With `b = 1 + shape/e` and `P = b·U₁`: if `P ≤ 1`, propose `X = P^{1/shape}`
/// and accept when `U₂ ≤ e^{-X}`; otherwise propose `X = -ln((b - P)/shape)`
/// and accept when `U₂ ≤ X^{shape-1}`.
#[derive(Debug, Clone, Copy)]
pub struct GammaSmallShape<F> {
    shape: F,
    b: F,
}

impl<F: Real> GammaSmallShape<F> {
    pub fn new(shape: F) -> Option<Self> {
        if !(shape > F::zero() && shape <= F::one()) {
            return None;
        }
        Some(Self {
            shape,
            b: F::one() + shape / F::E(),
        })
    }

    pub fn sample(&self, rng: &mut RunRng) -> F {
        loop {
            let p = self.b * rng.uniform_open::<F>();
            let u2 = rng.uniform_open::<F>();
            if p <= F::one() {
                let x = p.powf(self.shape.recip());
                if u2 <= (-x).exp() {
                    return x;
                }
            } else {
                let x = -((self.b - p) / self.shape).ln();
                if u2 <= x.powf(self.shape - F::one()) {
                    return x;
                }
            }
        }
    }
}
