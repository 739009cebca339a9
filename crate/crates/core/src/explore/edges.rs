//! Edge weights of the complete graph, sampled lazily.
//!
//! The weight of `{u, v}` is `||u - v||^α · E` where `E = -ln U` and `U` is
//! hashed from the seed and the ordered index pair. Any edge can be queried
//! in any order and always returns the same value.

use crate::rng::{hash_pair, unit_open_closed};
use crate::scalar::Real;
use crate::torus::TorusConfig;

#[derive(Debug, Clone)]
pub struct EdgeWeightSample<F> {
    cfg: TorusConfig<F>,
    seed: u64,
    // ||·||^α by difference index.
    scale: Vec<F>,
}

impl<F: Real> EdgeWeightSample<F> {
    pub fn new(cfg: &TorusConfig<F>, seed: u64) -> Self {
        let alpha = cfg.alpha();
        let scale = (0..cfg.volume())
            .map(|i| {
                if alpha == F::zero() {
                    F::one()
                } else {
                    cfg.norm_of_index(i).powf(alpha)
                }
            })
            .collect();
        Self {
            cfg: cfg.clone(),
            seed,
            scale,
        }
    }

    pub fn config(&self) -> &TorusConfig<F> {
        &self.cfg
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The `Exp(1)` mark of the edge `{a, b}`.
    #[inline]
    pub fn mark(&self, a: usize, b: usize) -> F {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let key = ((lo as u64) << 32) | hi as u64;
        F::lit(-unit_open_closed(hash_pair(self.seed, key)).ln())
    }

    /// Weight of the edge `{a, b}`, `a ≠ b`.
    #[inline]
    pub fn weight(&self, a: usize, b: usize) -> F {
        debug_assert_ne!(a, b);
        self.scale[self.cfg.difference_index(a, b)] * self.mark(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::NormIndex;

    #[test]
    fn symmetric_and_scaled() {
        let cfg = TorusConfig::<f64>::new(2, 9, NormIndex::One, 1.5).unwrap();
        let w = EdgeWeightSample::new(&cfg, 17);
        for (a, b) in [(0, 1), (3, 70), (80, 2), (40, 41)] {
            assert_eq!(w.weight(a, b), w.weight(b, a));
            let da = cfg.site(a);
            let db = cfg.site(b);
            let diff: Vec<i64> = da.coords().iter().zip(db.coords()).map(|(x, y)| x - y).collect();
            let norm = crate::torus::torus_norm(&cfg.canonicalize(&diff).unwrap(), &cfg);
            let expect = norm.powf(1.5) * w.mark(a, b);
            assert!((w.weight(a, b) - expect).abs() <= 1e-12 * expect);
        }
        let other = EdgeWeightSample::new(&cfg, 18);
        assert_ne!(w.mark(0, 1), other.mark(0, 1));
    }

    #[test]
    fn marks_are_unit_exponential() {
        let cfg = TorusConfig::new(2, 64, NormIndex::Two, 0.0).unwrap();
        let w = EdgeWeightSample::new(&cfg, 3);
        let marks: Vec<f64> = (0..50).flat_map(|a| (a + 1..a + 2001).map(move |b| (a, b))).map(|(a, b)| w.weight(a, b)).collect();
        let k = marks.len() as f64;
        let mean = marks.iter().sum::<f64>() / k;
        let tail = marks.iter().filter(|&&x| x > 2.0).count() as f64 / k;
        assert!((mean - 1.0).abs() < 4.0 / k.sqrt(), "{mean}");
        assert!((tail - (-2.0f64).exp()).abs() < 4.0 * (0.135 * 0.865 / k).sqrt(), "{tail}");
    }
}
