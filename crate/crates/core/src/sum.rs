//! Compensated summation.

use crate::scalar::Real;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<F> {
    sum: F,
    carry: F,
}

impl<F: Real> Default for CompensatedSum<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Real> CompensatedSum<F> {
    pub fn new() -> Self {
        Self {
            sum: F::zero(),
            carry: F::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> F {
        self.sum + self.carry
    }
}

impl<F: Real> Extend<F> for CompensatedSum<F> {
    fn extend<I: IntoIterator<Item = F>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<F: Real, I: IntoIterator<Item = F>>(iter: I) -> F {
    let mut acc = CompensatedSum::new();
    acc.extend(iter);
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let xs = [1.0f64, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
        assert_eq!(xs.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn harmonic_sum_matches_reverse_order() {
        let forward = compensated_sum((1..200_000).map(|k| 1.0f64 / k as f64));
        let backward = (1..200_000).rev().map(|k| 1.0f64 / k as f64).sum::<f64>();
        assert!((forward - backward).abs() < 1e-13);
    }
}
