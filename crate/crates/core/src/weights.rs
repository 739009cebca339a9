//! Normalisation sums `R_n`, nearest-`k` partial sums and the incremental
//! attraction field `W(z) = Σ_i ||z - v_i||^{-α}` driving the exploration.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sum::{compensated_sum, CompensatedSum};
use crate::torus::{Site, TorusConfig};

/// Largest torus for which the dense field (≈ 16 bytes per site) is built.
pub const FIELD_CAP: usize = 1 << 26;

fn check_field_cap(n: usize, what: &'static str) -> Result<()> {
    if n > FIELD_CAP {
        return Err(Error::TooLarge { what, n, cap: FIELD_CAP });
    }
    Ok(())
}

/// `||u||^{-α}` for every residue index `u`, with the zero entry set to 0.
#[derive(Debug, Clone)]
pub struct Kernel<F> {
    cfg: TorusConfig<F>,
    values: Vec<F>,
}

impl<F: Real> Kernel<F> {
    pub fn new(cfg: &TorusConfig<F>) -> Result<Self> {
        let n = cfg.volume();
        check_field_cap(n, "attraction kernel")?;
        let alpha = cfg.alpha();
        let values = (0..n)
            .map(|i| {
                if i == 0 {
                    F::zero()
                } else if alpha == F::zero() {
                    F::one()
                } else {
                    cfg.norm_of_index(i).powf(-alpha)
                }
            })
            .collect();
        Ok(Self { cfg: cfg.clone(), values })
    }

    pub fn config(&self) -> &TorusConfig<F> {
        &self.cfg
    }

    /// Kernel value at residue index `offset`.
    #[inline]
    pub fn at(&self, offset: usize) -> F {
        self.values[offset]
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    /// `R_n`, the sum over all nonzero sites.
    pub fn total(&self) -> F {
        compensated_sum(self.values.iter().copied())
    }
}

/// `R_n = Σ_{u ≠ 0} ||u||^{-α}`.
pub fn compute_rn<F: Real>(cfg: &TorusConfig<F>) -> Result<F> {
    let n = cfg.volume();
    check_field_cap(n, "R_n enumeration")?;
    if cfg.alpha() == F::zero() {
        return Ok(F::from_count(n - 1));
    }
    let alpha = cfg.alpha();
    Ok(compensated_sum(
        (1..n).map(|i| cfg.norm_of_index(i).powf(-alpha)),
    ))
}

/// Prefix sums of the kernel in nearest-first order: `prefix[k]` is the sum
/// of `||u||^{-α}` over the `k` nearest nonzero sites.
#[derive(Debug, Clone)]
pub struct NearestSums<F> {
    prefix: Vec<F>,
}

impl<F: Real> NearestSums<F> {
    pub fn new(kernel: &Kernel<F>) -> Self {
        // Summands are ordered by norm, so ties among equal norms do not
        // change any prefix value.
        let mut vals: Vec<F> = kernel.values()[1..].to_vec();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let mut prefix = Vec::with_capacity(vals.len() + 1);
        let mut acc = CompensatedSum::new();
        prefix.push(F::zero());
        for v in vals {
            acc.add(v);
            prefix.push(acc.value());
        }
        Self { prefix }
    }

    pub fn from_config(cfg: &TorusConfig<F>) -> Result<Self> {
        Ok(Self::new(&Kernel::new(cfg)?))
    }

    /// Sum over the `k` nearest nonzero sites, `0 ≤ k ≤ n - 1`.
    pub fn get(&self, k: usize) -> Result<F> {
        self.prefix.get(k).copied().ok_or_else(|| Error::OutOfRange {
            what: "k",
            value: k.to_string(),
            range: format!("[0, {}]", self.prefix.len() - 1),
        })
    }

    /// `R_n`.
    pub fn full(&self) -> F {
        *self.prefix.last().expect("nonempty")
    }
}

/// Sum of `||u||^{-α}` over the `k` nearest nonzero sites, `1 ≤ k ≤ n - 1`.
pub fn compute_rk_nearest<F: Real>(cfg: &TorusConfig<F>, k: usize) -> Result<F> {
    let n = cfg.volume();
    if k == 0 || k > n - 1 {
        return Err(Error::OutOfRange {
            what: "k",
            value: k.to_string(),
            range: format!("[1, {}]", n - 1),
        });
    }
    NearestSums::from_config(cfg)?.get(k)
}

/// Diagnostic: `R` evaluated on the smaller torus of side `⌊j^{1/d}⌋`, the
/// alternative reading of `R_j`. Returns 0 when that side is below 2. Never
/// used in the rate bounds.
pub fn rn_small_torus<F: Real>(cfg: &TorusConfig<F>, j: usize) -> Result<F> {
    let d = cfg.dim() as u32;
    let mut side = (j as f64).powf(1.0 / d as f64).round() as usize;
    while side.pow(d) > j {
        side -= 1;
    }
    while (side + 1).pow(d) <= j {
        side += 1;
    }
    if side < 2 {
        return Ok(F::zero());
    }
    compute_rn(&cfg.with_side(side)?)
}

/// Attraction weights of all undiscovered sites toward the discovered set.
///
/// Discovered sites carry weight 0, so `total` is the plain sum of `values`
/// and equals the birth rate `Λ_j` of the exploration.
#[derive(Debug, Clone)]
pub struct WeightField<F> {
    kernel: Arc<Kernel<F>>,
    values: Vec<F>,
    alive: Vec<F>,
    discovered: Vec<usize>,
    total: F,
    max: F,
}

impl<F: Real> WeightField<F> {
    /// Empty field sharing a precomputed kernel.
    pub fn empty(kernel: Arc<Kernel<F>>) -> Self {
        let n = kernel.config().volume();
        Self {
            kernel,
            values: vec![F::zero(); n],
            alive: vec![F::one(); n],
            discovered: Vec::new(),
            total: F::zero(),
            max: F::zero(),
        }
    }

    /// Field after discovering `source` only; `total` equals `R_n`.
    pub fn init(source: &Site, cfg: &TorusConfig<F>) -> Result<Self> {
        let kernel = Arc::new(Kernel::new(cfg)?);
        let idx = cfg.index_of(source.coords())?;
        let mut field = Self::empty(kernel);
        field.discover_index(idx)?;
        Ok(field)
    }

    pub fn config(&self) -> &TorusConfig<F> {
        self.kernel.config()
    }

    pub fn kernel(&self) -> &Arc<Kernel<F>> {
        &self.kernel
    }

    /// `Λ_j`: total attraction toward undiscovered sites.
    pub fn total(&self) -> F {
        self.total
    }

    /// Largest weight among undiscovered sites.
    pub fn max_weight(&self) -> F {
        self.max
    }

    /// Weight by site index; 0 for discovered sites.
    pub fn weight(&self, index: usize) -> F {
        self.values[index]
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn is_discovered(&self, index: usize) -> bool {
        self.alive[index] == F::zero()
    }

    /// Discovered site indices in discovery order.
    pub fn discovered(&self) -> &[usize] {
        &self.discovered
    }

    pub fn undiscovered_count(&self) -> usize {
        self.values.len() - self.discovered.len()
    }

    /// Discovers the site with the given coordinates.
    pub fn discover(&mut self, z: &Site) -> Result<()> {
        let idx = self.config().index_of(z.coords())?;
        self.discover_index(idx)
    }

    /// Removes `z` from the undiscovered set and adds `||y - z||^{-α}` to
    /// every remaining undiscovered `y`. `O(n)`.
    pub fn discover_index(&mut self, z: usize) -> Result<()> {
        if z >= self.values.len() {
            return Err(Error::OutOfRange {
                what: "site index",
                value: z.to_string(),
                range: format!("[0, {})", self.values.len()),
            });
        }
        if self.is_discovered(z) {
            return Err(Error::AlreadyDiscovered(z));
        }
        self.alive[z] = F::zero();
        self.values[z] = F::zero();
        self.discovered.push(z);

        let cfg = self.kernel.config();
        let m = cfg.side();
        let d = cfg.dim();
        let n = cfg.volume();
        let kern = self.kernel.values();
        let zl = z % m;
        let z_prefix = z / m;
        let rows = n / m;

        let mut total = CompensatedSum::new();
        let mut max = F::zero();
        for row in 0..rows {
            // Residue index of (row prefix - z prefix), in units of rows.
            let mut krow = 0usize;
            let mut stride = 1usize;
            let (mut a, mut b) = (row, z_prefix);
            for _ in 1..d {
                let (xa, xb) = (a % m, b % m);
                a /= m;
                b /= m;
                krow += ((xa + m - xb) % m) * stride;
                stride *= m;
            }
            let ybase = row * m;
            let kbase = krow * m;
            let vals = &mut self.values[ybase..ybase + m];
            let alive = &self.alive[ybase..ybase + m];
            let krow_vals = &kern[kbase..kbase + m];
            // y_last in [zl, m) maps to offsets [0, m - zl); y_last in [0, zl)
            // maps to offsets [m - zl, m).
            let (lo_v, hi_v) = vals.split_at_mut(zl);
            let (lo_a, hi_a) = alive.split_at(zl);
            for ((w, &live), &k) in hi_v.iter_mut().zip(hi_a).zip(&krow_vals[..m - zl]) {
                *w = *w + live * k;
            }
            for ((w, &live), &k) in lo_v.iter_mut().zip(lo_a).zip(&krow_vals[m - zl..]) {
                *w = *w + live * k;
            }
            let mut row_sum = F::zero();
            for &w in vals.iter() {
                row_sum = row_sum + w;
                max = max.max(w);
            }
            total.add(row_sum);
        }
        self.total = total.value();
        self.max = max;
        Ok(())
    }

    /// Fresh compensated re-summation of all weights.
    pub fn resum(&self) -> F {
        compensated_sum(self.values.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{sites_by_distance, torus_norm, NormIndex};

    fn cfg(d: usize, m: usize, p: NormIndex<f64>, alpha: f64) -> TorusConfig<f64> {
        TorusConfig::for_lattice_sums(d, m, p, alpha).unwrap()
    }

    #[test]
    fn rn_with_zero_alpha_counts_sites() {
        for (d, m) in [(1, 7), (2, 5), (3, 4)] {
            let c = cfg(d, m, NormIndex::Two, 0.0);
            assert_eq!(compute_rn(&c).unwrap(), (c.volume() - 1) as f64);
        }
    }

    #[test]
    fn rn_hand_enumeration() {
        let c = cfg(1, 5, NormIndex::Two, 1.0);
        assert!((compute_rn(&c).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn nearest_sums() {
        let c = cfg(1, 5, NormIndex::Two, 1.0);
        assert!((compute_rk_nearest(&c, 2).unwrap() - 2.0).abs() < 1e-15);
        let c = cfg(2, 6, NormIndex::One, 0.7);
        let full = compute_rk_nearest(&c, c.volume() - 1).unwrap();
        assert!((full - compute_rn(&c).unwrap()).abs() < 1e-12);
        let c0 = cfg(2, 6, NormIndex::Infinity, 0.0);
        for k in [1, 5, 35] {
            assert_eq!(compute_rk_nearest(&c0, k).unwrap(), k as f64);
        }
        assert!(compute_rk_nearest(&c0, 0).is_err());
        assert!(compute_rk_nearest(&c0, 36).is_err());
    }

    #[test]
    fn nearest_sums_follow_site_order() {
        let c = cfg(2, 7, NormIndex::Two, 1.3);
        let list = sites_by_distance(&c).unwrap();
        let table = NearestSums::from_config(&c).unwrap();
        let mut acc = 0.0;
        for (k, (_, r)) in list.iter().enumerate() {
            acc += r.powf(-1.3);
            assert!((table.get(k + 1).unwrap() - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn small_torus_diagnostic() {
        let c = cfg(2, 16, NormIndex::Two, 0.0);
        assert_eq!(rn_small_torus(&c, 16).unwrap(), 15.0);
        assert_eq!(rn_small_torus(&c, 24).unwrap(), 15.0);
        assert_eq!(rn_small_torus(&c, 3).unwrap(), 0.0);
    }

    #[test]
    fn init_total_is_rn() {
        let c = cfg(2, 9, NormIndex::Two, 1.2);
        let src = c.canonicalize(&[3, -2]).unwrap();
        let f = WeightField::init(&src, &c).unwrap();
        assert!((f.total() - compute_rn(&c).unwrap()).abs() < 1e-12);
        for i in 0..c.volume() {
            let s = c.site(i);
            let diff: Vec<i64> = s.coords().iter().zip(src.coords()).map(|(a, b)| a - b).collect();
            let expect = if s == src {
                0.0
            } else {
                torus_norm(&c.canonicalize(&diff).unwrap(), &c).powf(-1.2)
            };
            assert!((f.weight(i) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn janson_rates_at_zero_alpha() {
        let c = cfg(2, 6, NormIndex::Two, 0.0);
        let n = c.volume();
        let mut f = WeightField::init(&Site::origin(2), &c).unwrap();
        assert_eq!(f.total(), (n - 1) as f64);
        for (j, z) in (2..=n - 1).zip([7usize, 3, 35, 20, 1, 14, 8]) {
            f.discover_index(z).unwrap();
            assert_eq!(f.total(), (j * (n - j)) as f64);
        }
    }

    #[test]
    fn exhaustion_leaves_empty_field() {
        let c = cfg(1, 3, NormIndex::Two, 1.0);
        let mut f = WeightField::init(&Site::origin(1), &c).unwrap();
        f.discover(&c.canonicalize(&[1]).unwrap()).unwrap();
        f.discover(&c.canonicalize(&[-1]).unwrap()).unwrap();
        assert_eq!(f.undiscovered_count(), 0);
        assert_eq!(f.total(), 0.0);
        assert!(f.values().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn rediscovery_is_an_error() {
        let c = cfg(2, 4, NormIndex::Two, 0.5);
        let mut f = WeightField::init(&Site::origin(2), &c).unwrap();
        assert_eq!(f.discover_index(0), Err(Error::AlreadyDiscovered(0)));
        f.discover_index(5).unwrap();
        assert_eq!(f.discover_index(5), Err(Error::AlreadyDiscovered(5)));
    }

    #[test]
    fn field_matches_direct_sum_and_bounds() {
        let c = cfg(2, 12, NormIndex::Infinity, 1.4);
        let n = c.volume();
        let kernel = Kernel::new(&c).unwrap();
        let nearest = NearestSums::new(&kernel);
        let rn = nearest.full();
        let mut f = WeightField::init(&Site::origin(2), &c).unwrap();
        let mut order: Vec<usize> = (1..n).collect();
        // Deterministic scramble.
        order.sort_by_key(|&i| (i * 7919) % n);
        for (step, &z) in order.iter().take(120).enumerate() {
            let j = step + 1;
            let lam = f.total();
            let rj = nearest.get(j).unwrap();
            assert!(j as f64 * (rn - rj) <= lam * (1.0 + 1e-12));
            assert!(lam <= j as f64 * rn * (1.0 + 1e-12));
            f.discover_index(z).unwrap();
            if (step + 1) % 40 == 0 {
                let resum = f.resum();
                assert!((f.total() - resum).abs() <= 1e-9 * n as f64);
                for y in 0..n {
                    let expect = if f.is_discovered(y) {
                        0.0
                    } else {
                        f.discovered()
                            .iter()
                            .map(|&v| kernel.at(c.difference_index(y, v)))
                            .sum::<f64>()
                    };
                    assert!((f.weight(y) - expect).abs() < 1e-11);
                    if !f.is_discovered(y) {
                        assert!(f.weight(y) > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn discovery_order_does_not_matter() {
        let c = cfg(3, 5, NormIndex::Finite(1.5), 2.1);
        let mut a = WeightField::init(&Site::origin(3), &c).unwrap();
        let mut b = a.clone();
        a.discover_index(17).unwrap();
        a.discover_index(88).unwrap();
        b.discover_index(88).unwrap();
        b.discover_index(17).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_precision_field() {
        let c = TorusConfig::<f32>::new(2, 8, NormIndex::Two, 0.5).unwrap();
        let f = WeightField::init(&Site::origin(2), &c).unwrap();
        let rn64 = compute_rn(&cfg(2, 8, NormIndex::Two, 0.5)).unwrap();
        assert!((f.total() as f64 - rn64).abs() < 1e-4 * rn64);
    }
}
