//! Geometry of the discrete torus `{0, …, m-1}^d` under the equivalence
//! `x ~ x + m·Z^d`.
//!
//! Sites are stored internally as a row-major index into the residue cube, so
//! the last coordinate varies fastest. The user-facing [`Site`] carries
//! canonical coordinates in the window `[-⌊m/2⌋, ⌈m/2⌉ - 1]`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest torus for which [`sites_by_distance`] materialises the full list.
pub const SITE_LIST_CAP: usize = 1 << 22;

/// Index `p` of the norm used on the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormIndex<F> {
    One,
    Two,
    Finite(F),
    Infinity,
}

impl<F: Real> NormIndex<F> {
    /// Builds a norm index, normalising `1`, `2` and `+∞` to their fast paths.
    pub fn new(p: F) -> Result<Self> {
        if p.is_nan() || p < F::one() {
            return Err(Error::InvalidConfig(format!("norm index p must be >= 1, got {p}")));
        }
        Ok(if p.is_infinite() {
            NormIndex::Infinity
        } else if p == F::one() {
            NormIndex::One
        } else if p == F::lit(2.0) {
            NormIndex::Two
        } else {
            NormIndex::Finite(p)
        })
    }

    /// The numeric value of `p`; `+∞` for the max norm.
    pub fn value(&self) -> F {
        match *self {
            NormIndex::One => F::one(),
            NormIndex::Two => F::lit(2.0),
            NormIndex::Finite(p) => p,
            NormIndex::Infinity => F::infinity(),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, NormIndex::Infinity)
    }

    /// Composes nonnegative coordinate magnitudes into the `p`-norm.
    #[inline]
    pub fn compose<I: IntoIterator<Item = F>>(&self, magnitudes: I) -> F {
        let it = magnitudes.into_iter();
        match *self {
            NormIndex::One => it.fold(F::zero(), |acc, a| acc + a),
            NormIndex::Two => it.fold(F::zero(), |acc, a| acc + a * a).sqrt(),
            NormIndex::Infinity => it.fold(F::zero(), |acc, a| acc.max(a)),
            NormIndex::Finite(p) => {
                // Scale by the largest magnitude so the power sum cannot overflow.
                let mags: Vec<F> = it.collect();
                let top = mags.iter().fold(F::zero(), |acc, &a| acc.max(a));
                if top == F::zero() {
                    return F::zero();
                }
                let s: F = mags.iter().map(|&a| (a / top).powf(p)).sum();
                top * s.powf(p.recip())
            }
        }
    }
}

impl<F: Real> fmt::Display for NormIndex<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormIndex::One => write!(f, "1"),
            NormIndex::Two => write!(f, "2"),
            NormIndex::Finite(p) => write!(f, "{p}"),
            NormIndex::Infinity => write!(f, "inf"),
        }
    }
}

impl<F: Real> FromStr for NormIndex<F> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if matches!(t.as_str(), "inf" | "infinity" | "∞" | "max") {
            return Ok(NormIndex::Infinity);
        }
        let p: f64 = t
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("cannot parse norm index {s:?}")))?;
        NormIndex::new(F::lit(p))
    }
}

/// A lattice point with canonical coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    coords: Vec<i64>,
}

impl Site {
    pub fn origin(d: usize) -> Self {
        Site { coords: vec![0; d] }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Parameters of the model: dimension `d`, side `m` (volume `n = m^d`), norm
/// index `p` and long-range exponent `alpha ∈ [0, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusConfig<F> {
    d: usize,
    m: usize,
    n: usize,
    p: NormIndex<F>,
    alpha: F,
}

impl<F: Real> TorusConfig<F> {
    pub fn new(d: usize, m: usize, p: NormIndex<F>, alpha: F) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("dimension d must be >= 1".into()));
        }
        if m < 2 {
            return Err(Error::InvalidConfig(format!("side length m must be >= 2, got {m}")));
        }
        if !alpha.is_finite() || alpha < F::zero() {
            return Err(Error::InvalidConfig(format!("alpha must be >= 0, got {alpha}")));
        }
        if alpha >= F::from_count(d) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be < d (long-range exponent restricted to [0, d)), got alpha = {alpha}, d = {d}"
            )));
        }
        if let NormIndex::Finite(p) = p {
            if !(p >= F::one()) {
                return Err(Error::InvalidConfig(format!("norm index p must be >= 1, got {p}")));
            }
        }
        let exp = u32::try_from(d).map_err(|_| Error::VolumeOverflow { m, d })?;
        let n = m.checked_pow(exp).ok_or(Error::VolumeOverflow { m, d })?;
        // Pair keys pack two site indices into 64 bits.
        if n > u32::MAX as usize {
            return Err(Error::VolumeOverflow { m, d });
        }
        Ok(Self { d, m, n, p, alpha })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        self.m
    }

    /// Volume `n = m^d`.
    pub fn volume(&self) -> usize {
        self.n
    }

    pub fn norm_index(&self) -> NormIndex<F> {
        self.p
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    /// Torus on which only finite-volume sums are taken, so any `alpha >= 0`
    /// is admitted. Model-level routines require [`TorusConfig::new`].
    pub fn for_lattice_sums(d: usize, m: usize, p: NormIndex<F>, alpha: F) -> Result<Self> {
        let probe = Self::new(d, m, p, F::zero())?;
        if !alpha.is_finite() || alpha < F::zero() {
            return Err(Error::InvalidConfig(format!("alpha must be >= 0, got {alpha}")));
        }
        Ok(Self { alpha, ..probe })
    }

    /// Same torus with a different exponent.
    pub fn with_alpha(&self, alpha: F) -> Result<Self> {
        Self::new(self.d, self.m, self.p, alpha)
    }

    /// Same geometry with a different side length.
    pub fn with_side(&self, m: usize) -> Result<Self> {
        Self::new(self.d, m, self.p, self.alpha)
    }

    /// Reduces arbitrary integer coordinates to the canonical window.
    pub fn canonicalize(&self, coords: &[i64]) -> Result<Site> {
        self.check_dim(coords)?;
        let m = self.m as i64;
        let hi = (self.m as i64 + 1) / 2 - 1;
        let coords = coords
            .iter()
            .map(|&x| {
                let r = x.rem_euclid(m);
                if r > hi {
                    r - m
                } else {
                    r
                }
            })
            .collect();
        Ok(Site { coords })
    }

    /// Row-major index of the residue class of `coords`.
    pub fn index_of(&self, coords: &[i64]) -> Result<usize> {
        self.check_dim(coords)?;
        let m = self.m as i64;
        Ok(coords
            .iter()
            .fold(0usize, |acc, &x| acc * self.m + x.rem_euclid(m) as usize))
    }

    /// Canonical site of a row-major index.
    pub fn site(&self, index: usize) -> Site {
        debug_assert!(index < self.n);
        let hi = (self.m + 1) / 2 - 1;
        let mut coords = vec![0i64; self.d];
        let mut rest = index;
        for c in coords.iter_mut().rev() {
            let r = rest % self.m;
            rest /= self.m;
            *c = if r > hi { r as i64 - self.m as i64 } else { r as i64 };
        }
        Site { coords }
    }

    /// Index of the residue class of `site(a) - site(b)`.
    pub fn difference_index(&self, a: usize, b: usize) -> usize {
        let (mut ra, mut rb) = (a, b);
        let mut out = 0usize;
        let mut stride = 1usize;
        for _ in 0..self.d {
            let (xa, xb) = (ra % self.m, rb % self.m);
            ra /= self.m;
            rb /= self.m;
            out += ((xa + self.m - xb) % self.m) * stride;
            stride *= self.m;
        }
        out
    }

    /// Torus norm of the residue class with the given index.
    pub fn norm_of_index(&self, index: usize) -> F {
        let mut rest = index;
        let m = self.m;
        let mut mags = vec![F::zero(); self.d];
        for a in mags.iter_mut().rev() {
            let r = rest % m;
            rest /= m;
            *a = F::from_count(r.min(m - r));
        }
        self.p.compose(mags)
    }

    fn check_dim(&self, coords: &[i64]) -> Result<()> {
        if coords.len() != self.d {
            return Err(Error::DimensionMismatch {
                coords: coords.to_vec(),
                d: self.d,
            });
        }
        Ok(())
    }
}

/// Torus `p`-norm: the minimal `p`-norm over all integer representatives,
/// computed coordinate-wise from the minimal absolute residue.
pub fn torus_norm<F: Real>(u: &Site, cfg: &TorusConfig<F>) -> F {
    let m = cfg.side() as i64;
    let mags = u.coords().iter().map(|&x| {
        let r = x.rem_euclid(m);
        F::from_count(r.min(m - r) as usize)
    });
    cfg.norm_index().compose(mags)
}

/// All `n - 1` nonzero sites sorted by torus norm, ties broken by
/// lexicographic canonical coordinates.
pub fn sites_by_distance<F: Real>(cfg: &TorusConfig<F>) -> Result<Vec<(Site, F)>> {
    let n = cfg.volume();
    if n > SITE_LIST_CAP {
        return Err(Error::TooLarge {
            what: "site enumeration",
            n,
            cap: SITE_LIST_CAP,
        });
    }
    let mut out: Vec<(Site, F)> = (1..n)
        .map(|i| (cfg.site(i), cfg.norm_of_index(i)))
        .collect();
    out.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(out)
}
