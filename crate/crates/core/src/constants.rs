//! The limiting constant `R(d, p, α) = lim R_n / n^{1-α/d}`, evaluated four
//! independent ways: adaptive cubature of `2^α ∫_{[0,1]^d} ||y||_p^{-α} dy`,
//! the closed form for the max norm, the `₂F₁` closed form in two dimensions,
//! and a Monte Carlo estimate over maxima of Gamma variates.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::integrate_boxes;
use crate::rng::{derive_seed, GammaSmallShape, RunRng};
use crate::scalar::Real;
use crate::special::{gamma, hyp2f1};
use crate::torus::NormIndex;

/// Highest dimension handled by the cubature route.
pub const MAX_QUADRATURE_DIM: usize = 4;
/// Default evaluation budget of the cubature route.
pub const DEFAULT_MAX_EVALS: usize = 40_000_000;
/// Per-axis pre-split fractions `frac((a + 1)·φ)`.
const PRESPLIT: [f64; MAX_QUADRATURE_DIM] = [0.618_033_988_749_895, 0.236_067_977_499_79, 0.854_101_966_249_685, 0.472_135_954_999_58];
/// Smallest Monte Carlo sample size accepted.
pub const MIN_MC_SAMPLES: usize = 10_000;
/// The Monte Carlo route always splits its draws into this many shards.
pub const MC_SHARDS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Quadrature,
    ClosedPInfinity,
    HypergeometricD2,
    GammaMaxMc,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Quadrature,
        Method::ClosedPInfinity,
        Method::HypergeometricD2,
        Method::GammaMaxMc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::ClosedPInfinity => "closed-p-infinity",
            Method::HypergeometricD2 => "hypergeometric-d2",
            Method::GammaMaxMc => "gamma-max-mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown constant method {s:?}")))
    }
}

/// One evaluation request.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantQuery<F> {
    pub d: usize,
    pub p: NormIndex<F>,
    pub alpha: F,
    pub method: Method,
    /// Target absolute error (cubature only).
    pub tolerance: F,
    /// Monte Carlo sample count.
    pub samples: usize,
    pub seed: u64,
}

impl<F: Real> ConstantQuery<F> {
    pub fn new(d: usize, p: NormIndex<F>, alpha: F, method: Method) -> Self {
        Self {
            d,
            p,
            alpha,
            method,
            tolerance: F::lit(1e-10),
            samples: 1_000_000,
            seed: 0,
        }
    }

    /// Checks the parameter constraints of the selected method.
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidConfig("dimension d must be >= 1".into()));
        }
        if !(self.alpha >= F::zero()) || self.alpha >= F::from_count(self.d) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in [0, d), got alpha = {}, d = {}",
                self.alpha, self.d
            )));
        }
        let not_applicable = |reason: String| Error::MethodNotApplicable {
            method: self.method.name(),
            reason,
        };
        match self.method {
            Method::Quadrature => {
                if self.d > MAX_QUADRATURE_DIM {
                    return Err(not_applicable(format!("d = {} exceeds {MAX_QUADRATURE_DIM}", self.d)));
                }
                if !(self.tolerance > F::zero()) {
                    return Err(not_applicable("tolerance must be positive".into()));
                }
            }
            Method::ClosedPInfinity => {
                if !self.p.is_infinite() {
                    return Err(not_applicable("requires p = inf".into()));
                }
            }
            Method::HypergeometricD2 => {
                if self.d != 2 {
                    return Err(not_applicable("requires d = 2".into()));
                }
                if self.p.is_infinite() {
                    return Err(not_applicable("requires finite p".into()));
                }
            }
            Method::GammaMaxMc => {
                if self.p.is_infinite() {
                    return Err(not_applicable("requires finite p".into()));
                }
                if self.alpha == F::zero() {
                    return Err(not_applicable("requires alpha > 0".into()));
                }
                if self.samples < MIN_MC_SAMPLES {
                    return Err(not_applicable(format!(
                        "needs at least {MIN_MC_SAMPLES} samples, got {}",
                        self.samples
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A value with its error estimate.
///
/// For cubature `error` is the absolute error estimate; for Monte Carlo it is
/// the standard error, and `effective_samples` is `(Σx)² / Σx²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantEstimate<F> {
    pub value: F,
    pub error: F,
    pub converged: bool,
    pub effective_samples: Option<F>,
}

impl<F: Real> ConstantEstimate<F> {
    fn exact(value: F) -> Self {
        Self {
            value,
            error: F::zero(),
            converged: true,
            effective_samples: None,
        }
    }
}

/// Dispatches on `q.method`.
pub fn evaluate<F: Real>(q: &ConstantQuery<F>) -> Result<ConstantEstimate<F>> {
    q.validate()?;
    match q.method {
        Method::Quadrature => r_quadrature(q),
        Method::ClosedPInfinity => Ok(ConstantEstimate::exact(r_closed_pinf(q.d, q.alpha)?)),
        Method::HypergeometricD2 => Ok(ConstantEstimate::exact(r_hypergeom_d2(q.p.value(), q.alpha)?)),
        Method::GammaMaxMc => r_gamma_max_mc(q.d, q.p.value(), q.alpha, q.samples, q.seed),
    }
}

/// Cubature of `2^α ∫_{[0,1]^d} ||y||_p^{-α} dy`.
///
/// The integrand is homogeneous of degree `-α`, so with `S` the shell
/// `[0,1]^d \ [0,1/2]^d` the cube integral is `∫_S / (1 - 2^{α-d})`: the
/// geometric refinement toward the origin sums in closed form and only the
/// `2^d - 1` bounded subcubes of `S` need numerical work.
pub fn r_quadrature<F: Real>(q: &ConstantQuery<F>) -> Result<ConstantEstimate<F>> {
    r_quadrature_with_budget(q, DEFAULT_MAX_EVALS)
}

pub fn r_quadrature_with_budget<F: Real>(q: &ConstantQuery<F>, max_evals: usize) -> Result<ConstantEstimate<F>> {
    let q = ConstantQuery {
        method: Method::Quadrature,
        ..q.clone()
    };
    q.validate()?;
    if q.alpha == F::zero() {
        return Ok(ConstantEstimate::exact(F::one()));
    }
    let d = q.d;
    let two = F::lit(2.0);
    let half = F::lit(0.5);
    let closure = F::one() - two.powf(q.alpha - F::from_count(d));
    let scale = two.powf(q.alpha) / closure;

    let mut boxes: Vec<(Vec<F>, Vec<F>)> = Vec::new();
    for mask in 1..(1usize << d) {
        let lo: Vec<F> = (0..d)
            .map(|a| if mask >> a & 1 == 1 { half } else { F::zero() })
            .collect();
        let hi: Vec<F> = lo.iter().map(|&x| x + half).collect();
        // Axes sharing an interval make the box symmetric under swapping
        // them; the max-norm kink y_i = y_j then runs through the tensor
        // nodes, where Kronrod and Gauss err alike. Cutting those axes at
        // distinct fractions breaks the symmetry.
        let split: Vec<usize> = (0..d)
            .filter(|&a| (0..d).any(|b| b != a && (mask >> a & 1) == (mask >> b & 1)))
            .collect();
        for code in 0..(1usize << split.len()) {
            let (mut l, mut h) = (lo.clone(), hi.clone());
            for (bit, &a) in split.iter().enumerate() {
                let cut = lo[a] + half * F::lit(PRESPLIT[a]);
                if code >> bit & 1 == 1 {
                    l[a] = cut;
                } else {
                    h[a] = cut;
                }
            }
            boxes.push((l, h));
        }
    }
    let norm = q.p;
    let alpha = q.alpha;
    let integrand = |y: &[F]| norm.compose(y.iter().copied()).powf(-alpha);
    let res = integrate_boxes(integrand, &boxes, q.tolerance / scale, max_evals);
    Ok(ConstantEstimate {
        value: res.value * scale,
        error: res.error * scale,
        converged: res.converged,
        effective_samples: None,
    })
}

/// `R(d, ∞, α) = d/(d-α) · 2^α`.
pub fn r_closed_pinf<F: Real>(d: usize, alpha: F) -> Result<F> {
    let df = F::from_count(d);
    if d == 0 || !(alpha >= F::zero()) || alpha >= df {
        return Err(Error::InvalidConfig(format!("need 0 <= alpha < d, got alpha = {alpha}, d = {d}")));
    }
    Ok(df / (df - alpha) * F::lit(2.0).powf(alpha))
}

/// `R(2, p, α) = 2^{1+α(1-1/p)}/(2-α) · ₂F₁(1, α/p; 1+1/p; 1/2)` for finite
/// `p ≥ 1` and `α ∈ [0, 2)`.
pub fn r_hypergeom_d2<F: Real>(p: F, alpha: F) -> Result<F> {
    let two = F::lit(2.0);
    if !(p >= F::one()) || !p.is_finite() {
        return Err(Error::InvalidConfig(format!("need finite p >= 1, got {p}")));
    }
    if !(alpha >= F::zero()) || alpha >= two {
        return Err(Error::InvalidConfig(format!("need 0 <= alpha < 2, got {alpha}")));
    }
    let inv_p = p.recip();
    let series = hyp2f1(F::one(), alpha * inv_p, F::one() + inv_p, F::lit(0.5))?;
    let prefactor = two.powf(F::one() + alpha * (F::one() - inv_p)) / (two - alpha);
    Ok(prefactor * series)
}

#[derive(Debug, Clone, Copy)]
struct Moments<F> {
    count: usize,
    mean: F,
    m2: F,
    sum: F,
    sum_sq: F,
}

impl<F: Real> Moments<F> {
    fn new() -> Self {
        Self {
            count: 0,
            mean: F::zero(),
            m2: F::zero(),
            sum: F::zero(),
            sum_sq: F::zero(),
        }
    }

    fn push(&mut self, x: F) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean = self.mean + delta / F::from_count(self.count);
        self.m2 = self.m2 + delta * (x - self.mean);
        self.sum = self.sum + x;
        self.sum_sq = self.sum_sq + x * x;
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let (na, nb, n) = (
            F::from_count(self.count),
            F::from_count(other.count),
            F::from_count(count),
        );
        let delta = other.mean - self.mean;
        Self {
            count,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }
}

/// Monte Carlo estimate of
/// `2^α Γ(1/p)^d p^{-(d-1)} / (Γ(α/p)(d-α)) · E[M^{(α-d)/p}]`, with `M` the
/// maximum of `d` i.i.d. `Gamma(1/p, 1)` variates.
///
/// The summand `M^{(α-d)/p}` has tail index `d/(d-α)` and so infinite variance
/// whenever `α ≤ d/2`; the returned standard error is then only indicative.
/// Draws are split into [`MC_SHARDS`] shards with seeds derived from `seed`
/// and merged in shard order, so the result is independent of thread count.
pub fn r_gamma_max_mc<F: Real>(d: usize, p: F, alpha: F, samples: usize, seed: u64) -> Result<ConstantEstimate<F>> {
    let df = F::from_count(d);
    if d == 0 || !(alpha > F::zero()) || alpha >= df {
        return Err(Error::InvalidConfig(format!("need 0 < alpha < d, got alpha = {alpha}, d = {d}")));
    }
    if !(p >= F::one()) || !p.is_finite() {
        return Err(Error::InvalidConfig(format!("need finite p >= 1, got {p}")));
    }
    if samples < MIN_MC_SAMPLES {
        return Err(Error::TooFewSamples {
            need: MIN_MC_SAMPLES,
            got: samples,
        });
    }
    let shape = p.recip();
    let sampler = GammaSmallShape::new(shape).expect("shape 1/p in (0, 1]");
    let exponent = (alpha - df) / p;

    let shards: Vec<Moments<F>> = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = samples / MC_SHARDS + usize::from(shard < samples % MC_SHARDS);
            let mut rng = RunRng::new(derive_seed(seed, &[shard as u64]));
            let mut acc = Moments::new();
            for _ in 0..count {
                let mut max = F::zero();
                for _ in 0..d {
                    max = max.max(sampler.sample(&mut rng));
                }
                acc.push(max.powf(exponent));
            }
            acc
        })
        .collect();
    let total = shards.into_iter().fold(Moments::new(), Moments::merge);

    let n = F::from_count(total.count);
    let var = total.m2 / (n - F::one());
    let prefactor = F::lit(2.0).powf(alpha) * gamma(shape).powi(d as i32) * p.powi(-(d as i32 - 1))
        / (gamma(alpha / p) * (df - alpha));
    Ok(ConstantEstimate {
        value: prefactor * total.mean,
        error: prefactor * (var / n).sqrt(),
        converged: true,
        effective_samples: Some(total.sum * total.sum / total.sum_sq),
    })
}
