//! Monte Carlo estimators over replicate runs, and Kolmogorov–Smirnov tests.
//!
//! Replicate `r` of an experiment draws everything from seeds derived from
//! `(root_seed, r)`, and results are gathered in replicate order, so the
//! output does not depend on how many threads rayon uses.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::explore::{dijkstra_oracle, ExploreOptions, Explorer, OracleRealization, Selection, StopRule};
use crate::rng::{derive_seed, RunRng};
use crate::torus::{Site, TorusConfig};

/// Euler–Mascheroni constant, the mean of the standard Gumbel law.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const KS_MIN_SAMPLES: usize = 30;
const KOLMOGOROV_TRUNCATION: f64 = 1e-8;

/// Which `τ_k` a fluctuation study looks at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauIndex {
    Count(usize),
    /// `k = ⌊n^β⌋`.
    Exponent(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Typical,
    Flooding,
    Diameter,
    Tau(TauIndex),
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Typical => "typical",
            Quantity::Flooding => "flooding",
            Quantity::Diameter => "diameter",
            Quantity::Tau(_) => "tau",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub cfg: TorusConfig<f64>,
    pub replicates: usize,
    pub root_seed: u64,
    pub quantity: Quantity,
    /// Fixed source. `None` means uniform for typical distances and the
    /// origin otherwise.
    pub source: Option<Site>,
    /// Fixed target for typical distances; uniform distinct from the source
    /// when `None`.
    pub target: Option<Site>,
    pub selection: Selection,
}

impl ExperimentSpec {
    pub fn new(cfg: TorusConfig<f64>, replicates: usize, root_seed: u64, quantity: Quantity) -> Result<Self> {
        let spec = Self {
            cfg,
            replicates,
            root_seed,
            quantity,
            source: None,
            target: None,
            selection: Selection::Scan,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_source(mut self, source: Site) -> Result<Self> {
        self.source = Some(source);
        self.validate()?;
        Ok(self)
    }

    pub fn with_target(mut self, target: Site) -> Result<Self> {
        self.target = Some(target);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be >= 1".into()));
        }
        for s in self.source.iter().chain(&self.target) {
            self.cfg.index_of(s.coords())?;
        }
        if let (Some(u), Some(v)) = (&self.source, &self.target) {
            if self.cfg.index_of(u.coords())? == self.cfg.index_of(v.coords())? {
                return Err(Error::InvalidConfig("source and target coincide".into()));
            }
        }
        if let Quantity::Tau(t) = self.quantity {
            self.tau_k_for(t)?;
        }
        Ok(())
    }

    fn tau_k_for(&self, t: TauIndex) -> Result<usize> {
        let n = self.cfg.volume();
        let k = match t {
            TauIndex::Count(k) => k,
            TauIndex::Exponent(beta) => {
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(Error::OutOfRange {
                        what: "beta",
                        value: beta.to_string(),
                        range: "(0, 1)".into(),
                    });
                }
                (n as f64).powf(beta).floor() as usize
            }
        };
        if k == 0 || k > n - 1 {
            return Err(Error::OutOfRange {
                what: "k",
                value: k.to_string(),
                range: format!("[1, {}]", n - 1),
            });
        }
        Ok(k)
    }

    /// The `k` of a fluctuation study.
    pub fn tau_k(&self) -> Result<usize> {
        match self.quantity {
            Quantity::Tau(t) => self.tau_k_for(t),
            _ => Err(Error::MethodNotApplicable {
                method: self.quantity.name().into(),
                reason: "not a fluctuation study".into(),
            }),
        }
    }

    /// Seed of replicate `r`.
    pub fn replicate_seed(&self, r: usize) -> u64 {
        derive_seed(self.root_seed, &[r as u64])
    }

    // (u, v) of replicate r, the target only when asked for.
    fn endpoints(&self, r: usize, want_target: bool, default_uniform_source: bool) -> (usize, Option<usize>) {
        let mut rng = RunRng::new(derive_seed(self.replicate_seed(r), &[1]));
        let cfg = &self.cfg;
        let fixed = |s: &Option<Site>| s.as_ref().map(|s| cfg.index_of(s.coords()).expect("validated"));
        let u = fixed(&self.source).unwrap_or_else(|| if default_uniform_source { uniform_site(cfg, &mut rng) } else { 0 });
        let v = want_target.then(|| {
            fixed(&self.target).unwrap_or_else(|| loop {
                let v = uniform_site(cfg, &mut rng);
                if v != u {
                    break v;
                }
            })
        });
        (u, v)
    }
}

/// A uniform site index, one uniform coordinate per axis.
pub fn uniform_site(cfg: &TorusConfig<f64>, rng: &mut RunRng) -> usize {
    let m = cfg.side() as u64;
    (0..cfg.dim()).fold(0usize, |acc, _| acc * m as usize + rng.below(m) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatSummary {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub se: f64,
    /// 5, 25, 50, 75 and 95% sample quantiles.
    pub quantiles: [f64; 5],
    /// `mean · R_n / ln n`, when the quantity has a scaling limit.
    pub scaled_mean: Option<f64>,
    /// `se · R_n / ln n`, alongside `scaled_mean`.
    pub scaled_se: Option<f64>,
    pub ks: Option<KsResult>,
}

pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

impl StatSummary {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        let k = samples.len();
        let mean = samples.iter().sum::<f64>() / k as f64;
        let se = if k > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        } else {
            f64::NAN
        };
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        let quantiles = QUANTILE_LEVELS.map(|q| quantile_sorted(&sorted, q));
        Self {
            samples,
            mean,
            se,
            quantiles,
            scaled_mean: None,
            scaled_se: None,
            ks: None,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scaled_mean = Some(self.mean * scale);
        self.scaled_se = Some(self.se * scale);
        self
    }
}

/// Type 7 (linear interpolation) quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `R_n / ln n`, the normalisation of the first-passage times.
pub fn time_scale(cfg: &TorusConfig<f64>) -> Result<f64> {
    Ok(crate::weights::compute_rn(cfg)? / (cfg.volume() as f64).ln())
}

fn explorer_for(spec: &ExperimentSpec) -> Result<Explorer<f64>> {
    Ok(Explorer::new(&spec.cfg)?.with_options(ExploreOptions {
        selection: spec.selection,
        check_rate_bounds: true,
    }))
}

/// Raw replicate values of a typical, flooding or diameter experiment.
pub fn replicate_values(spec: &ExperimentSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    match spec.quantity {
        Quantity::Typical => {
            let ex = explorer_for(spec)?;
            par_replicates(spec.replicates, |r| {
                let (u, v) = spec.endpoints(r, true, true);
                let target = StopRule::Target(spec.cfg.site(v.expect("target")));
                Ok(ex.run_from(u, &target, derive_seed(spec.replicate_seed(r), &[0]))?.last_time())
            })
        }
        Quantity::Flooding => {
            let ex = explorer_for(spec)?;
            par_replicates(spec.replicates, |r| {
                let (u, _) = spec.endpoints(r, false, false);
                Ok(ex.run_from(u, &StopRule::Full, derive_seed(spec.replicate_seed(r), &[0]))?.last_time())
            })
        }
        Quantity::Diameter => par_replicates(spec.replicates, |r| {
            Ok(OracleRealization::new(&spec.cfg, derive_seed(spec.replicate_seed(r), &[0]))?.diameter())
        }),
        Quantity::Tau(_) => Err(Error::MethodNotApplicable {
            method: "tau".into(),
            reason: "use gumbel_test".into(),
        }),
    }
}

fn par_replicates<G>(reps: usize, f: G) -> Result<Vec<f64>>
where
    G: Fn(usize) -> Result<f64> + Sync + Send,
{
    let out: Vec<Result<f64>> = (0..reps).into_par_iter().map(f).collect();
    out.into_iter().collect()
}

/// Replicates of typical distance, flooding time or diameter, with
/// `scaled_mean = mean · R_n / ln n`.
pub fn estimate_scaled(spec: &ExperimentSpec) -> Result<StatSummary> {
    let values = replicate_values(spec)?;
    Ok(StatSummary::from_samples(values).with_scale(time_scale(&spec.cfg)?))
}

/// Typical distance, flooding time from the source and diameter, all on one
/// weight realisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleTriple {
    pub typical: f64,
    pub flooding: f64,
    pub diameter: f64,
}

/// One [`OracleTriple`] per replicate. The endpoints follow the same
/// choice as a typical-distance experiment.
pub fn oracle_triples(spec: &ExperimentSpec) -> Result<Vec<OracleTriple>> {
    spec.validate()?;
    let out: Vec<Result<OracleTriple>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let (u, v) = spec.endpoints(r, true, true);
            let real = OracleRealization::new(&spec.cfg, derive_seed(spec.replicate_seed(r), &[0]))?;
            let from_u = real.distances_from(u);
            Ok(OracleTriple {
                typical: from_u[v.expect("target")],
                flooding: from_u.iter().cloned().fold(0.0, f64::max),
                diameter: real.diameter(),
            })
        })
        .collect();
    out.into_iter().collect()
}

/// `X_{U,V}` by single-source Dijkstra on a fresh realisation per replicate,
/// with the endpoints of a typical-distance experiment.
pub fn oracle_typical(spec: &ExperimentSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    par_replicates(spec.replicates, |r| {
        let (u, v) = spec.endpoints(r, true, true);
        let dist = dijkstra_oracle(&spec.cfg.site(u), &spec.cfg, derive_seed(spec.replicate_seed(r), &[0]))?;
        Ok(dist[v.expect("target")])
    })
}

/// Fluctuations of `R_n τ_k - ln k` against the standard Gumbel law.
///
/// The summary holds the centred samples, KS against `exp(-e^{-x})`, and as
/// `scaled_mean` the mean of `τ_k R_n / ln n`.
pub fn gumbel_test(spec: &ExperimentSpec) -> Result<StatSummary> {
    spec.validate()?;
    let k = spec.tau_k()?;
    if k < 2 {
        return Err(Error::OutOfRange {
            what: "k",
            value: k.to_string(),
            range: format!("[2, {}]", spec.cfg.volume() - 1),
        });
    }
    let ex = explorer_for(spec)?;
    let rn = ex.rn();
    let ln_k = (k as f64).ln();
    let ln_n = (spec.cfg.volume() as f64).ln();
    let centred = par_replicates(spec.replicates, |r| {
        let (u, _) = spec.endpoints(r, false, false);
        let rec = ex.run_from(u, &StopRule::Count(k), derive_seed(spec.replicate_seed(r), &[0]))?;
        Ok(rn * rec.tau(k).expect("k births") - ln_k)
    })?;
    let ks = ks_one_sample(&centred, gumbel_cdf).ok();
    let mut s = StatSummary::from_samples(centred);
    s.scaled_mean = Some((s.mean + ln_k) / ln_n);
    s.scaled_se = Some(s.se / ln_n);
    s.ks = ks;
    Ok(s)
}

pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K ≤ λ) = √(2π)/λ Σ exp(-(2j-1)²π²/(8λ²)), fast for small λ.
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for j in 1.. {
            let t = (c * ((2 * j - 1) as f64).powi(2)).exp();
            sum += t;
            if t <= KOLMOGOROV_TRUNCATION * sum || j > 100 {
                break;
            }
        }
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1.. {
        let t = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * t;
        sign = -sign;
        if t <= KOLMOGOROV_TRUNCATION * sum.abs() || j > 100 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn need(got: usize) -> Result<()> {
    if got < KS_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            need: KS_MIN_SAMPLES,
            got,
        });
    }
    Ok(())
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample KS test of `a` against a continuous CDF.
pub fn ks_one_sample<C: Fn(f64) -> f64>(a: &[f64], cdf: C) -> Result<KsResult> {
    need(a.len())?;
    let xs = sorted(a);
    let n = xs.len() as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_survival(n.sqrt() * statistic),
    })
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    need(a.len())?;
    need(b.len())?;
    let (xa, xb) = (sorted(a), sorted(b));
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut statistic: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        statistic = statistic.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_survival(ne.sqrt() * statistic),
    })
}
