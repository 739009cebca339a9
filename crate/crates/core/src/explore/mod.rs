//! The exploration birth process.
//!
//! From a cluster `{v_0, …, v_{j-1}}` the next birth happens at rate
//! `Λ_j = Σ_z W(z)` and lands on the undiscovered site `z` with probability
//! `W(z)/Λ_j`. By memorylessness of the exponential edge weights the sequence
//! of births and birth times has exactly the law of the first-passage
//! discovery order from `v_0`, so transmission and flooding times can be read
//! off a single run without ever sampling an edge.
//!
//! [`oracle`] computes the same metric the slow way, by shortest paths on one
//! sampled realisation of all edge weights.

pub mod edges;
pub mod oracle;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::RunRng;
use crate::scalar::Real;
use crate::torus::{Site, TorusConfig};
use crate::weights::{Kernel, NearestSums, WeightField};

pub use edges::EdgeWeightSample;
pub use oracle::{diameter_exact, dijkstra_oracle, OracleRealization};

/// Relative float slack allowed in the rate sandwich.
pub const RATE_BOUND_SLACK: f64 = 1e-9;

/// When to stop an exploration.
#[derive(Debug, Clone, PartialEq)]
pub enum StopRule<F> {
    /// After `k` births beyond the source.
    Count(usize),
    /// When the given site is born.
    Target(Site),
    /// When every site is discovered.
    Full,
    /// Before the first birth later than `t`.
    Time(F),
}

/// How the newborn is chosen among undiscovered sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// One uniform draw against the cumulative weights, in site order.
    #[default]
    Scan,
    /// Propose a uniform site, accept with probability `W(z) / max W`.
    Rejection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExploreOptions {
    pub selection: Selection,
    /// Assert `j(R_n - R_j) ≤ Λ_j ≤ j R_n` before every birth.
    pub check_rate_bounds: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        Self {
            selection: Selection::Scan,
            check_rate_bounds: true,
        }
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Count,
    Target,
    Exhausted,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Birth<F> {
    /// Site index.
    pub site: usize,
    pub time: F,
    /// `Λ_j` just before this birth; `None` for the source.
    pub rate: Option<F>,
}

/// Births of one exploration run, in order.
#[derive(Debug, Clone)]
pub struct ExplorationRecord<F> {
    cfg: TorusConfig<F>,
    births: Vec<Birth<F>>,
    horizon: Horizon,
    bound_checks: usize,
}

impl<F: Real> ExplorationRecord<F> {
    pub fn config(&self) -> &TorusConfig<F> {
        &self.cfg
    }

    pub fn source(&self) -> Site {
        self.cfg.site(self.births[0].site)
    }

    pub fn births(&self) -> &[Birth<F>] {
        &self.births
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    /// Number of rate-sandwich assertions evaluated during the run.
    pub fn bound_checks(&self) -> usize {
        self.bound_checks
    }

    /// Every site was discovered.
    pub fn is_complete(&self) -> bool {
        self.births.len() == self.cfg.volume()
    }

    /// `τ_k`, the time the cluster reaches size `k + 1`.
    pub fn tau(&self, k: usize) -> Option<F> {
        self.births.get(k).map(|b| b.time)
    }

    pub fn last_time(&self) -> F {
        self.births.last().map_or(F::zero(), |b| b.time)
    }

    pub fn birth_time(&self, site: usize) -> Option<F> {
        self.births.iter().find(|b| b.site == site).map(|b| b.time)
    }

    /// Indices of the ball `{u : X_{v_0,u} ≤ t}`, assuming the run lasted
    /// past `t`.
    pub fn ball(&self, t: F) -> Vec<usize> {
        self.births
            .iter()
            .take_while(|b| b.time <= t)
            .map(|b| b.site)
            .collect()
    }

    pub fn ball_size(&self, t: F) -> usize {
        self.births.partition_point(|b| b.time <= t)
    }
}

/// Explorations on one torus, sharing the kernel and the nearest-`k` table.
#[derive(Debug, Clone)]
pub struct Explorer<F> {
    kernel: Arc<Kernel<F>>,
    nearest: Arc<NearestSums<F>>,
    rn: F,
    options: ExploreOptions,
}

impl<F: Real> Explorer<F> {
    pub fn new(cfg: &TorusConfig<F>) -> Result<Self> {
        let kernel = Kernel::new(cfg)?;
        let nearest = NearestSums::new(&kernel);
        let rn = nearest.full();
        Ok(Self {
            kernel: Arc::new(kernel),
            nearest: Arc::new(nearest),
            rn,
            options: ExploreOptions::default(),
        })
    }

    pub fn with_options(mut self, options: ExploreOptions) -> Self {
        self.options = options;
        self
    }

    pub fn config(&self) -> &TorusConfig<F> {
        self.kernel.config()
    }

    /// `R_n`.
    pub fn rn(&self) -> F {
        self.rn
    }

    pub fn nearest(&self) -> &NearestSums<F> {
        &self.nearest
    }

    pub fn run(&self, source: &Site, stop: &StopRule<F>, seed: u64) -> Result<ExplorationRecord<F>> {
        let src = self.config().index_of(source.coords())?;
        self.run_from(src, stop, seed)
    }

    /// Runs from the site with index `source`.
    pub fn run_from(&self, source: usize, stop: &StopRule<F>, seed: u64) -> Result<ExplorationRecord<F>> {
        let cfg = self.config().clone();
        let n = cfg.volume();
        if source >= n {
            return Err(Error::OutOfRange {
                what: "source index",
                value: source.to_string(),
                range: format!("[0, {n})"),
            });
        }
        let target = match stop {
            StopRule::Count(k) if *k > n - 1 => {
                return Err(Error::OutOfRange {
                    what: "stop count",
                    value: k.to_string(),
                    range: format!("[0, {}]", n - 1),
                })
            }
            StopRule::Time(t) if !(*t >= F::zero()) => {
                return Err(Error::InvalidConfig(format!("stop time must be >= 0, got {t}")))
            }
            StopRule::Target(v) => Some(cfg.index_of(v.coords())?),
            _ => None,
        };

        let mut field = WeightField::empty(self.kernel.clone());
        field.discover_index(source)?;
        let mut births = Vec::with_capacity(match stop {
            StopRule::Count(k) => k + 1,
            _ => n,
        });
        births.push(Birth {
            site: source,
            time: F::zero(),
            rate: None,
        });
        let record = |births, horizon, bound_checks| ExplorationRecord {
            cfg: cfg.clone(),
            births,
            horizon,
            bound_checks,
        };
        if target == Some(source) {
            return Ok(record(births, Horizon::Target, 0));
        }

        let mut rng = RunRng::new(seed);
        let mut now = F::zero();
        let mut checks = 0usize;
        loop {
            let j = births.len();
            if j == n {
                return Ok(record(births, Horizon::Exhausted, checks));
            }
            if let StopRule::Count(k) = stop {
                if j == k + 1 {
                    return Ok(record(births, Horizon::Count, checks));
                }
            }
            let rate = field.total();
            if self.options.check_rate_bounds {
                self.check_rate(j, rate)?;
                checks += 1;
            }
            let next = now + rng.exponential(rate);
            if let StopRule::Time(t) = stop {
                if next > *t {
                    return Ok(record(births, Horizon::Time, checks));
                }
            }
            let z = match self.options.selection {
                Selection::Scan => select_by_scan(&field, rate, &mut rng),
                Selection::Rejection => select_by_rejection(&field, &mut rng),
            };
            field.discover_index(z)?;
            now = next;
            births.push(Birth {
                site: z,
                time: now,
                rate: Some(rate),
            });
            if target == Some(z) {
                return Ok(record(births, Horizon::Target, checks));
            }
        }
    }

    fn check_rate(&self, j: usize, rate: F) -> Result<()> {
        let jf = F::from_count(j);
        let upper = jf * self.rn;
        let lower = jf * (self.rn - self.nearest.get(j)?);
        let slack = F::lit(RATE_BOUND_SLACK) * upper;
        if rate > upper + slack || rate < lower - slack {
            return Err(Error::Invariant(format!(
                "rate sandwich violated at j = {j}: {lower} <= {rate} <= {upper} fails"
            )));
        }
        Ok(())
    }
}

fn select_by_scan<F: Real>(field: &WeightField<F>, total: F, rng: &mut RunRng) -> usize {
    let goal = rng.uniform::<F>() * total;
    let mut acc = F::zero();
    let mut last_live = None;
    for (i, &w) in field.values().iter().enumerate() {
        if w > F::zero() {
            acc = acc + w;
            last_live = Some(i);
            if acc >= goal {
                return i;
            }
        }
    }
    // Rounding left the running sum just short of the goal.
    last_live.expect("an undiscovered site with positive weight")
}

fn select_by_rejection<F: Real>(field: &WeightField<F>, rng: &mut RunRng) -> usize {
    let n = field.values().len() as u64;
    let max = field.max_weight();
    loop {
        let z = rng.below(n) as usize;
        let w = field.weight(z);
        if w > F::zero() && rng.uniform::<F>() * max <= w {
            return z;
        }
    }
}

/// One exploration from `source` with default options.
pub fn run_exploration<F: Real>(
    source: &Site,
    stop: &StopRule<F>,
    cfg: &TorusConfig<F>,
    seed: u64,
) -> Result<ExplorationRecord<F>> {
    Explorer::new(cfg)?.run(source, stop, seed)
}

/// `X_{u,v}`: the birth time of `v` in the exploration from `u`.
pub fn transmission_time<F: Real>(u: &Site, v: &Site, cfg: &TorusConfig<F>, seed: u64) -> Result<F> {
    let explorer = Explorer::new(cfg)?;
    let rec = explorer.run(u, &StopRule::Target(v.clone()), seed)?;
    Ok(rec.last_time())
}

/// `max_v X_{u,v}`: the last birth time of a full exploration from `u`.
pub fn flooding_time<F: Real>(u: &Site, cfg: &TorusConfig<F>, seed: u64) -> Result<F> {
    let rec = run_exploration(u, &StopRule::Full, cfg, seed)?;
    Ok(rec.last_time())
}
