//! Run manifests.
//!
//! ```toml
//! seed = 7            # required
//! format = "csv"      # or "json"
//! out = "results"     # output directory
//! jobs = 4
//!
//! [[simulate]]
//! d = 2
//! m = [16, 32]
//! alpha = [0.0, 0.5]
//! quantity = ["typical", "flooding"]
//! replicates = 200
//!
//! [[tau]]
//! d = 2
//! m = 64
//! alpha = 0.5
//! beta = 0.5
//! replicates = 2000
//!
//! [[constants]]
//! d = 2
//! p = [1, 2, "inf"]
//! alpha = [0.25, 0.5]
//! method = ["quadrature", "hypergeometric-d2"]
//!
//! [validate]
//! d = 2
//! m = [4, 8]
//! alpha = [0.0, 1.0]
//! ```
//!
//! A manifest may instead carry one simulate entry at the top level
//! (`d`, `m`, `alpha`, `quantity`, `replicates` next to `seed`).
//!
//! Grid-valued keys take a scalar or a list. Every grid point is checked
//! before anything runs.

use std::path::PathBuf;

use serde::Deserialize;

use lrfpp::constants::{ConstantQuery, Method};
use lrfpp::explore::oracle::{ALL_PAIRS_CAP, ORACLE_CAP};
use lrfpp::explore::Selection;
use lrfpp::stats::{ExperimentSpec, Quantity, TauIndex};
use lrfpp::{Error as CoreError, NormIndex, Site, Torus};

use crate::error::ManifestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?}, expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Simulate,
    Tau,
    Constants,
    Validate,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Tau => "tau",
            Kind::Constants => "constants",
            Kind::Validate => "validate",
        }
    }

    fn tag(self) -> u64 {
        self as u64
    }
}

/// Checks run by `validate` on one torus.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatePlan {
    pub configs: Vec<Torus>,
    pub explorations: usize,
    pub ks_samples: usize,
    pub gumbel_replicates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    /// One spec per grid point; `root_seed` is filled in at run time.
    Simulate(Vec<ExperimentSpec>),
    Tau(Vec<ExperimentSpec>),
    Constants {
        queries: Vec<ConstantQuery<f64>>,
        /// Grid points whose method does not apply.
        skipped: Vec<String>,
    },
    Validate(ValidatePlan),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub kind: Kind,
    /// Position among the manifest's entries of the same kind.
    pub index: usize,
    pub name: String,
    pub body: Body,
}

impl Experiment {
    /// Seed of grid point `point` under `root`.
    pub fn point_seed(&self, root: u64, point: usize) -> u64 {
        lrfpp::rng::derive_seed(root, &[self.kind.tag(), self.index as u64, point as u64])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub seed: u64,
    pub format: Format,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub experiments: Vec<Experiment>,
}

impl RunManifest {
    pub fn of_kind(&self, kind: Kind) -> impl Iterator<Item = &Experiment> {
        self.experiments.iter().filter(move |e| e.kind == kind)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

// TOML keeps integers and floats apart; `alpha = 0` should still work.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    fn get(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(x) => x,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NormValue {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    seed: Option<u64>,
    format: Option<String>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    #[serde(default)]
    simulate: Vec<RawSimulate>,
    #[serde(default)]
    tau: Vec<RawTau>,
    #[serde(default)]
    constants: Vec<RawConstants>,
    validate: Option<RawValidate>,

    // Flat single-experiment form.
    name: Option<String>,
    d: Option<usize>,
    m: Option<OneOrMany<usize>>,
    p: Option<NormValue>,
    alpha: Option<OneOrMany<Number>>,
    quantity: Option<OneOrMany<String>>,
    replicates: Option<usize>,
    source: Option<Vec<i64>>,
    target: Option<Vec<i64>>,
    selection: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulate {
    name: Option<String>,
    d: usize,
    m: OneOrMany<usize>,
    p: Option<NormValue>,
    alpha: OneOrMany<Number>,
    quantity: OneOrMany<String>,
    replicates: usize,
    source: Option<Vec<i64>>,
    target: Option<Vec<i64>>,
    selection: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTau {
    name: Option<String>,
    d: usize,
    m: OneOrMany<usize>,
    p: Option<NormValue>,
    alpha: OneOrMany<Number>,
    replicates: usize,
    beta: Option<Number>,
    k: Option<usize>,
    source: Option<Vec<i64>>,
    selection: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    name: Option<String>,
    d: OneOrMany<usize>,
    p: OneOrMany<NormValue>,
    alpha: OneOrMany<Number>,
    method: OneOrMany<String>,
    tolerance: Option<Number>,
    samples: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawValidate {
    name: Option<String>,
    d: usize,
    m: OneOrMany<usize>,
    p: Option<NormValue>,
    alpha: OneOrMany<Number>,
    explorations: Option<usize>,
    ks_samples: Option<usize>,
    gumbel_replicates: Option<usize>,
}

fn field(path: impl Into<String>, message: impl Into<String>) -> ManifestError {
    ManifestError::Field {
        path: path.into(),
        message: message.into(),
    }
}

fn core(path: &str, e: CoreError) -> ManifestError {
    field(path, e.to_string())
}

fn parse_norm(path: &str, v: &Option<NormValue>) -> Result<NormIndex<f64>, ManifestError> {
    let parsed = match v {
        None => Ok(NormIndex::Two),
        Some(NormValue::Int(i)) => NormIndex::new(*i as f64),
        Some(NormValue::Float(x)) => NormIndex::new(*x),
        Some(NormValue::Text(s)) => s.parse(),
    };
    parsed.map_err(|e| core(path, e))
}

fn parse_quantity(path: &str, s: &str) -> Result<Quantity, ManifestError> {
    match s {
        "typical" => Ok(Quantity::Typical),
        "flooding" => Ok(Quantity::Flooding),
        "diameter" => Ok(Quantity::Diameter),
        _ => Err(field(path, format!("unknown quantity {s:?}, expected typical, flooding or diameter"))),
    }
}

fn parse_selection(path: &str, s: &Option<String>) -> Result<Selection, ManifestError> {
    match s.as_deref() {
        None | Some("scan") => Ok(Selection::Scan),
        Some("rejection") => Ok(Selection::Rejection),
        Some(other) => Err(field(path, format!("unknown selection {other:?}, expected scan or rejection"))),
    }
}

fn torus(path: &str, d: usize, m: usize, p: NormIndex<f64>, alpha: f64) -> Result<Torus, ManifestError> {
    Torus::new(d, m, p, alpha).map_err(|e| core(path, e))
}

fn nonempty<T: Clone>(path: &str, v: &OneOrMany<T>) -> Result<Vec<T>, ManifestError> {
    let v = v.to_vec();
    if v.is_empty() {
        return Err(field(path, "empty list"));
    }
    Ok(v)
}

fn reals(path: &str, v: &OneOrMany<Number>) -> Result<Vec<f64>, ManifestError> {
    Ok(nonempty(path, v)?.into_iter().map(Number::get).collect())
}

fn site(path: &str, cfg: &Torus, coords: &Option<Vec<i64>>) -> Result<Option<Site>, ManifestError> {
    coords
        .as_ref()
        .map(|c| cfg.canonicalize(c).map_err(|e| core(path, e)))
        .transpose()
}

fn simulate(at: &str, raw: &RawSimulate) -> Result<Vec<ExperimentSpec>, ManifestError> {
    let p = parse_norm(&format!("{at}.p"), &raw.p)?;
    let selection = parse_selection(&format!("{at}.selection"), &raw.selection)?;
    let ms = nonempty(&format!("{at}.m"), &raw.m)?;
    let alphas = reals(&format!("{at}.alpha"), &raw.alpha)?;
    let quantities = nonempty(&format!("{at}.quantity"), &raw.quantity)?;
    if raw.replicates == 0 {
        return Err(field(format!("{at}.replicates"), "replicates must be >= 1"));
    }
    let mut specs = Vec::new();
    for (i, &m) in ms.iter().enumerate() {
        for (j, &alpha) in alphas.iter().enumerate() {
            let cfg = torus(&format!("{at} (m[{i}] = {m}, alpha[{j}] = {alpha})"), raw.d, m, p, alpha)?;
            for (l, q) in quantities.iter().enumerate() {
                let qpath = format!("{at}.quantity[{l}]");
                let quantity = parse_quantity(&qpath, q)?;
                let n = cfg.volume();
                let cap = match quantity {
                    Quantity::Diameter => ALL_PAIRS_CAP,
                    _ => lrfpp::weights::FIELD_CAP,
                };
                if n > cap {
                    return Err(field(
                        format!("{at}.m[{i}]"),
                        format!("{} needs n <= {cap}, got n = {n}", quantity.name()),
                    ));
                }
                let mut spec = ExperimentSpec::new(cfg.clone(), raw.replicates, 0, quantity)
                    .map_err(|e| core(&format!("{at}.replicates"), e))?;
                spec.source = site(&format!("{at}.source"), &cfg, &raw.source)?;
                spec.target = site(&format!("{at}.target"), &cfg, &raw.target)?;
                spec.selection = selection;
                spec.validate().map_err(|e| core(&format!("{at}.target"), e))?;
                specs.push(spec);
            }
        }
    }
    Ok(specs)
}

fn tau(at: &str, raw: &RawTau) -> Result<Vec<ExperimentSpec>, ManifestError> {
    let p = parse_norm(&format!("{at}.p"), &raw.p)?;
    let selection = parse_selection(&format!("{at}.selection"), &raw.selection)?;
    let index = match (raw.beta, raw.k) {
        (Some(beta), None) => TauIndex::Exponent(beta.get()),
        (None, Some(k)) => TauIndex::Count(k),
        (None, None) => return Err(field(at, "one of beta or k is required")),
        (Some(_), Some(_)) => return Err(field(at, "beta and k are mutually exclusive")),
    };
    let key = if raw.beta.is_some() { "beta" } else { "k" };
    if raw.replicates == 0 {
        return Err(field(format!("{at}.replicates"), "replicates must be >= 1"));
    }
    let mut specs = Vec::new();
    for (i, &m) in nonempty(&format!("{at}.m"), &raw.m)?.iter().enumerate() {
        for (j, &alpha) in reals(&format!("{at}.alpha"), &raw.alpha)?.iter().enumerate() {
            let cfg = torus(&format!("{at} (m[{i}] = {m}, alpha[{j}] = {alpha})"), raw.d, m, p, alpha)?;
            let mut spec = ExperimentSpec::new(cfg.clone(), raw.replicates, 0, Quantity::Tau(index))
                .map_err(|e| core(&format!("{at}.{key}"), e))?;
            if spec.tau_k().map_err(|e| core(&format!("{at}.{key}"), e))? < 2 {
                return Err(field(format!("{at}.{key}"), "k must be >= 2 for a fluctuation study"));
            }
            spec.source = site(&format!("{at}.source"), &cfg, &raw.source)?;
            spec.selection = selection;
            specs.push(spec);
        }
    }
    Ok(specs)
}

fn constants(at: &str, raw: &RawConstants) -> Result<Body, ManifestError> {
    let mut queries = Vec::new();
    let mut skipped = Vec::new();
    let norms = nonempty(&format!("{at}.p"), &raw.p)?
        .iter()
        .enumerate()
        .map(|(i, v)| parse_norm(&format!("{at}.p[{i}]"), &Some(v.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let methods = nonempty(&format!("{at}.method"), &raw.method)?
        .iter()
        .enumerate()
        .map(|(i, s)| s.parse::<Method>().map_err(|e| core(&format!("{at}.method[{i}]"), e)))
        .collect::<Result<Vec<_>, _>>()?;
    for &d in &nonempty(&format!("{at}.d"), &raw.d)? {
        for &p in &norms {
            for (j, &alpha) in reals(&format!("{at}.alpha"), &raw.alpha)?.iter().enumerate() {
                for &method in &methods {
                    let mut q = ConstantQuery::new(d, p, alpha, method);
                    if let Some(t) = raw.tolerance {
                        q.tolerance = t.get();
                    }
                    if let Some(s) = raw.samples {
                        q.samples = s;
                    }
                    q.seed = raw.seed.unwrap_or(0);
                    match q.validate() {
                        Ok(()) => queries.push(q),
                        Err(CoreError::MethodNotApplicable { method, reason }) => {
                            skipped.push(format!("d={d} p={p} alpha={alpha} {method}: {reason}"))
                        }
                        Err(e) => return Err(core(&format!("{at}.alpha[{j}]"), e)),
                    }
                }
            }
        }
    }
    if queries.is_empty() {
        return Err(field(at, "no grid point is applicable to the chosen methods"));
    }
    Ok(Body::Constants { queries, skipped })
}

fn validate(at: &str, raw: &RawValidate) -> Result<ValidatePlan, ManifestError> {
    let p = parse_norm(&format!("{at}.p"), &raw.p)?;
    let mut configs = Vec::new();
    for (i, &m) in nonempty(&format!("{at}.m"), &raw.m)?.iter().enumerate() {
        for (j, &alpha) in reals(&format!("{at}.alpha"), &raw.alpha)?.iter().enumerate() {
            let cfg = torus(&format!("{at} (m[{i}] = {m}, alpha[{j}] = {alpha})"), raw.d, m, p, alpha)?;
            if cfg.volume() > ORACLE_CAP {
                return Err(field(
                    format!("{at}.m[{i}]"),
                    format!("oracle checks need n <= {ORACLE_CAP}, got n = {}", cfg.volume()),
                ));
            }
            configs.push(cfg);
        }
    }
    let plan = ValidatePlan {
        configs,
        explorations: raw.explorations.unwrap_or(20),
        ks_samples: raw.ks_samples.unwrap_or(2000),
        gumbel_replicates: raw.gumbel_replicates.unwrap_or(500),
    };
    for (key, v) in [("explorations", plan.explorations), ("gumbel_replicates", plan.gumbel_replicates)] {
        if v == 0 {
            return Err(field(format!("{at}.{key}"), "must be >= 1"));
        }
    }
    if plan.ks_samples < lrfpp::stats::KS_MIN_SAMPLES {
        return Err(field(
            format!("{at}.ks_samples"),
            format!("must be >= {}", lrfpp::stats::KS_MIN_SAMPLES),
        ));
    }
    Ok(plan)
}

/// Parses and fully validates a manifest.
pub fn parse_manifest(text: &str) -> Result<RunManifest, ManifestError> {
    let raw: RawManifest = toml::from_str(text).map_err(|e| ManifestError::Syntax(e.to_string()))?;
    let seed = raw.seed.ok_or_else(|| field("seed", "a root seed is required"))?;
    let format = match &raw.format {
        None => Format::Csv,
        Some(s) => s.parse().map_err(|e: String| field("format", e))?,
    };
    if raw.jobs == Some(0) {
        return Err(field("jobs", "must be >= 1"));
    }

    let mut simulate_entries: Vec<(String, RawSimulate)> = Vec::new();
    let flat_given = raw.d.is_some()
        || raw.m.is_some()
        || raw.alpha.is_some()
        || raw.quantity.is_some()
        || raw.replicates.is_some();
    if flat_given {
        let missing = |k: &str| field(k, format!("{k} is required in the single-experiment form"));
        simulate_entries.push((
            String::new(),
            RawSimulate {
                name: raw.name.clone(),
                d: raw.d.ok_or_else(|| missing("d"))?,
                m: raw.m.clone().ok_or_else(|| missing("m"))?,
                p: raw.p.clone(),
                alpha: raw.alpha.clone().ok_or_else(|| missing("alpha"))?,
                quantity: raw.quantity.clone().ok_or_else(|| missing("quantity"))?,
                replicates: raw.replicates.ok_or_else(|| missing("replicates"))?,
                source: raw.source.clone(),
                target: raw.target.clone(),
                selection: raw.selection.clone(),
            },
        ));
    } else if raw.p.is_some() || raw.source.is_some() || raw.target.is_some() || raw.selection.is_some() {
        return Err(field("d", "top-level experiment keys given without d, m, alpha, quantity, replicates"));
    }
    for (i, s) in raw.simulate.into_iter().enumerate() {
        simulate_entries.push((format!("simulate[{i}]"), s));
    }

    let mut experiments = Vec::new();
    let name_or = |name: &Option<String>, kind: Kind, i: usize| name.clone().unwrap_or_else(|| format!("{}-{i}", kind.name()));
    for (i, (at, s)) in simulate_entries.iter().enumerate() {
        let path = if at.is_empty() { "(top level)".to_string() } else { at.clone() };
        let specs = simulate(&path, s)?;
        experiments.push(Experiment {
            kind: Kind::Simulate,
            index: i,
            name: name_or(&s.name, Kind::Simulate, i),
            body: Body::Simulate(specs),
        });
    }
    for (i, t) in raw.tau.iter().enumerate() {
        experiments.push(Experiment {
            kind: Kind::Tau,
            index: i,
            name: name_or(&t.name, Kind::Tau, i),
            body: Body::Tau(tau(&format!("tau[{i}]"), t)?),
        });
    }
    for (i, c) in raw.constants.iter().enumerate() {
        experiments.push(Experiment {
            kind: Kind::Constants,
            index: i,
            name: name_or(&c.name, Kind::Constants, i),
            body: constants(&format!("constants[{i}]"), c)?,
        });
    }
    if let Some(v) = &raw.validate {
        experiments.push(Experiment {
            kind: Kind::Validate,
            index: 0,
            name: v.name.clone().unwrap_or_else(|| "validate".into()),
            body: Body::Validate(validate("validate", v)?),
        });
    }

    let mut names: Vec<&str> = experiments.iter().map(|e| e.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(field("name", format!("duplicate experiment name {:?}", w[0])));
    }
    for e in &experiments {
        if e.name.is_empty() || e.name.contains(['/', '\\']) || e.name.starts_with('.') {
            return Err(field("name", format!("{:?} is not usable as a file name", e.name)));
        }
    }

    Ok(RunManifest {
        seed,
        format,
        out: raw.out.unwrap_or_else(|| PathBuf::from(".")),
        jobs: raw.jobs,
        experiments,
    })
}
