use std::path::{Path, PathBuf};
use std::time::Instant;

use lrfpp::constants::evaluate;
use lrfpp::explore::{Explorer, StopRule};
use lrfpp::rng::derive_seed;
use lrfpp::stats::{
    estimate_scaled, gumbel_test, ks_two_sample, oracle_typical, replicate_values, time_scale, ExperimentSpec,
    Quantity, TauIndex, EULER_GAMMA,
};
use lrfpp::{Error as CoreError, Torus};

use crate::error::CliError;
use crate::manifest::{Body, Experiment, Format, Kind, ValidatePlan};
use crate::output::{write_result, ConstantsRow, Provenance, Rows, SimulateRow, TauRow, ValidateRow};

/// Family-wise level of the exploration/oracle KS check.
pub const ORACLE_KS_LEVEL: f64 = 0.01;
/// Level of the Gumbel KS check.
pub const GUMBEL_KS_LEVEL: f64 = 0.001;
/// Smallest `k = ⌊√n⌋` for which the Gumbel checks run; below it the
/// limit law is too far off.
pub const GUMBEL_MIN_K: usize = 32;

#[derive(Debug)]
pub struct Outcome {
    pub name: String,
    pub path: Option<PathBuf>,
    pub error: Option<CliError>,
}

fn seeded(spec: &ExperimentSpec, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        root_seed: seed,
        ..spec.clone()
    }
}

fn simulate_rows(exp: &Experiment, specs: &[ExperimentSpec], root: u64) -> Result<Rows, CliError> {
    let mut rows = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let s = estimate_scaled(&seeded(spec, exp.point_seed(root, i)))?;
        let scale = time_scale(&spec.cfg)?;
        let q = s.quantiles.map(|x| x * scale);
        rows.push(SimulateRow {
            n: spec.cfg.volume(),
            alpha: spec.cfg.alpha(),
            quantity: spec.quantity.name().into(),
            scaled_mean: s.scaled_mean.unwrap(),
            se: s.scaled_se.unwrap(),
            q05: q[0],
            q25: q[1],
            q50: q[2],
            q75: q[3],
            q95: q[4],
        });
    }
    Ok(Rows::Simulate(rows))
}

fn tau_rows(exp: &Experiment, specs: &[ExperimentSpec], root: u64) -> Result<Rows, CliError> {
    let mut rows = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let s = gumbel_test(&seeded(spec, exp.point_seed(root, i)))?;
        let ks = s.ks.expect("enough replicates for KS");
        rows.push(TauRow {
            n: spec.cfg.volume(),
            alpha: spec.cfg.alpha(),
            k: spec.tau_k()?,
            mean: s.mean,
            se: s.se,
            ks_statistic: ks.statistic,
            ks_p_value: ks.p_value,
            scaled_mean: s.scaled_mean.unwrap(),
            scaled_se: s.scaled_se.unwrap(),
        });
    }
    Ok(Rows::Tau(rows))
}

fn constants_rows(queries: &[lrfpp::Query], notes: &mut Vec<String>) -> Result<Rows, CliError> {
    let mut rows = Vec::with_capacity(queries.len());
    for q in queries {
        let e = evaluate(q)?;
        if !e.converged {
            notes.push(format!(
                "not converged: d={} p={} alpha={} {} (error estimate {:e})",
                q.d,
                q.p,
                q.alpha,
                q.method.name(),
                e.error
            ));
        }
        rows.push(ConstantsRow {
            d: q.d,
            p: q.p.to_string(),
            alpha: q.alpha,
            method: q.method.name().into(),
            value: e.value,
            error_estimate: e.error,
        });
    }
    Ok(Rows::Constants(rows))
}

fn sandwich_row(cfg: &Torus, plan: &ValidatePlan, seed: u64) -> Result<ValidateRow, CliError> {
    let ex = Explorer::new(cfg)?;
    let mut checks = 0usize;
    let mut passed = true;
    for r in 0..plan.explorations {
        match ex.run_from(0, &StopRule::Full, derive_seed(seed, &[r as u64])) {
            Ok(rec) => checks += rec.bound_checks(),
            Err(CoreError::Invariant(msg)) => {
                eprintln!("rate sandwich, n = {}, alpha = {}: {msg}", cfg.volume(), cfg.alpha());
                passed = false;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(ValidateRow {
        check: "rate_sandwich".into(),
        n: cfg.volume(),
        alpha: cfg.alpha(),
        statistic: checks as f64,
        p_value: None,
        threshold: 0.0,
        passed,
    })
}

fn oracle_row(cfg: &Torus, plan: &ValidatePlan, seed: u64, level: f64) -> Result<ValidateRow, CliError> {
    let spec = ExperimentSpec::new(cfg.clone(), plan.ks_samples, derive_seed(seed, &[0]), Quantity::Typical)?;
    let explored = replicate_values(&spec)?;
    let oracle = oracle_typical(&seeded(&spec, derive_seed(seed, &[1])))?;
    let ks = ks_two_sample(&explored, &oracle)?;
    Ok(ValidateRow {
        check: "oracle_ks".into(),
        n: cfg.volume(),
        alpha: cfg.alpha(),
        statistic: ks.statistic,
        p_value: Some(ks.p_value),
        threshold: level,
        passed: ks.p_value > level,
    })
}

fn gumbel_rows(cfg: &Torus, plan: &ValidatePlan, seed: u64) -> Result<Vec<ValidateRow>, CliError> {
    let spec = ExperimentSpec::new(cfg.clone(), plan.gumbel_replicates, seed, Quantity::Tau(TauIndex::Exponent(0.5)))?;
    if spec.tau_k()? < GUMBEL_MIN_K || plan.gumbel_replicates < lrfpp::stats::KS_MIN_SAMPLES {
        return Ok(Vec::new());
    }
    let s = gumbel_test(&spec)?;
    let ks = s.ks.expect("enough replicates");
    let z = (s.mean - EULER_GAMMA) / s.se;
    Ok(vec![
        ValidateRow {
            check: "gumbel_ks".into(),
            n: cfg.volume(),
            alpha: cfg.alpha(),
            statistic: ks.statistic,
            p_value: Some(ks.p_value),
            threshold: GUMBEL_KS_LEVEL,
            passed: ks.p_value > GUMBEL_KS_LEVEL,
        },
        ValidateRow {
            check: "gumbel_mean_z".into(),
            n: cfg.volume(),
            alpha: cfg.alpha(),
            statistic: z,
            p_value: None,
            threshold: 3.0,
            passed: z.abs() <= 3.0,
        },
    ])
}

fn validate_rows(exp: &Experiment, plan: &ValidatePlan, root: u64) -> Result<Rows, CliError> {
    let level = ORACLE_KS_LEVEL / plan.configs.len() as f64;
    let mut rows = Vec::new();
    for (i, cfg) in plan.configs.iter().enumerate() {
        let seed = exp.point_seed(root, i);
        rows.push(sandwich_row(cfg, plan, derive_seed(seed, &[0]))?);
        rows.push(oracle_row(cfg, plan, derive_seed(seed, &[1]), level)?);
        rows.extend(gumbel_rows(cfg, plan, derive_seed(seed, &[2]))?);
    }
    Ok(Rows::Validate(rows))
}

/// Rows of one experiment, with notes for the provenance header.
pub fn compute_rows(exp: &Experiment, root: u64) -> Result<(Rows, Vec<String>), CliError> {
    let mut notes = Vec::new();
    let rows = match &exp.body {
        Body::Simulate(specs) => {
            let first = &specs[0].cfg;
            notes.push(format!("d: {}, p: {}", first.dim(), first.norm_index()));
            notes.push("values in units of ln n / R_n".into());
            simulate_rows(exp, specs, root)?
        }
        Body::Tau(specs) => {
            let first = &specs[0].cfg;
            notes.push(format!("d: {}, p: {}", first.dim(), first.norm_index()));
            tau_rows(exp, specs, root)?
        }
        Body::Constants { queries, skipped } => {
            notes.extend(skipped.iter().map(|s| format!("skipped: {s}")));
            constants_rows(queries, &mut notes)?
        }
        Body::Validate(plan) => validate_rows(exp, plan, root)?,
    };
    Ok((rows, notes))
}

/// Runs and writes one experiment.
pub fn run_experiment(exp: &Experiment, root: u64, out: &Path, format: Format) -> Outcome {
    let start = Instant::now();
    let result = compute_rows(exp, root).and_then(|(rows, notes)| {
        let prov = Provenance {
            tool: format!("lrfpp {}", env!("CARGO_PKG_VERSION")),
            experiment: exp.name.clone(),
            kind: exp.kind.name().into(),
            root_seed: root,
            wall_time_s: start.elapsed().as_secs_f64(),
            notes,
        };
        let path = write_result(out, &exp.name, &rows, &prov, format)?;
        let failed = match &rows {
            Rows::Validate(v) => v.iter().filter(|r| !r.passed).count(),
            _ => 0,
        };
        Ok((path, failed))
    });
    match result {
        Ok((path, 0)) => Outcome {
            name: exp.name.clone(),
            path: Some(path),
            error: None,
        },
        Ok((path, failed)) => Outcome {
            name: exp.name.clone(),
            path: Some(path),
            error: Some(CliError::ChecksFailed(failed)),
        },
        Err(e) => Outcome {
            name: exp.name.clone(),
            path: None,
            error: Some(e),
        },
    }
}

/// Runs every experiment of one kind, in manifest order.
pub fn run_kind<'a>(
    experiments: impl Iterator<Item = &'a Experiment>,
    kind: Kind,
    root: u64,
    out: &Path,
    format: Format,
) -> Result<Vec<Outcome>, CliError> {
    let selected: Vec<&Experiment> = experiments.filter(|e| e.kind == kind).collect();
    if selected.is_empty() {
        return Err(CliError::NothingToRun(match kind {
            Kind::Simulate => "[[simulate]]",
            Kind::Tau => "[[tau]]",
            Kind::Constants => "[[constants]]",
            Kind::Validate => "[validate]",
        }));
    }
    Ok(selected.into_iter().map(|e| run_experiment(e, root, out, format)).collect())
}
