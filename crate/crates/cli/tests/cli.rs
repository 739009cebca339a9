use std::fs;
use std::path::Path;
use std::process::Command;

use lrfpp_cli::manifest::Body;
use lrfpp_cli::output::{csv_rows_only, read_csv_rows, rows_csv, ConstantsRow, Rows, SimulateRow, TauRow, ValidateRow};
use lrfpp_cli::{parse_manifest, ManifestError};
use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lrfpp"))
}

fn run(dir: &Path, args: &[&str]) -> i32 {
    let out = bin().current_dir(dir).args(args).output().unwrap();
    out.status.code().unwrap()
}

const SWEEP: &str = r#"
seed = 11
out = "res"

[[simulate]]
name = "sweep"
d = 2
m = [4, 6]
alpha = [0, 0.5]
quantity = ["typical", "flooding", "diameter"]
replicates = 40

[[tau]]
name = "fluct"
d = 2
m = 8
alpha = 1
k = 8
replicates = 60

[[constants]]
name = "consts"
d = [1, 2]
p = [1, "inf"]
alpha = [0.5]
method = ["quadrature", "closed-p-infinity", "hypergeometric-d2", "gamma-max-mc"]
samples = 20000
"#;

#[test]
fn minimal_manifest_is_valid() {
    let m = parse_manifest("seed = 0\nd = 1\nm = 4\nalpha = 0\nquantity = \"typical\"\nreplicates = 10\n").unwrap();
    assert_eq!(m.seed, 0);
    assert_eq!(m.experiments.len(), 1);
    match &m.experiments[0].body {
        Body::Simulate(specs) => {
            assert_eq!(specs.len(), 1);
            assert_eq!(specs[0].cfg.volume(), 4);
            assert_eq!(specs[0].replicates, 10);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn rejections_name_the_field() {
    let e = parse_manifest("seed = 0\nd = 2\nm = 4\nalpha = 2\nquantity = \"typical\"\nreplicates = 10\n").unwrap_err();
    assert!(e.to_string().contains("alpha must be < d"), "{e}");

    let e = parse_manifest("seed = 0\nd = 2\nm = 4\nalpha = 1\nquantity = \"typical\"\nreplicates = 0\n").unwrap_err();
    assert!(matches!(&e, ManifestError::Field { path, .. } if path.ends_with("replicates")), "{e}");

    let e = parse_manifest("d = 2\nm = 4\nalpha = 1\nquantity = \"typical\"\nreplicates = 3\n").unwrap_err();
    assert!(matches!(&e, ManifestError::Field { path, .. } if path == "seed"), "{e}");

    let e = parse_manifest("seed = 1\n[[simulate]]\nd = 2\nm = [4, 64]\nalpha = 0\nquantity = \"diameter\"\nreplicates = 3\n")
        .unwrap_err();
    assert!(e.to_string().contains("simulate[0].m[1]"), "{e}");

    let e = parse_manifest("seed = 1\n[[simulate]]\nd = 2\nm = 4\nalpha = 0\nquantity = \"typo\"\nreplicates = 3\n").unwrap_err();
    assert!(e.to_string().contains("simulate[0].quantity[0]"), "{e}");

    let e = parse_manifest("seed = 1\n[[tau]]\nd = 2\nm = 4\nalpha = 0\nreplicates = 3\n").unwrap_err();
    assert!(e.to_string().contains("beta or k"), "{e}");

    let e = parse_manifest("seed = 1\nbogus = 3\n").unwrap_err();
    assert!(matches!(e, ManifestError::Syntax(ref s) if s.contains("line 2")), "{e}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "seed = 0\nd = 2\nm = 4\nalpha = 2\nquantity = \"typical\"\nreplicates = 1\n").unwrap();
    assert_eq!(run(dir.path(), &["simulate", "--manifest", "bad.toml"]), 2);
    assert_eq!(run(dir.path(), &["simulate", "--manifest", "missing.toml"]), 4);
    fs::write(dir.path().join("ok.toml"), "seed = 0\nd = 2\nm = 4\nalpha = 1\nquantity = \"typical\"\nreplicates = 5\n").unwrap();
    assert_eq!(run(dir.path(), &["constants", "--manifest", "ok.toml"]), 2);
    assert_eq!(run(dir.path(), &["simulate", "--manifest", "ok.toml", "--format", "xml"]), 2);
    assert_eq!(run(dir.path(), &["simulate", "--manifest", "ok.toml", "--jobs", "0"]), 2);
    fs::write(dir.path().join("blocker"), "").unwrap();
    assert_eq!(run(dir.path(), &["simulate", "--manifest", "ok.toml", "--out", "blocker"]), 4);
    assert_eq!(run(dir.path(), &["simulate", "--manifest", "ok.toml"]), 0);
    assert!(dir.path().join("simulate-0.csv").exists());
}

fn rows_of(path: &Path) -> String {
    csv_rows_only(&fs::read_to_string(path).unwrap())
}

#[test]
fn reruns_and_job_counts_give_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.toml"), SWEEP).unwrap();
    let mut seen = Vec::new();
    for (out, jobs) in [("a", "1"), ("b", "1"), ("c", "3")] {
        for cmd in ["simulate", "tau", "constants"] {
            assert_eq!(run(dir.path(), &[cmd, "--manifest", "m.toml", "--out", out, "--jobs", jobs]), 0);
        }
        let files: Vec<String> = ["sweep", "fluct", "consts"]
            .iter()
            .map(|n| rows_of(&dir.path().join(out).join(format!("{n}.csv"))))
            .collect();
        seen.push(files);
    }
    assert_eq!(seen[0], seen[1]);
    assert_eq!(seen[0], seen[2]);

    assert_eq!(run(dir.path(), &["simulate", "--manifest", "m.toml", "--out", "d", "--seed", "12"]), 0);
    assert_ne!(rows_of(&dir.path().join("d/sweep.csv")), seen[0][0]);
    let head = fs::read_to_string(dir.path().join("d/sweep.csv")).unwrap();
    assert!(head.contains("# root_seed: 12"));
    assert!(head.contains("# tool: lrfpp"));
    assert!(head.contains("# wall_time_s: "));
}

#[test]
fn emitted_rows_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.toml"), SWEEP).unwrap();
    for cmd in ["simulate", "tau", "constants"] {
        assert_eq!(run(dir.path(), &[cmd, "--manifest", "m.toml"]), 0);
    }
    let text = |n: &str| fs::read_to_string(dir.path().join("res").join(n)).unwrap();

    let sim: Vec<SimulateRow> = read_csv_rows(&text("sweep.csv")).unwrap();
    assert_eq!(sim.len(), 12);
    assert!(text("sweep.csv").contains("\nn,alpha,quantity,scaled_mean,se,q05,q25,q50,q75,q95\n"));
    assert!(sim.iter().all(|r| r.q05 <= r.q25 && r.q25 <= r.q50 && r.q50 <= r.q75 && r.q75 <= r.q95));
    assert_eq!(rows_csv(&Rows::Simulate(sim)).unwrap(), rows_of(&dir.path().join("res/sweep.csv")).into_bytes());

    let tau: Vec<TauRow> = read_csv_rows(&text("fluct.csv")).unwrap();
    assert_eq!(tau.len(), 1);
    assert_eq!(tau[0].k, 8);

    let consts: Vec<ConstantsRow> = read_csv_rows(&text("consts.csv")).unwrap();
    assert!(text("consts.csv").contains("\nd,p,alpha,method,value,error_estimate\n"));
    // Applicable: quadrature everywhere, the closed form at p=inf,
    // Monte Carlo at p=1, the hypergeometric form at d=2, p=1.
    assert_eq!(consts.len(), 9);
    let closed = consts.iter().find(|r| r.d == 2 && r.method == "closed-p-infinity").unwrap();
    assert_eq!(closed.p, "inf");
    assert!((closed.value - 2.0 / 1.5 * 2f64.sqrt()).abs() < 1e-15);
    assert!(text("consts.csv").contains("# skipped: d=1 p=1 alpha=0.5 closed-p-infinity"));

    assert_eq!(run(dir.path(), &["simulate", "--manifest", "m.toml", "--format", "json", "--out", "j"]), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("j/sweep.json")).unwrap()).unwrap();
    let rows: Vec<SimulateRow> = serde_json::from_value(v["rows"].clone()).unwrap();
    assert_eq!(rows, read_csv_rows::<SimulateRow>(&text("sweep.csv")).unwrap());
    let keys: Vec<&String> = v["rows"][0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["n", "alpha", "quantity", "scaled_mean", "se", "q05", "q25", "q50", "q75", "q95"]);
    assert_eq!(v["root_seed"], 11);
}

#[test]
fn validate_subcommand_passes_on_small_tori() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("v.toml"),
        "seed = 5\n[validate]\nd = 2\nm = [3, 32]\nalpha = [0, 1]\nexplorations = 2\nks_samples = 300\ngumbel_replicates = 100\n",
    )
    .unwrap();
    assert_eq!(run(dir.path(), &["validate", "--manifest", "v.toml"]), 0);
    let rows: Vec<ValidateRow> = read_csv_rows(&fs::read_to_string(dir.path().join("validate.csv")).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.passed), "{rows:?}");
    assert!(rows.iter().any(|r| r.check == "rate_sandwich" && r.statistic > 0.0));
    assert!(rows.iter().any(|r| r.check == "oracle_ks"));
    assert_eq!(rows.iter().filter(|r| r.check.starts_with("gumbel")).count(), 4);
    assert!(rows.iter().filter(|r| r.check.starts_with("gumbel")).all(|r| r.n == 1024));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), Just(0.0), Just(1e-300), Just(-2.5)]
}

proptest! {
    #[test]
    fn simulate_rows_round_trip(n in 1usize..1 << 20, alpha in finite(), vals in prop::array::uniform7(finite())) {
        let row = SimulateRow {
            n, alpha, quantity: "flooding".into(),
            scaled_mean: vals[0], se: vals[1], q05: vals[2], q25: vals[3], q50: vals[4], q75: vals[5], q95: vals[6],
        };
        let text = String::from_utf8(rows_csv(&Rows::Simulate(vec![row.clone()])).unwrap()).unwrap();
        let back: Vec<SimulateRow> = read_csv_rows(&text).unwrap();
        prop_assert_eq!(back, vec![row]);
    }

    #[test]
    fn constants_rows_round_trip(d in 1usize..5, alpha in finite(), value in finite(), err in finite(), p in prop_oneof![Just("1".to_string()), Just("inf".to_string()), Just("2.5".to_string())]) {
        let row = ConstantsRow { d, p, alpha, method: "quadrature".into(), value, error_estimate: err };
        let text = String::from_utf8(rows_csv(&Rows::Constants(vec![row.clone()])).unwrap()).unwrap();
        let back: Vec<ConstantsRow> = read_csv_rows(&text).unwrap();
        prop_assert_eq!(back, vec![row]);
    }
}
