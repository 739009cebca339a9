use lrfpp::rng::RunRng;
use lrfpp::stats::{
    estimate_scaled, gumbel_test, ks_two_sample, oracle_triples, time_scale, ExperimentSpec, Quantity, TauIndex,
    EULER_GAMMA,
};
use lrfpp::{Norm, Site, Torus};

#[test]
fn ks_separates_shifted_uniforms() {
    let mut rng = RunRng::new(1);
    let a: Vec<f64> = (0..1000).map(|_| rng.uniform::<f64>()).collect();
    let b: Vec<f64> = (0..1000).map(|_| rng.uniform::<f64>() + 0.5).collect();
    let r = ks_two_sample(&a, &b).unwrap();
    assert!(r.p_value < 1e-6, "{r:?}");
    let c: Vec<f64> = (0..1000).map(|_| rng.uniform::<f64>()).collect();
    assert!(ks_two_sample(&a, &c).unwrap().p_value > 0.001);
}

#[test]
fn replicates_are_deterministic() {
    let cfg = Torus::new(2, 8, Norm::Two, 0.5).unwrap();
    for q in [Quantity::Typical, Quantity::Flooding, Quantity::Diameter] {
        let spec = ExperimentSpec::new(cfg.clone(), 12, 77, q).unwrap();
        let a = estimate_scaled(&spec).unwrap();
        let b = estimate_scaled(&spec).unwrap();
        assert_eq!(a, b);
        let other = ExperimentSpec { root_seed: 78, ..spec };
        assert_ne!(a.samples, estimate_scaled(&other).unwrap().samples);
    }
}

#[test]
fn thread_count_does_not_change_samples() {
    let cfg = Torus::new(2, 8, Norm::Two, 1.0).unwrap();
    let spec = ExperimentSpec::new(cfg, 40, 5, Quantity::Typical).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_scaled(&spec).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn two_site_typical_is_one_edge() {
    let cfg = Torus::new(1, 2, Norm::Two, 0.7).unwrap();
    let spec = ExperimentSpec::new(cfg.clone(), 3000, 9, Quantity::Typical).unwrap();
    let s = estimate_scaled(&spec).unwrap();
    assert!((s.mean - 1.0).abs() < 3.0 * s.se);
    let scale = time_scale(&cfg).unwrap();
    assert!((scale - 1.0 / 2f64.ln()).abs() < 1e-15);
    assert!((s.scaled_mean.unwrap() - s.mean / 2f64.ln()).abs() < 1e-12);
}

#[test]
fn fixed_and_uniform_source_agree() {
    let cfg = Torus::new(2, 8, Norm::Two, 1.0).unwrap();
    let uniform = ExperimentSpec::new(cfg.clone(), 4000, 3, Quantity::Typical).unwrap();
    let fixed = ExperimentSpec::new(cfg.clone(), 4000, 4, Quantity::Typical)
        .unwrap()
        .with_source(Site::origin(2))
        .unwrap();
    let a = estimate_scaled(&uniform).unwrap();
    let b = estimate_scaled(&fixed).unwrap();
    let (sa, sb) = (a.scaled_se.unwrap(), b.scaled_se.unwrap());
    assert!((a.scaled_mean.unwrap() - b.scaled_mean.unwrap()).abs() < 3.0 * (sa * sa + sb * sb).sqrt());
}

#[test]
fn oracle_triples_are_ordered() {
    let cfg = Torus::new(2, 5, Norm::Infinity, 0.5).unwrap();
    let spec = ExperimentSpec::new(cfg, 30, 1, Quantity::Diameter).unwrap();
    for t in oracle_triples(&spec).unwrap() {
        assert!(t.typical <= t.flooding && t.flooding <= t.diameter, "{t:?}");
    }
}

#[test]
fn janson_typical_mean_at_alpha_zero() {
    // At α = 0 the target is born k-th with probability 1/(n-1), so
    // E X_{U,V} = H_{n-1} / (n-1).
    let cfg = Torus::new(2, 16, Norm::Two, 0.0).unwrap();
    let n = cfg.volume();
    let spec = ExperimentSpec::new(cfg, 2000, 2, Quantity::Typical).unwrap();
    let s = estimate_scaled(&spec).unwrap();
    let harmonic: f64 = (1..n).map(|j| 1.0 / j as f64).sum();
    let expect = harmonic / (n - 1) as f64;
    assert!((s.mean - expect).abs() < 3.0 * s.se, "{} vs {expect}", s.mean);
    assert!((s.scaled_mean.unwrap() - harmonic / (n as f64).ln()).abs() < 3.0 * s.scaled_se.unwrap());
}

#[test]
fn gumbel_centred_samples() {
    let cfg = Torus::new(2, 32, Norm::Two, 0.0).unwrap();
    let spec = ExperimentSpec::new(cfg, 1000, 8, Quantity::Tau(TauIndex::Exponent(0.5))).unwrap();
    let s = gumbel_test(&spec).unwrap();
    assert!((s.mean - EULER_GAMMA).abs() < 3.5 * s.se, "{} ± {}", s.mean, s.se);
    assert!(s.ks.unwrap().p_value > 0.001);
    let one = ExperimentSpec {
        quantity: Quantity::Tau(TauIndex::Count(1)),
        ..spec
    };
    assert!(gumbel_test(&one).is_err());
}
