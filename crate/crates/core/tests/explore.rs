use lrfpp::explore::{Explorer, StopRule};
use lrfpp::rng::{derive_seed, RunRng};
use lrfpp::stats::{ks_one_sample, ks_two_sample, uniform_site};
use lrfpp::{dijkstra_oracle, Norm, Torus};

fn exp_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - (-x).exp()
    }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn uniform_pair(cfg: &Torus, seed: u64) -> (usize, usize) {
    let mut rng = RunRng::new(seed);
    let u = uniform_site(cfg, &mut rng);
    loop {
        let v = uniform_site(cfg, &mut rng);
        if v != u {
            return (u, v);
        }
    }
}

#[test]
fn first_birth_is_exponential_with_rate_rn() {
    let cfg = Torus::new(2, 8, Norm::Two, 1.0).unwrap();
    let ex = Explorer::new(&cfg).unwrap();
    let rn = ex.rn();
    let xs: Vec<f64> = (0..5000)
        .map(|s| rn * ex.run_from(0, &StopRule::Count(1), s).unwrap().tau(1).unwrap())
        .collect();
    let ks = ks_one_sample(&xs, exp_cdf).unwrap();
    assert!(ks.p_value > 0.001, "{ks:?}");
}

#[test]
fn two_site_torus_is_a_single_exponential_edge() {
    let cfg = Torus::new(1, 2, Norm::Two, 0.5).unwrap();
    let ex = Explorer::new(&cfg).unwrap();
    let xs: Vec<f64> = (0..5000)
        .map(|s| ex.run_from(0, &StopRule::Full, s).unwrap().last_time())
        .collect();
    assert!(ks_one_sample(&xs, exp_cdf).unwrap().p_value > 0.001);
    let ys: Vec<f64> = (0..2000)
        .map(|s| dijkstra_oracle(&cfg.site(0), &cfg, s).unwrap()[1])
        .collect();
    assert!(ks_one_sample(&ys, exp_cdf).unwrap().p_value > 0.001);
}

#[test]
fn janson_times_at_alpha_zero() {
    // τ_{n-1} has the law of Σ E_j / (j(n-j)).
    let cfg = Torus::new(2, 5, Norm::Two, 0.0).unwrap();
    let n = cfg.volume();
    let ex = Explorer::new(&cfg).unwrap();
    let sim: Vec<f64> = (0..5000)
        .map(|s| ex.run_from(0, &StopRule::Full, s).unwrap().last_time())
        .collect();
    let mut rng = RunRng::new(12345);
    let direct: Vec<f64> = (0..5000)
        .map(|_| (1..n).map(|j| rng.exponential((j * (n - j)) as f64)).sum())
        .collect();
    assert!(ks_two_sample(&sim, &direct).unwrap().p_value > 0.001);
    let expect: f64 = (1..n).map(|j| 1.0 / (j * (n - j)) as f64).sum();
    let (m, se) = mean_se(&sim);
    assert!((m - expect).abs() < 3.0 * se, "{m} vs {expect}");
}

#[test]
fn exploration_matches_dijkstra_oracle() {
    let mut grid = Vec::new();
    for d in [1usize, 2] {
        for m in [3usize, 4] {
            for alpha in [0.0, 0.5, 1.0] {
                grid.push(Torus::for_lattice_sums(d, m, Norm::Two, alpha).unwrap());
            }
        }
    }
    let level = 0.01 / grid.len() as f64;
    for (g, cfg) in grid.iter().enumerate() {
        let ex = Explorer::new(cfg).unwrap();
        let samples = 5000u64;
        let explored: Vec<f64> = (0..samples)
            .map(|i| {
                let (u, v) = uniform_pair(cfg, derive_seed(1, &[g as u64, i, 0]));
                let rec = ex
                    .run_from(u, &StopRule::Target(cfg.site(v)), derive_seed(1, &[g as u64, i, 1]))
                    .unwrap();
                rec.last_time()
            })
            .collect();
        let oracle: Vec<f64> = (0..samples)
            .map(|i| {
                let (u, v) = uniform_pair(cfg, derive_seed(2, &[g as u64, i, 0]));
                dijkstra_oracle(&cfg.site(u), cfg, derive_seed(2, &[g as u64, i, 1])).unwrap()[v]
            })
            .collect();
        let ks = ks_two_sample(&explored, &oracle).unwrap();
        assert!(ks.p_value > level, "d={} m={} alpha={}: {ks:?}", cfg.dim(), cfg.side(), cfg.alpha());
    }
}

#[test]
fn ball_sizes_agree_with_oracle() {
    let cfg = Torus::new(2, 4, Norm::Two, 0.5).unwrap();
    let ex = Explorer::new(&cfg).unwrap();
    let t = 0.15;
    let reps = 4000;
    let explored: Vec<f64> = (0..reps)
        .map(|s| ex.run_from(0, &StopRule::Time(t), s).unwrap().births().len() as f64)
        .collect();
    let full: Vec<f64> = (0..reps)
        .map(|s| ex.run_from(0, &StopRule::Full, s + 1_000_000).unwrap().ball_size(t) as f64)
        .collect();
    let oracle: Vec<f64> = (0..reps)
        .map(|s| {
            let dist = dijkstra_oracle(&cfg.site(0), &cfg, s + 7_000_000).unwrap();
            dist.iter().filter(|&&x| x <= t).count() as f64
        })
        .collect();
    let (a, sa) = mean_se(&explored);
    let (b, sb) = mean_se(&oracle);
    let (c, sc) = mean_se(&full);
    assert!(a > 2.0 && a < 14.0, "t should sit inside the bulk: {a}");
    assert!((a - b).abs() < 3.0 * (sa * sa + sb * sb).sqrt(), "{a} vs {b}");
    assert!((c - b).abs() < 3.0 * (sc * sc + sb * sb).sqrt(), "{c} vs {b}");
}

#[test]
fn birth_times_sit_between_the_coupling_bounds() {
    // Σ E_j/(j R_n) ⪯ τ_k ⪯ Σ E_j/(j (R_n - R_j)), compared in mean.
    let cfg = Torus::new(2, 16, Norm::Two, 1.0).unwrap();
    let ex = Explorer::new(&cfg).unwrap();
    let k = 50;
    let rn = ex.rn();
    let taus: Vec<f64> = (0..10_000u64)
        .map(|s| ex.run_from(0, &StopRule::Count(k), s).unwrap().tau(k).unwrap())
        .collect();
    let lower: f64 = (1..=k).map(|j| 1.0 / (j as f64 * rn)).sum();
    let upper: f64 = (1..=k)
        .map(|j| 1.0 / (j as f64 * (rn - ex.nearest().get(j).unwrap())))
        .sum();
    let (m, se) = mean_se(&taus);
    assert!(m > lower - 3.0 * se && m < upper + 3.0 * se, "{lower} <= {m} <= {upper}");
    assert!(lower < upper);
}

#[test]
fn flooding_dominates_a_fixed_target() {
    let cfg = Torus::new(2, 6, Norm::One, 1.0).unwrap();
    let target = 15;
    let mut fixed = Vec::new();
    let mut flood = Vec::new();
    for s in 0..300 {
        let d = dijkstra_oracle(&cfg.site(0), &cfg, s).unwrap();
        let max = d.iter().cloned().fold(0.0, f64::max);
        assert!(max >= d[target]);
        assert_eq!(d[0], 0.0);
        fixed.push(d[target]);
        flood.push(max);
    }
    assert!(mean_se(&flood).0 > mean_se(&fixed).0);
}
