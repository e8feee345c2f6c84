use reinforced_walks::gof::{
    dk_sample, dkw_halfwidth, normal_cdf, rate_experiment, sample_statistic, RateConfig,
};
use reinforced_walks::graph::{estimate_degree_counts, exact_mean_count, exact_variance_count};
use reinforced_walks::moments::{a_n_l, b_l, bn, ez, theory_constants, MomentTable};
use reinforced_walks::oracle::{enum_percolation, enum_tree_functionals, enum_walk_pmf};
use reinforced_walks::rng::{replicate_rng, Coin};
use reinforced_walks::tree::{grow_tree, percolate, sample_small_cluster_counts, Scratch};
use reinforced_walks::walk::{simulate, terminal_sum, Mode, Randomness};
use reinforced_walks::{Error, Graph, RateTarget, StepDistribution};
use rand_distr::{Distribution, StandardNormal};

fn zero_two() -> StepDistribution {
    StepDistribution::discrete(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap()
}

#[test]
fn enumerated_walk_laws_have_exact_first_two_moments() {
    for dist in [StepDistribution::rademacher(), zero_two()] {
        for p in [0.25, 0.5, 0.75] {
            for n in 1..=7 {
                let w = enum_walk_pmf(n, p, &dist, Mode::Positive).unwrap();
                assert!((w.total_mass - 1.0).abs() < 1e-12);
                assert!((w.mean - dist.m1 * n as f64).abs() < 1e-10, "n={n} p={p}");
                let z2 = ez(2, n, p).unwrap();
                assert!((w.variance - dist.sigma0sq * z2).abs() < 1e-9, "n={n} p={p}");

                let v = enum_walk_pmf(n, p, &dist, Mode::Negative).unwrap();
                assert!((v.total_mass - 1.0).abs() < 1e-12);
                let c = theory_constants(p, &dist).unwrap();
                assert!((v.mean - c.checkb * n as f64).abs() <= 2.0);
            }
        }
    }
}

#[test]
fn enumerated_walk_at_largest_size() {
    let w = enum_walk_pmf(8, 0.75, &StepDistribution::rademacher(), Mode::Positive).unwrap();
    assert!((w.total_mass - 1.0).abs() < 1e-12);
    assert!((w.variance - ez(2, 8, 0.75).unwrap()).abs() < 1e-9);
    let dk = w.dk.unwrap();
    assert!(dk > 0.0 && dk < 0.5);
}

/// Empirical frequencies of each atom agree with the exact law.
fn assert_matches_simulation(mode: Mode, n: usize, p: f64, dist: &StepDistribution, reps: u64) {
    let exact = enum_walk_pmf(n, p, dist, mode).unwrap();
    let coin = Coin::new(p);
    let mut rng = replicate_rng(77, n as u64);
    let mut buf = Vec::new();
    let mut hits = vec![0u64; exact.atoms.len()];
    for _ in 0..reps {
        let s = terminal_sum(mode, dist, coin, n, &mut rng, &mut buf);
        let i = exact
            .atoms
            .iter()
            .position(|&(x, _)| (x - s).abs() < 1e-9)
            .expect("simulated value is an atom");
        hits[i] += 1;
    }
    for (&(x, q), &h) in exact.atoms.iter().zip(&hits) {
        let se = (q * (1.0 - q) / reps as f64).sqrt();
        let freq = h as f64 / reps as f64;
        assert!((freq - q).abs() <= 4.0 * se + 1e-12, "atom {x}: {freq} vs {q}");
    }
}

#[test]
fn negative_two_step_law_matches_simulation() {
    assert_matches_simulation(Mode::Negative, 2, 0.5, &StepDistribution::rademacher(), 1_000_000);
}

#[test]
fn positive_three_step_law_matches_simulation() {
    assert_matches_simulation(Mode::Positive, 3, 0.5, &StepDistribution::rademacher(), 400_000);
    assert_matches_simulation(Mode::Negative, 5, 0.3, &zero_two(), 400_000);
}

#[test]
fn cluster_census_law_matches_simulation() {
    let (n, p, reps) = (6usize, 0.4, 200_000u64);
    let exact = enum_percolation(n, p).unwrap();
    let mut rng = replicate_rng(3, 0);
    let mut hist = vec![vec![0u64; n + 1]; n + 1];
    for _ in 0..reps {
        let t = simulate(Mode::Positive, &StepDistribution::rademacher(), p, n, Randomness::Stream(&mut rng))
            .unwrap();
        let stats = t.cluster_stats();
        for (k, row) in hist.iter_mut().enumerate().skip(1) {
            row[stats.nu_k(k as u32) as usize] += 1;
        }
    }
    for k in 1..=n {
        for c in 0..=n {
            let q = exact.nu_pmf[k][c];
            let se = (q * (1.0 - q) / reps as f64).sqrt();
            let freq = hist[k][c] as f64 / reps as f64;
            assert!((freq - q).abs() <= 4.0 * se + 1e-12, "ν_{k} = {c}: {freq} vs {q}");
        }
    }
}

#[test]
fn enumerated_tree_functionals_match_simulation() {
    let (n, p, reps) = (7usize, 0.5, 200_000u64);
    let exact = enum_tree_functionals(n, p).unwrap();
    let mut rng = replicate_rng(9, 1);
    let (mut s, mut q) = (0.0, 0.0);
    for _ in 0..reps {
        let m = reinforced_walks::tree::mu_of_tree(&grow_tree(n, &mut rng).unwrap(), p);
        s += m;
        q += m * m;
    }
    let mean = s / reps as f64;
    let var = q / reps as f64 - mean * mean;
    assert!((mean - exact.mean_mu).abs() < 4.0 * (exact.var_mu / reps as f64).sqrt());
    assert!((var - exact.var_mu).abs() < 0.05 * exact.var_mu);
}

#[test]
fn singleton_count_variance_decomposes() {
    // Var ν_1 = E σ²(T) + Var μ(T)
    for p in [0.25, 0.5, 0.75] {
        for n in 2..=8 {
            let perc = enum_percolation(n, p).unwrap();
            let tree = enum_tree_functionals(n, p).unwrap();
            assert!((perc.nu_mean(1) - tree.mean_mu).abs() < 1e-12);
            assert!((perc.nu_var(1) - (tree.mean_sigma2 + tree.var_mu)).abs() < 1e-11, "n={n} p={p}");
        }
    }
}

#[test]
fn isolated_tree_vertices_are_singleton_clusters() {
    let (n, p, reps) = (200usize, 0.4, 20_000u64);
    let mut rng = replicate_rng(11, 0);
    let mut scratch = Scratch::default();
    let coin = Coin::new(p);
    let (mut a, mut aa, mut b, mut bb) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..reps {
        let g = Graph::from_tree(&grow_tree(n, &mut rng).unwrap());
        let est = reinforced_walks::graph::percolate_graph(&g, 1.0 - p, &mut rng).unwrap();
        let isolated = est.iter().filter(|&&d| d == 0).count() as f64;
        a += isolated;
        aa += isolated * isolated;
        let nu1 = f64::from(sample_small_cluster_counts(coin, n, &mut rng, &mut scratch).0);
        b += nu1;
        bb += nu1 * nu1;
    }
    let r = reps as f64;
    let (ma, mb) = (a / r, b / r);
    let se = ((aa / r - ma * ma) / r + (bb / r - mb * mb) / r).sqrt();
    assert!((ma - mb).abs() < 4.0 * se, "{ma} vs {mb}");
}

#[test]
fn isolated_vertices_of_fixed_tree_match_percolation() {
    // one fixed tree, graph percolation with p̃ = 1 − p versus ε-percolation
    let mut rng = replicate_rng(12, 0);
    let tree = grow_tree(30, &mut rng).unwrap();
    let g = Graph::from_tree(&tree);
    let p = 0.35;
    let exact = exact_mean_count(&g, 1.0 - p, 0);
    let reps = 50_000;
    let coin = Coin::new(p);
    let mut total = 0u64;
    for _ in 0..reps {
        let mut eps = vec![true];
        eps.extend((1..tree.len()).map(|_| coin.flip(&mut rng)));
        total += u64::from(percolate(&tree, &eps).unwrap().nu_k(1));
    }
    let mean = total as f64 / reps as f64;
    let se = (exact_variance_count(&g, 1.0 - p, 0) / reps as f64).sqrt();
    assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact}");
}

#[test]
fn degree_count_variance_matches_simulation() {
    let g = Graph::complete(12);
    let est = estimate_degree_counts(&g, 0.3, 6, 100_000, 4).unwrap();
    for e in est {
        let exact = exact_variance_count(&g, 0.3, e.d);
        if exact > 0.0 {
            assert!((e.variance / exact - 1.0).abs() < 0.05, "d={}: {} vs {exact}", e.d, e.variance);
        }
        let se = e.std_error();
        assert!((e.mean - exact_mean_count(&g, 0.3, e.d)).abs() <= 4.0 * se + 1e-12);
    }
}

#[test]
fn degree_count_estimates_are_reproducible() {
    let g = Graph::complete(20);
    let a = estimate_degree_counts(&g, 0.2, 5, 5000, 8).unwrap();
    let b = estimate_degree_counts(&g, 0.2, 5, 5000, 8).unwrap();
    assert_eq!(a, b);
}

#[test]
fn moment_growth_matches_normalizers() {
    for p in [0.6, 0.75, 0.9] {
        let r = ez(2, 10_000, p).unwrap() / bn(10_000, p).unwrap();
        assert!((r - 1.0).abs() <= 0.01, "p={p}: {r}");
    }
    for p in [0.3, 0.5, 0.75] {
        let t = MomentTable::new(p, 4, 10_000).unwrap();
        for n in (10..=10_000).step_by(10) {
            assert!(t.varz2(n) <= 64.0 * b_l(4.0, n as u64, p).unwrap(), "n={n} p={p}");
        }
        for l in 1..=4 {
            let ratios: Vec<f64> = [100, 1000, 10_000]
                .iter()
                .map(|&n| t.ez(l, n) / b_l(l as f64, n as u64, p).unwrap())
                .collect();
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().copied().fold(0.0, f64::max);
            // one constant c with c ≤ ratio ≤ 1/c
            let c = lo.min(1.0 / hi);
            assert!(c > 0.05, "l={l} p={p}: {ratios:?}");
        }
    }
}

#[test]
fn frozen_high_precision_values() {
    let a = a_n_l(10_000_000, 2.0, 0.3).unwrap();
    assert!((a / 5_079_479_419.923_904_672_1 - 1.0).abs() < 1e-12);
    let a = a_n_l(10_000, 2.0, 0.75).unwrap();
    assert!((a / 112.836_506_244_408_40 - 1.0).abs() < 1e-12);
    let g = StepDistribution::gaussian(2.0).unwrap();
    assert!((g.m3abs - 12.766_152_972_845_845).abs() < 1e-12);
    assert!((normal_cdf(1.96) - 0.975_002_104_851_779_56).abs() < 1e-15);
}

#[test]
fn quantile_sample_has_half_step_distance() {
    // Φ^{-1} by bisection on the cdf
    let quantile = |u: f64| {
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let n = 100;
    let sample: Vec<f64> = (0..n).map(|i| quantile((i as f64 + 0.5) / n as f64)).collect();
    let dk = dk_sample(&sample, 0.0, 1.0).unwrap();
    assert!((dk - 0.005).abs() < 1e-12, "{dk}");
}

#[test]
fn normal_samples_stay_inside_dkw_band() {
    let width = dkw_halfwidth(100_000, 0.01).unwrap();
    let mut exceed = 0;
    for seed in 0..20 {
        let mut rng = replicate_rng(seed, 0);
        let sample: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        if dk_sample(&sample, 0.0, 1.0).unwrap() > width {
            exceed += 1;
        }
    }
    assert!(exceed <= 1, "{exceed} of 20 seeds outside the band");
}

fn config(target: RateTarget, dist: StepDistribution, p: f64, grid: &[usize], reps: u64) -> RateConfig {
    RateConfig {
        target,
        dist,
        p,
        n_grid: grid.to_vec(),
        replicates: reps,
        seed: 5,
        alpha: 0.05,
    }
}

#[test]
fn negative_walk_with_centered_law_at_small_p() {
    let t = rate_experiment(&config(
        RateTarget::NegativeWalk,
        StepDistribution::rademacher(),
        0.1,
        &[50, 200, 800],
        2000,
    ))
    .unwrap();
    assert_eq!(t.rows.len(), 3);
    assert!(t.rows.iter().all(|r| (0.0..=1.0).contains(&r.dk)));
    assert!(t.slope.is_some());
    // DKW width 0.03 against δ(800) = 800^{-0.15}/3 ≈ 0.12: conclusive
    assert!(!t.inconclusive);
}

#[test]
fn rate_experiment_is_reproducible() {
    let cfg = config(RateTarget::Nu1, StepDistribution::rademacher(), 0.5, &[100, 400, 1600], 1000);
    let a = rate_experiment(&cfg).unwrap();
    let b = rate_experiment(&cfg).unwrap();
    assert_eq!(a.csv_body(), b.csv_body());
    assert!(a.csv_body().starts_with("n,N,dk,dkw,delta,ratio\n100,1000,"));
    assert!(a.inconclusive);
}

#[test]
fn rate_experiment_rejects_bad_configs() {
    let r = StepDistribution::rademacher();
    let bad_p = config(RateTarget::PositiveWalk, r.clone(), 0.3, &[100], 1000);
    assert!(matches!(rate_experiment(&bad_p), Err(Error::OutOfRange { name: "p", .. })));
    let few = config(RateTarget::Nu1, r.clone(), 0.5, &[100], 999);
    assert!(matches!(rate_experiment(&few), Err(Error::OutOfRange { name: "replicates", .. })));
    let degenerate = StepDistribution::discrete(vec![1.0], vec![1.0]).unwrap();
    let flat = config(RateTarget::PositiveWalk, degenerate, 0.7, &[100], 1000);
    assert!(matches!(rate_experiment(&flat), Err(Error::Degenerate(_))));
}

#[test]
fn sampled_statistics_do_not_depend_on_thread_count() {
    let r = StepDistribution::rademacher();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_statistic(RateTarget::NegativeWalk, &r, 0.4, 300, 500, 17, 0))
    };
    assert_eq!(run(1), run(3));
}
