//! Deterministic cross-oracle suite behind the `verify` command.

use reinforced_walks::graph::{be_bound, exact_mean_count};
use reinforced_walks::moments::{b_l, bn, exact_mean_mu, ez2_closed, theory_constants, MomentTable};
use reinforced_walks::oracle::{enum_delta_pmf, enum_percolation, enum_tree_functionals, enum_walk_pmf};
use reinforced_walks::rng::replicate_rng;
use reinforced_walks::walk::{representation_check, simulate, Mode, Randomness};
use reinforced_walks::{Graph, StepDistribution};

pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

const PS: [f64; 3] = [0.25, 0.5, 0.75];

fn laws() -> [StepDistribution; 2] {
    [
        StepDistribution::rademacher(),
        StepDistribution::discrete(vec![0.0, 2.0], vec![0.5, 0.5]).expect("valid law"),
    ]
}

fn moments_vs_enumeration() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for p in PS {
        let t = MomentTable::new(p, 4, 8).expect("valid");
        for n in 1..=8 {
            let e = enum_percolation(n, p).expect("small");
            for l in 1..=4 {
                worst = worst.max((t.ez(l, n) - e.ez[l]).abs());
            }
            worst = worst.max((t.varz2(n) - e.varz[2]).abs());
        }
    }
    (worst <= 1e-10, format!("max abs deviation {worst:.3e}"))
}

fn closed_form() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for p in [0.3, 0.5, 0.75, 0.9] {
        let t = MomentTable::new(p, 2, 10_000).expect("valid");
        for n in 1..=10_000 {
            worst = worst.max((ez2_closed(n, p).expect("valid") / t.ez(2, n) - 1.0).abs());
        }
    }
    (worst <= 1e-9, format!("max relative deviation {worst:.3e}"))
}

fn normalizer() -> (bool, String) {
    let mut pass = true;
    let mut out = Vec::new();
    for p in [0.5, 0.6, 0.75, 0.9] {
        let r = MomentTable::new(p, 2, 10_000).expect("valid").ez(2, 10_000) / bn(10_000, p).expect("valid");
        pass &= (r - 1.0).abs() <= if p == 0.5 { 0.02 } else { 0.01 };
        out.push(format!("p={p} ratio {r:.6}"));
    }
    (pass, out.join(" "))
}

fn identities() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for d in laws() {
        for i in 1..=99 {
            let c = theory_constants(i as f64 / 100.0, &d).expect("valid");
            worst = worst
                .max(c.walk_identity_residual().abs())
                .max(c.cluster_identity_residual().abs());
        }
    }
    (worst <= 1e-12, format!("max residual {worst:.3e}"))
}

fn representation(seed: u64) -> (bool, String) {
    let mut bad = 0;
    let mut total = 0;
    for d in laws() {
        for mode in [Mode::Positive, Mode::Negative] {
            for (i, p) in [0.3, 0.5, 0.8].into_iter().enumerate() {
                for r in 0..50u64 {
                    let mut rng = replicate_rng(seed, (i as u64) << 32 | r);
                    let t = simulate(mode, &d, p, 1000, Randomness::Stream(&mut rng)).expect("valid");
                    total += 1;
                    bad += usize::from(!representation_check(&t));
                }
            }
        }
    }
    (bad == 0, format!("{bad} of {total} traces disagree"))
}

fn tree_means() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for p in PS {
        for n in 1..=8 {
            let e = enum_tree_functionals(n, p).expect("small");
            worst = worst.max((exact_mean_mu(n, p).expect("valid") - e.mean_mu).abs());
        }
    }
    (worst <= 1e-12, format!("max abs deviation {worst:.3e}"))
}

fn delta_laws() -> (bool, String) {
    let mut pass = enum_delta_pmf(2).expect("small").prob(0) == 1.0;
    let three = enum_delta_pmf(3).expect("small");
    pass &= three.prob(1) == 0.5 && three.prob(-1) == 0.5;
    for k in 3..=8usize {
        let d = enum_delta_pmf(k).expect("small");
        pass &= 3 * d.moment_sum(2) == k as i128 * i128::from(d.total);
        pass &= d.moment(4) <= 6.0 * (k * k) as f64;
    }
    (pass, "second moment k/3 and fourth moment <= 6k^2 for k=3..8".into())
}

fn walk_laws() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for d in laws() {
        for p in PS {
            let t = MomentTable::new(p, 2, 7).expect("valid");
            for n in 1..=7 {
                let w = enum_walk_pmf(n, p, &d, Mode::Positive).expect("small");
                worst = worst
                    .max((w.total_mass - 1.0).abs())
                    .max((w.mean - d.m1 * n as f64).abs())
                    .max((w.variance - d.sigma0sq * t.ez(2, n)).abs());
            }
        }
    }
    (worst <= 1e-9, format!("max abs deviation {worst:.3e}"))
}

fn graph_values() -> (bool, String) {
    let k3 = Graph::complete(3);
    let path = Graph::path(3);
    let a = exact_mean_count(&k3, 0.5, 1);
    let b = exact_mean_count(&path, 0.5, 0);
    let c = be_bound(&path, 0.5, 1.0).expect("valid").value;
    let pass = (a - 1.5).abs() < 1e-15 && (b - 1.25).abs() < 1e-15 && (c - 0.65625f64.sqrt()).abs() < 1e-15;
    (pass, format!("K3 mean {a} path mean {b} path bound {c:.6}"))
}

fn variance_shape() -> (bool, String) {
    let mut pass = true;
    let mut out = Vec::new();
    for p in [0.3, 0.5, 0.75] {
        let t = MomentTable::new(p, 3, 10_000).expect("valid");
        let ratio = |n: usize| t.varz2(n) / b_l(4.0, n as u64, p).expect("valid");
        let drift = ratio(10_000) / ratio(1000);
        pass &= drift <= 1.5;
        out.push(format!("p={p} drift {drift:.4}"));
    }
    (pass, out.join(" "))
}

pub fn run_suite(seed: u64) -> Vec<CheckResult> {
    let checks: [(&'static str, Box<dyn Fn() -> (bool, String)>); 10] = [
        ("moments_vs_enumeration", Box::new(moments_vs_enumeration)),
        ("closed_form_ez2", Box::new(closed_form)),
        ("ez2_over_bn", Box::new(normalizer)),
        ("constant_identities", Box::new(identities)),
        ("cluster_representation", Box::new(move || representation(seed))),
        ("mean_mu_vs_enumeration", Box::new(tree_means)),
        ("delta_law", Box::new(delta_laws)),
        ("walk_law_moments", Box::new(walk_laws)),
        ("graph_hand_values", Box::new(graph_values)),
        ("varz2_over_b4_drift", Box::new(variance_shape)),
    ];
    checks
        .into_iter()
        .map(|(name, f)| {
            let (pass, detail) = f();
            CheckResult { name, pass, detail }
        })
        .collect()
}
