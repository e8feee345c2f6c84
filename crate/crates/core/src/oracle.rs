//! Exhaustive enumeration at small sizes.
//!
//! Every function here walks all `(n−1)!` recursive trees, and where relevant
//! all `2^{n−1}` innovation patterns and all innovation values, by depth-first
//! search. Nothing is sampled and nothing relies on a recursion, which makes
//! these results ground truth for the rest of the crate.

use std::collections::{BTreeMap, HashMap};

use crate::dist::StepDistribution;
use crate::error::{check_open_unit, Error, Result};
use crate::gof::normal_cdf;
use crate::special::KahanSum;
use crate::walk::{normalization, Mode};

/// Largest `n` accepted by the tree and percolation enumerations.
pub const MAX_ENUM_N: usize = 10;
/// Largest `n` accepted by [`enum_walk_pmf`].
pub const MAX_WALK_N: usize = 8;
/// Cap on the number of `(tree, ε, innovation value)` configurations.
pub const MAX_WALK_STATES: f64 = 1e8;
/// Highest power sum `Z_l` reported by [`enum_percolation`].
pub const MAX_POWER: usize = 6;

fn check_size(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::range("n", "must be at least 1"));
    }
    if n > cap {
        return Err(Error::TooLarge(format!("n = {n} exceeds the enumeration cap {cap}")));
    }
    Ok(())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Weighted mean and variance accumulator.
#[derive(Debug, Default, Clone)]
struct Moments {
    s1: KahanSum,
    s2: KahanSum,
}

impl Moments {
    fn add(&mut self, w: f64, x: f64) {
        self.s1.add(w * x);
        self.s2.add(w * x * x);
    }

    fn mean(&self) -> f64 {
        self.s1.value()
    }

    fn var(&self) -> f64 {
        let m = self.mean();
        self.s2.value() - m * m
    }
}

/// DFS over `(U, ε)` carrying the cluster structure and the signed cluster
/// weights Δ incrementally.
struct ConfigWalker {
    n: usize,
    p: f64,
    cluster_of: Vec<usize>,
    parity: Vec<bool>,
    sizes: Vec<i64>,
    deltas: Vec<i64>,
}

impl ConfigWalker {
    fn new(n: usize, p: f64) -> Self {
        ConfigWalker {
            n,
            p,
            cluster_of: vec![0; n],
            parity: vec![false; n],
            sizes: vec![1],
            deltas: vec![1],
        }
    }

    fn run<F: FnMut(&ConfigWalker, f64)>(&mut self, leaf: &mut F) {
        self.visit(1, 1.0, leaf);
    }

    fn visit<F: FnMut(&ConfigWalker, f64)>(&mut self, v: usize, weight: f64, leaf: &mut F) {
        if v == self.n {
            leaf(self, weight);
            return;
        }
        let choice = weight / v as f64;
        for parent in 0..v {
            // fresh innovation: the edge into v is closed
            self.cluster_of[v] = self.sizes.len();
            self.parity[v] = false;
            self.sizes.push(1);
            self.deltas.push(1);
            self.visit(v + 1, choice * self.p, leaf);
            self.sizes.pop();
            self.deltas.pop();

            // copy of `parent`: v joins its cluster one level deeper
            let c = self.cluster_of[parent];
            let odd = !self.parity[parent];
            self.cluster_of[v] = c;
            self.parity[v] = odd;
            let sign = if odd { -1 } else { 1 };
            self.sizes[c] += 1;
            self.deltas[c] += sign;
            self.visit(v + 1, choice * (1.0 - self.p), leaf);
            self.sizes[c] -= 1;
            self.deltas[c] -= sign;
        }
    }
}

/// Exact law of the cluster census at size `n`.
#[derive(Debug, Clone)]
pub struct PercolationEnumeration {
    pub n: usize,
    pub p: f64,
    pub total_mass: f64,
    /// `ez[l]` is `E Z_l(n)` for `0 ≤ l ≤ 6`
    pub ez: Vec<f64>,
    /// `varz[l]` is `Var Z_l(n)`
    pub varz: Vec<f64>,
    /// `nu_pmf[k][c]` is `P(ν_k(n) = c)` for `1 ≤ k ≤ n`
    pub nu_pmf: Vec<Vec<f64>>,
}

impl PercolationEnumeration {
    pub fn nu_mean(&self, k: usize) -> f64 {
        self.nu_pmf[k].iter().enumerate().map(|(c, q)| c as f64 * q).sum()
    }

    pub fn nu_var(&self, k: usize) -> f64 {
        let m = self.nu_mean(k);
        let s2: f64 = self.nu_pmf[k]
            .iter()
            .enumerate()
            .map(|(c, q)| (c * c) as f64 * q)
            .sum();
        s2 - m * m
    }

    /// Nonzero masses of `ν_k(n)` as `(count, probability)`.
    pub fn nu_distribution(&self, k: usize) -> Vec<(usize, f64)> {
        self.nu_pmf[k]
            .iter()
            .enumerate()
            .filter(|(_, &q)| q > 0.0)
            .map(|(c, &q)| (c, q))
            .collect()
    }
}

pub fn enum_percolation(n: usize, p: f64) -> Result<PercolationEnumeration> {
    check_size(n, MAX_ENUM_N)?;
    check_open_unit("p", p)?;
    let mut z = vec![Moments::default(); MAX_POWER + 1];
    let mut nu_acc = vec![vec![KahanSum::new(); n + 1]; n + 1];
    let mut mass = KahanSum::new();
    let mut counts = vec![0usize; n + 1];
    ConfigWalker::new(n, p).run(&mut |w: &ConfigWalker, weight| {
        mass.add(weight);
        counts.iter_mut().for_each(|c| *c = 0);
        for &s in &w.sizes {
            counts[s as usize] += 1;
        }
        for (k, &c) in counts.iter().enumerate().skip(1) {
            nu_acc[k][c].add(weight);
        }
        let mut pow: Vec<f64> = w.sizes.iter().map(|_| 1.0).collect();
        for (l, acc) in z.iter_mut().enumerate() {
            if l > 0 {
                for (q, &s) in pow.iter_mut().zip(&w.sizes) {
                    *q *= s as f64;
                }
            }
            acc.add(weight, pow.iter().sum());
        }
    });
    Ok(PercolationEnumeration {
        n,
        p,
        total_mass: mass.value(),
        ez: z.iter().map(Moments::mean).collect(),
        varz: z.iter().map(Moments::var).collect(),
        nu_pmf: nu_acc
            .iter()
            .map(|row| row.iter().map(KahanSum::value).collect())
            .collect(),
    })
}

/// Visits every recursive tree on `n` vertices with the running degrees.
fn for_each_tree<F: FnMut(&[u32], &[u32])>(n: usize, f: &mut F) {
    fn go<F: FnMut(&[u32], &[u32])>(v: usize, parents: &mut Vec<u32>, deg: &mut Vec<u32>, f: &mut F) {
        if v == deg.len() {
            f(parents, deg);
            return;
        }
        for parent in 0..v {
            parents.push(parent as u32);
            deg[parent] += 1;
            go(v + 1, parents, deg, f);
            deg[parent] -= 1;
            parents.pop();
        }
    }
    let mut deg = vec![1u32; n];
    deg[0] = 0;
    go(1, &mut Vec::with_capacity(n), &mut deg, f);
}

/// Exact averages of the tree functionals over uniform recursive trees.
#[derive(Debug, Clone)]
pub struct TreeEnumeration {
    pub n: usize,
    pub p: f64,
    pub tree_count: usize,
    pub mean_mu: f64,
    pub var_mu: f64,
    pub mean_sigma2: f64,
    /// `degree_moments[l]` is `Σ_i E D_i^l` for `0 ≤ l ≤ 4`
    pub degree_moments: Vec<f64>,
}

pub fn enum_tree_functionals(n: usize, p: f64) -> Result<TreeEnumeration> {
    check_size(n, MAX_ENUM_N)?;
    check_open_unit("p", p)?;
    let weight = 1.0 / factorial(n - 1);
    let mut mu = Moments::default();
    let mut sigma2 = KahanSum::new();
    let mut degree_moments = vec![KahanSum::new(); 5];
    let mut count = 0usize;
    for_each_tree(n, &mut |parents, deg| {
        count += 1;
        let pw = |d: u32| p.powi(d as i32);
        let m: f64 = deg.iter().map(|&d| pw(d)).sum();
        mu.add(weight, m);
        let vertex: f64 = deg.iter().map(|&d| pw(d) - pw(2 * d)).sum();
        let edge: f64 = parents
            .iter()
            .enumerate()
            .map(|(k, &i)| p.powi((deg[i as usize] + deg[k + 1]) as i32 - 1))
            .sum();
        sigma2.add(weight * (vertex + 2.0 * (1.0 - p) * edge));
        for (l, acc) in degree_moments.iter_mut().enumerate() {
            acc.add(weight * deg.iter().map(|&d| f64::from(d).powi(l as i32)).sum::<f64>());
        }
    });
    Ok(TreeEnumeration {
        n,
        p,
        tree_count: count,
        mean_mu: mu.mean(),
        var_mu: mu.var(),
        mean_sigma2: sigma2.value(),
        degree_moments: degree_moments.iter().map(KahanSum::value).collect(),
    })
}

/// Exact law of Δ(T_k) as integer tree counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaPmf {
    pub k: usize,
    pub counts: BTreeMap<i64, u64>,
    /// `(k−1)!`, the number of trees
    pub total: u64,
}

impl DeltaPmf {
    pub fn prob(&self, d: i64) -> f64 {
        self.counts.get(&d).copied().unwrap_or(0) as f64 / self.total as f64
    }

    /// `Σ_T Δ(T)^r`, so that `E Δ^r = moment_sum(r) / total` exactly.
    pub fn moment_sum(&self, r: u32) -> i128 {
        self.counts
            .iter()
            .map(|(&d, &c)| i128::from(d).pow(r) * i128::from(c))
            .sum()
    }

    pub fn moment(&self, r: u32) -> f64 {
        self.moment_sum(r) as f64 / self.total as f64
    }
}

pub fn enum_delta_pmf(k: usize) -> Result<DeltaPmf> {
    check_size(k, MAX_ENUM_N)?;
    let mut counts = BTreeMap::new();
    let mut total = 0u64;
    for_each_tree(k, &mut |parents, _| {
        let mut odd = vec![false; k];
        let mut delta = 1i64;
        for (j, &p) in parents.iter().enumerate() {
            odd[j + 1] = !odd[p as usize];
            delta += if odd[j + 1] { -1 } else { 1 };
        }
        *counts.entry(delta).or_insert(0) += 1;
        total += 1;
    });
    Ok(DeltaPmf { k, counts, total })
}

/// Exact law of `S_n` for a finite-support step law.
#[derive(Debug, Clone)]
pub struct WalkPmf {
    pub n: usize,
    pub p: f64,
    pub mode: Mode,
    /// atoms `(value, probability)` in increasing order
    pub atoms: Vec<(f64, f64)>,
    pub total_mass: f64,
    pub mean: f64,
    pub variance: f64,
    /// `(center, scale)` of the normal approximation, when defined
    pub normalization: Option<(f64, f64)>,
    /// exact Kolmogorov distance of the normalized law to Φ, when defined
    pub dk: Option<f64>,
}

impl WalkPmf {
    pub fn prob(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .find(|(v, _)| (v - x).abs() < 1e-9)
            .map_or(0.0, |&(_, q)| q)
    }
}

/// Supremum distance between the cdf of `atoms` (sorted, masses summing to
/// one) and `Φ((x − center)/scale)`, checked on both sides of every atom.
pub fn exact_dk(atoms: &[(f64, f64)], center: f64, scale: f64) -> f64 {
    let mut below = 0.0;
    let mut worst: f64 = 0.0;
    for &(x, q) in atoms {
        let phi = normal_cdf((x - center) / scale);
        let at = below + q;
        worst = worst.max((below - phi).abs()).max((at - phi).abs());
        below = at;
    }
    worst
}

pub fn enum_walk_pmf(n: usize, p: f64, dist: &StepDistribution, mode: Mode) -> Result<WalkPmf> {
    check_size(n, MAX_WALK_N)?;
    check_open_unit("p", p)?;
    let (scale, support) = dist.integer_support().ok_or_else(|| {
        Error::InvalidDistribution("exact walk laws need a finite support on a decimal grid".into())
    })?;
    let s = support.len() as f64;
    let states = factorial(n - 1) * s * (1.0 + s).powi(n as i32 - 1);
    if states > MAX_WALK_STATES {
        return Err(Error::TooLarge(format!(
            "{states:.3e} configurations exceed the cap {MAX_WALK_STATES:.0e}"
        )));
    }

    // group configurations by their multiset of nonzero innovation weights
    let mut by_weights: HashMap<Vec<i64>, f64> = HashMap::new();
    let mut config_mass = KahanSum::new();
    ConfigWalker::new(n, p).run(&mut |w: &ConfigWalker, weight| {
        config_mass.add(weight);
        let raw = match mode {
            Mode::Positive => &w.sizes,
            Mode::Negative => &w.deltas,
        };
        let mut key: Vec<i64> = raw.iter().copied().filter(|&x| x != 0).collect();
        key.sort_unstable();
        *by_weights.entry(key).or_insert(0.0) += weight;
    });

    let mut keys: Vec<_> = by_weights.into_iter().collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0));
    let mut law: BTreeMap<i64, KahanSum> = BTreeMap::new();
    for (weights, mass) in keys {
        let mut conv: BTreeMap<i64, f64> = BTreeMap::from([(0, 1.0)]);
        for &wt in &weights {
            let mut next = BTreeMap::new();
            for (&x, &q) in &conv {
                for &(v, r) in &support {
                    *next.entry(x + wt * v).or_insert(0.0) += q * r;
                }
            }
            conv = next;
        }
        for (x, q) in conv {
            law.entry(x).or_default().add(mass * q);
        }
    }

    let atoms: Vec<(f64, f64)> = law
        .into_iter()
        .map(|(x, q)| (x as f64 / scale, q.value()))
        .filter(|&(_, q)| q > 0.0)
        .collect();
    let total_mass: f64 = atoms.iter().map(|a| a.1).sum();
    let mut m = Moments::default();
    for &(x, q) in &atoms {
        m.add(q, x);
    }
    let norm = normalization(mode, dist, p, n).ok();
    let dk = norm.map(|(c, sd)| exact_dk(&atoms, c, sd));
    debug_assert!((config_mass.value() - 1.0).abs() < 1e-12);
    Ok(WalkPmf {
        n,
        p,
        mode,
        atoms,
        total_mass,
        mean: m.mean(),
        variance: m.var(),
        normalization: norm,
        dk,
    })
}
