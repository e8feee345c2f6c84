//! Random recursive trees and the bond percolation driven by the innovation
//! indicators.
//!
//! Vertices are 0-based: vertex 0 is the root and vertex `v ≥ 1` hangs below
//! `parent(v) < v`. In the walk, vertex `v` is time step `v + 1` and its parent
//! is the step it copied (`U_{v+1} − 1`). The edge into `v` is open when `v`
//! copied (ε = 0) and closed when `v` drew a fresh innovation (ε = 1).

use std::collections::BTreeMap;

use rand::RngCore;

use crate::error::{check_open_unit, Error, Result};
use crate::rng::{uniform_below, Coin};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursiveTree {
    // parents[v - 1] is the parent of vertex v
    parents: Vec<u32>,
}

impl RecursiveTree {
    pub fn singleton() -> Self {
        RecursiveTree { parents: Vec::new() }
    }

    /// Builds a tree from the parents of vertices `1..n`; entry `k` must be `≤ k`.
    pub fn from_parents(parents: Vec<u32>) -> Result<Self> {
        if let Some((k, &p)) = parents.iter().enumerate().find(|(k, &p)| p as usize > *k) {
            return Err(Error::InvalidInjection(format!(
                "vertex {} has parent {p}, which is not earlier",
                k + 1
            )));
        }
        Ok(RecursiveTree { parents })
    }

    pub fn len(&self) -> usize {
        self.parents.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parents(&self) -> &[u32] {
        &self.parents
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        v.checked_sub(1).map(|k| self.parents[k] as usize)
    }

    /// Edge indicator `I(parent(j) = i)`.
    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.parent(j) == Some(i)
    }

    /// Iterator over `(parent, child)` edges.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parents.iter().enumerate().map(|(k, &p)| (p as usize, k + 1))
    }

    pub fn depths(&self) -> Vec<u32> {
        let mut depth = vec![0u32; self.len()];
        for (k, &p) in self.parents.iter().enumerate() {
            depth[k + 1] = depth[p as usize] + 1;
        }
        depth
    }
}

/// Uniform random recursive tree on `n` vertices.
pub fn grow_tree<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Result<RecursiveTree> {
    if n == 0 {
        return Err(Error::range("n", "tree size must be at least 1"));
    }
    let parents = (1..n).map(|v| uniform_below(rng, v as u32)).collect();
    Ok(RecursiveTree { parents })
}

/// Percolation census: cluster membership, sizes and the size histogram ν.
///
/// Clusters are numbered in the order they are opened, so cluster `j` is the
/// cluster of the `j`-th innovation and `cluster_sizes[j]` is `N_j(n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterStats {
    pub n: usize,
    pub cluster_id: Vec<u32>,
    pub cluster_sizes: Vec<u32>,
    /// size k → ν_k(n)
    pub nu: BTreeMap<u32, u32>,
}

impl ClusterStats {
    /// Occurrence counts `N_j(n)` indexed by innovation.
    pub fn occupancy(&self) -> &[u32] {
        &self.cluster_sizes
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_sizes.len()
    }

    pub fn nu_k(&self, k: u32) -> u32 {
        self.nu.get(&k).copied().unwrap_or(0)
    }

    /// `Z_l(n) = Σ_k k^l ν_k(n)`.
    pub fn z_stat(&self, l: f64) -> f64 {
        if l == 0.0 {
            return self.cluster_count() as f64;
        }
        if l == 1.0 {
            return self.n as f64;
        }
        let pow = |k: u32| -> f64 {
            if l.fract() == 0.0 && l.abs() < 64.0 {
                f64::from(k).powi(l as i32)
            } else {
                f64::from(k).powf(l)
            }
        };
        self.nu.iter().map(|(&k, &c)| f64::from(c) * pow(k)).sum()
    }

    /// `Var(Ŝ_n | clusters) = σ₀² Σ_j N_j(n)² = σ₀² Z_2(n)`.
    pub fn conditional_variance(&self, sigma0sq: f64) -> f64 {
        sigma0sq * self.z_stat(2.0)
    }
}

fn check_eps(n: usize, eps: &[bool]) -> Result<()> {
    if eps.len() != n {
        return Err(Error::InvalidInjection(format!(
            "eps has length {}, tree has {n} vertices",
            eps.len()
        )));
    }
    if !eps[0] {
        return Err(Error::InvalidInjection("eps[0] must be 1".into()));
    }
    Ok(())
}

pub fn percolate(tree: &RecursiveTree, eps: &[bool]) -> Result<ClusterStats> {
    let n = tree.len();
    check_eps(n, eps)?;
    let mut cluster_id = Vec::with_capacity(n);
    let mut cluster_sizes: Vec<u32> = Vec::new();
    for (v, &fresh) in eps.iter().enumerate() {
        let id = if fresh {
            cluster_sizes.push(0);
            (cluster_sizes.len() - 1) as u32
        } else {
            cluster_id[tree.parents[v - 1] as usize]
        };
        cluster_sizes[id as usize] += 1;
        cluster_id.push(id);
    }
    let mut nu = BTreeMap::new();
    for &s in &cluster_sizes {
        *nu.entry(s).or_insert(0) += 1;
    }
    Ok(ClusterStats {
        n,
        cluster_id,
        cluster_sizes,
        nu,
    })
}

/// Δ(T): vertices at even depth minus vertices at odd depth.
pub fn delta_tree(tree: &RecursiveTree) -> i64 {
    let mut parity = vec![false; tree.len()];
    let mut delta = 1i64;
    for (k, &p) in tree.parents.iter().enumerate() {
        let odd = !parity[p as usize];
        parity[k + 1] = odd;
        delta += if odd { -1 } else { 1 };
    }
    delta
}

/// One rooted tree per cluster, vertices relabelled by order of appearance.
pub fn cluster_subtrees(tree: &RecursiveTree, eps: &[bool]) -> Result<Vec<RecursiveTree>> {
    let n = tree.len();
    check_eps(n, eps)?;
    let mut cluster_of = vec![0u32; n];
    let mut local = vec![0u32; n];
    let mut subtrees: Vec<RecursiveTree> = Vec::new();
    for v in 0..n {
        if eps[v] {
            cluster_of[v] = subtrees.len() as u32;
            local[v] = 0;
            subtrees.push(RecursiveTree::singleton());
        } else {
            let p = tree.parents[v - 1] as usize;
            let c = cluster_of[p];
            let sub = &mut subtrees[c as usize];
            cluster_of[v] = c;
            local[v] = sub.len() as u32;
            sub.parents.push(local[p]);
        }
    }
    Ok(subtrees)
}

/// Vertex degrees in the unpercolated tree; the root has no parent edge.
pub fn degrees(tree: &RecursiveTree) -> Vec<u32> {
    let mut deg = vec![1u32; tree.len()];
    deg[0] = 0;
    for &p in &tree.parents {
        deg[p as usize] += 1;
    }
    deg
}

/// μ(T) = Σ_i p^{D_i}, the conditional mean of the singleton-cluster count.
pub fn mu_of_tree(tree: &RecursiveTree, p: f64) -> f64 {
    degrees(tree).iter().map(|&d| p.powi(d as i32)).sum()
}

/// σ²(T) = Σ_i (p^{D_i} − p^{2D_i}) + 2(1−p) Σ_{edges (i,j)} p^{D_i + D_j − 1},
/// the conditional variance of the singleton-cluster count.
pub fn sigma2_of_tree(tree: &RecursiveTree, p: f64) -> f64 {
    sigma2_with_degrees(tree, &degrees(tree), p)
}

fn sigma2_with_degrees(tree: &RecursiveTree, deg: &[u32], p: f64) -> f64 {
    let vertex: f64 = deg
        .iter()
        .map(|&d| {
            let q = p.powi(d as i32);
            q - q * q
        })
        .sum();
    let edge: f64 = tree
        .edges()
        .map(|(i, j)| p.powi((deg[i] + deg[j]) as i32 - 1))
        .sum();
    vertex + 2.0 * (1.0 - p) * edge
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeFunctionals {
    pub mu: f64,
    pub sigma2: f64,
    pub degrees: Vec<u32>,
}

pub fn tree_functionals(tree: &RecursiveTree, p: f64) -> Result<TreeFunctionals> {
    check_open_unit("p", p)?;
    let degrees = degrees(tree);
    let mu = degrees.iter().map(|&d| p.powi(d as i32)).sum();
    let sigma2 = sigma2_with_degrees(tree, &degrees, p);
    Ok(TreeFunctionals {
        mu,
        sigma2,
        degrees,
    })
}

/// Reusable buffers for the Monte Carlo samplers below.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    a: Vec<u32>,
    b: Vec<u32>,
}

/// Runs the percolation for `n` steps and returns `(ν_1(n), ν_2(n))`
/// without materialising the tree.
pub fn sample_small_cluster_counts<R: RngCore + ?Sized>(
    coin: Coin,
    n: usize,
    rng: &mut R,
    scratch: &mut Scratch,
) -> (u32, u32) {
    let cluster_of = &mut scratch.a;
    let sizes = &mut scratch.b;
    cluster_of.clear();
    sizes.clear();
    cluster_of.push(0);
    sizes.push(1);
    let (mut nu1, mut nu2) = (1u32, 0u32);
    for v in 1..n {
        if coin.flip(rng) {
            cluster_of.push(sizes.len() as u32);
            sizes.push(1);
            nu1 += 1;
        } else {
            let c = cluster_of[uniform_below(rng, v as u32) as usize];
            cluster_of.push(c);
            let s = &mut sizes[c as usize];
            match *s {
                1 => {
                    nu1 -= 1;
                    nu2 += 1;
                }
                2 => nu2 -= 1,
                _ => {}
            }
            *s += 1;
        }
    }
    (nu1, nu2)
}

/// Samples μ(T_n) for a fresh random recursive tree; `powers[d] = p^d`
/// must cover degrees up to `n − 1`.
pub fn sample_mu<R: RngCore + ?Sized>(
    n: usize,
    powers: &[f64],
    rng: &mut R,
    scratch: &mut Scratch,
) -> f64 {
    let deg = &mut scratch.a;
    deg.clear();
    deg.resize(n, 1);
    deg[0] = 0;
    for v in 1..n {
        deg[uniform_below(rng, v as u32) as usize] += 1;
    }
    deg.iter().map(|&d| powers[d as usize]).sum()
}

/// `powers[d] = p^d` for `d in 0..len`.
pub fn power_table(p: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut q = 1.0;
    for _ in 0..len {
        out.push(q);
        q *= p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;

    fn tree(parents: &[u32]) -> RecursiveTree {
        RecursiveTree::from_parents(parents.to_vec()).unwrap()
    }

    #[test]
    fn grow_small_trees() {
        let mut rng = replicate_rng(0, 0);
        assert_eq!(grow_tree(1, &mut rng).unwrap().parents(), &[] as &[u32]);
        for _ in 0..20 {
            assert_eq!(grow_tree(2, &mut rng).unwrap().parents(), &[0]);
        }
        assert!(grow_tree(0, &mut rng).is_err());
    }

    #[test]
    fn grow_size_three_is_fair() {
        let mut rng = replicate_rng(5, 0);
        let draws = 100_000;
        let to_root = (0..draws)
            .filter(|_| grow_tree(3, &mut rng).unwrap().parents()[1] == 0)
            .count() as f64;
        let freq = to_root / draws as f64;
        assert!((freq - 0.5).abs() < 4.0 * (0.25f64 / draws as f64).sqrt(), "{freq}");
    }

    #[test]
    fn from_parents_rejects_forward_edges() {
        assert!(RecursiveTree::from_parents(vec![0, 2]).is_err());
        assert!(RecursiveTree::from_parents(vec![1]).is_err());
    }

    #[test]
    fn two_vertex_percolation() {
        let t = tree(&[0]);
        let s = percolate(&t, &[true, true]).unwrap();
        assert_eq!(s.nu, BTreeMap::from([(1, 2)]));
        let s = percolate(&t, &[true, false]).unwrap();
        assert_eq!(s.nu, BTreeMap::from([(2, 1)]));
    }

    #[test]
    fn three_vertex_percolation() {
        for parents in [[0, 0], [0, 1]] {
            let t = tree(&parents);
            let s = percolate(&t, &[true, false, false]).unwrap();
            assert_eq!(s.nu, BTreeMap::from([(3, 1)]));
            assert_eq!(s.z_stat(2.0), 9.0);
            assert_eq!(s.conditional_variance(1.0), 9.0);

            let s = percolate(&t, &[true, true, false]).unwrap();
            assert_eq!(s.nu, BTreeMap::from([(1, 1), (2, 1)]));
            assert_eq!(s.z_stat(2.0), 5.0);
            assert_eq!(s.z_stat(3.0), 9.0);
            assert_eq!(s.conditional_variance(2.0), 10.0);
        }
    }

    #[test]
    fn z_stat_low_orders() {
        let t = tree(&[0, 1, 0, 2, 3]);
        let s = percolate(&t, &[true, false, true, false, false, true]).unwrap();
        assert_eq!(s.z_stat(1.0), 6.0);
        assert_eq!(s.z_stat(0.0), 3.0);
        assert_eq!(s.occupancy().iter().sum::<u32>(), 6);
        let all_fresh = percolate(&t, &[true; 6]).unwrap();
        assert_eq!(all_fresh.conditional_variance(1.0), 6.0);
    }

    #[test]
    fn percolate_rejects_bad_eps() {
        let t = tree(&[0]);
        assert!(percolate(&t, &[true]).is_err());
        assert!(percolate(&t, &[false, true]).is_err());
    }

    #[test]
    fn delta_of_small_trees() {
        assert_eq!(delta_tree(&RecursiveTree::singleton()), 1);
        assert_eq!(delta_tree(&tree(&[0, 0, 1])), 0);
        assert_eq!(delta_tree(&tree(&[0, 1])), 1);
        assert_eq!(delta_tree(&tree(&[0, 0])), -1);
    }

    #[test]
    fn delta_over_all_size_four_trees() {
        let mut values = Vec::new();
        for u3 in 0..2 {
            for u4 in 0..3 {
                values.push(delta_tree(&tree(&[0, u3, u4])));
            }
        }
        values.sort_unstable();
        assert_eq!(values, vec![-2, 0, 0, 0, 0, 2]);
    }

    #[test]
    fn cluster_subtrees_relabel() {
        let t = tree(&[0, 1]);
        let subs = cluster_subtrees(&t, &[true, false, false]).unwrap();
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].parents(), &[0, 1]);
        assert_eq!(delta_tree(&subs[0]), 1);

        let star = cluster_subtrees(&tree(&[0, 0]), &[true, false, false]).unwrap();
        assert_eq!(delta_tree(&star[0]), -1);

        let singles = cluster_subtrees(&t, &[true, true, true]).unwrap();
        assert_eq!(singles.len(), 3);
        assert!(singles.iter().all(|s| s.len() == 1));

        // vertices 0,2,4 form one cluster: 2 hangs off 0, 4 hangs off 2
        let t = tree(&[0, 0, 1, 2]);
        let subs = cluster_subtrees(&t, &[true, true, false, false, false]).unwrap();
        assert_eq!(subs.len(), 2);
        assert_eq!(subs[0].parents(), &[0, 1]);
        assert_eq!(subs[1].parents(), &[0]);
    }

    #[test]
    fn degree_sequences() {
        assert_eq!(degrees(&tree(&[0])), vec![1, 1]);
        assert_eq!(degrees(&tree(&[0, 0])), vec![2, 1, 1]);
        assert_eq!(degrees(&tree(&[0, 1])), vec![1, 2, 1]);
    }

    #[test]
    fn tree_functional_hand_values() {
        let t = tree(&[0]);
        assert_eq!(mu_of_tree(&t, 0.5), 1.0);
        assert!((sigma2_of_tree(&t, 0.5) - 1.0).abs() < 1e-15);
        for p in [0.2, 0.5, 0.9] {
            for parents in [[0, 0], [0, 1]] {
                let f = tree_functionals(&tree(&parents), p).unwrap();
                assert!((f.mu - (p * p + 2.0 * p)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn small_cluster_counter_matches_percolate() {
        // Same random stream consumed in the same order as the trace-free sampler.
        let coin = Coin::new(0.4);
        let mut scratch = Scratch::default();
        for seed in 0..50 {
            let mut rng = replicate_rng(seed, 0);
            let (nu1, nu2) = sample_small_cluster_counts(coin, 200, &mut rng, &mut scratch);

            let mut rng = replicate_rng(seed, 0);
            let mut eps = vec![true];
            let mut parents = Vec::new();
            for v in 1..200u32 {
                if coin.flip(&mut rng) {
                    eps.push(true);
                    parents.push(0);
                } else {
                    eps.push(false);
                    parents.push(uniform_below(&mut rng, v));
                }
            }
            let s = percolate(&tree(&parents), &eps).unwrap();
            assert_eq!((nu1, nu2), (s.nu_k(1), s.nu_k(2)));
        }
    }

    #[test]
    fn sample_mu_matches_mu_of_tree() {
        let p = 0.35;
        let powers = power_table(p, 64);
        let mut scratch = Scratch::default();
        for seed in 0..20 {
            let mut rng = replicate_rng(seed, 1);
            let got = sample_mu(64, &powers, &mut rng, &mut scratch);
            let mut rng = replicate_rng(seed, 1);
            let t = grow_tree(64, &mut rng).unwrap();
            assert!((got - mu_of_tree(&t, p)).abs() < 1e-12);
        }
    }
}
