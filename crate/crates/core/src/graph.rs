//! Bernoulli bond percolation on finite simple graphs and degree counts of
//! the retained subgraph.

use std::fmt::Write as _;

use rand::RngCore;
use rayon::prelude::*;

use crate::error::{check_open_unit, Error, Result};
use crate::rng::{replicate_rng, Coin};
use crate::tree::RecursiveTree;

/// Undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    degree: Vec<u32>,
}

impl Graph {
    /// Validates the edge list: endpoints in range, no self-loops, no repeats.
    pub fn new(n: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        let mut degree = vec![0u32; n];
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) leaves the vertex range 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) listed twice")));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        Ok(Graph { n, edges, degree })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n as u32)
            .flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)))
            .collect();
        Graph::new(n, edges).expect("complete graph is simple")
    }

    pub fn path(n: usize) -> Self {
        let edges = (1..n as u32).map(|v| (v - 1, v)).collect();
        Graph::new(n, edges).expect("path is simple")
    }

    pub fn from_tree(tree: &RecursiveTree) -> Self {
        let edges = tree.edges().map(|(i, j)| (i as u32, j as u32)).collect();
        Graph::new(tree.len(), edges).expect("trees are simple")
    }

    /// Parses `n m` followed by `m` lines `u v` with 1-based endpoints.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let parse_pair = |line: usize, s: &str| -> Result<(u64, u64)> {
            let fields: Vec<&str> = s.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::GraphParse {
                    line,
                    reason: format!("expected two integers, found {} fields", fields.len()),
                });
            }
            let num = |f: &str| {
                f.parse::<u64>().map_err(|_| Error::GraphParse {
                    line,
                    reason: format!("`{f}` is not a nonnegative integer"),
                })
            };
            Ok((num(fields[0])?, num(fields[1])?))
        };
        let (line, header) = lines.next().ok_or(Error::GraphParse {
            line: 1,
            reason: "missing `n m` header".into(),
        })?;
        let (n, m) = parse_pair(line, header)?;
        if n > u64::from(u32::MAX) {
            return Err(Error::GraphParse {
                line,
                reason: format!("vertex count {n} too large"),
            });
        }
        let mut edges = Vec::with_capacity(m.min(1 << 20) as usize);
        for _ in 0..m {
            let (line, s) = lines.next().ok_or(Error::GraphParse {
                line: text.lines().count() + 1,
                reason: format!("header announces {m} edges, found {}", edges.len()),
            })?;
            let (u, v) = parse_pair(line, s)?;
            if u == 0 || v == 0 || u > n || v > n {
                return Err(Error::GraphParse {
                    line,
                    reason: format!("endpoint outside 1..={n}"),
                });
            }
            edges.push(((u - 1) as u32, (v - 1) as u32));
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::GraphParse {
                line,
                reason: format!("more than the announced {m} edges"),
            });
        }
        Graph::new(n as usize, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{} {}", u + 1, v + 1);
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }

    pub fn max_degree(&self) -> u32 {
        self.degree.iter().copied().max().unwrap_or(0)
    }

    /// Same graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[u32]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidGraph("permutation length differs from n".into()));
        }
        let mut hit = vec![false; self.n];
        for &t in perm {
            if t as usize >= self.n || std::mem::replace(&mut hit[t as usize], true) {
                return Err(Error::InvalidGraph("relabeling is not a permutation".into()));
            }
        }
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u as usize], perm[v as usize]))
            .collect();
        Graph::new(self.n, edges)
    }
}

/// Keeps each edge independently with probability `ptilde` and returns the
/// retained degree of every vertex.
pub fn percolate_graph<R: RngCore + ?Sized>(graph: &Graph, ptilde: f64, rng: &mut R) -> Result<Vec<u32>> {
    check_open_unit("ptilde", ptilde)?;
    let mut retained = vec![0u32; graph.n];
    percolate_into(graph, Coin::new(ptilde), rng, &mut retained);
    Ok(retained)
}

fn percolate_into<R: RngCore + ?Sized>(graph: &Graph, coin: Coin, rng: &mut R, retained: &mut [u32]) {
    retained.iter_mut().for_each(|d| *d = 0);
    for &(u, v) in &graph.edges {
        if coin.flip(rng) {
            retained[u as usize] += 1;
            retained[v as usize] += 1;
        }
    }
}

/// `counts[d]` = number of vertices with retained degree `d`, for `d ≤ max_d`.
pub fn degree_counts(retained: &[u32], max_d: u32) -> Vec<u32> {
    let mut counts = vec![0u32; max_d as usize + 1];
    for &d in retained {
        if d <= max_d {
            counts[d as usize] += 1;
        }
    }
    counts
}

fn binomial_pmf(k: u32, d: u32, p: f64) -> f64 {
    if d > k {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..d {
        c = c * f64::from(k - i) / f64::from(i + 1);
    }
    c * p.powi(d as i32) * (1.0 - p).powi((k - d) as i32)
}

/// `E N_d = Σ_i C(deg_i, d) p̃^d (1−p̃)^{deg_i − d}`.
pub fn exact_mean_count(graph: &Graph, ptilde: f64, d: u32) -> f64 {
    graph.degree.iter().map(|&k| binomial_pmf(k, d, ptilde)).sum()
}

/// Exact `Var N_d`. Retained degrees of non-adjacent vertices are
/// independent; adjacent vertices share exactly one edge.
pub fn exact_variance_count(graph: &Graph, ptilde: f64, d: u32) -> f64 {
    let marginal: Vec<f64> = graph.degree.iter().map(|&k| binomial_pmf(k, d, ptilde)).collect();
    let diagonal: f64 = marginal.iter().map(|q| q * (1.0 - q)).sum();
    let shared: f64 = graph
        .edges
        .iter()
        .map(|&(u, v)| {
            let (ku, kv) = (graph.degree[u as usize] - 1, graph.degree[v as usize] - 1);
            let with_edge = if d == 0 {
                0.0
            } else {
                ptilde * binomial_pmf(ku, d - 1, ptilde) * binomial_pmf(kv, d - 1, ptilde)
            };
            let without = (1.0 - ptilde) * binomial_pmf(ku, d, ptilde) * binomial_pmf(kv, d, ptilde);
            with_edge + without - marginal[u as usize] * marginal[v as usize]
        })
        .sum();
    diagonal + 2.0 * shared
}

/// The degree-count normal approximation bound evaluated with unit constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerryEsseenBound {
    pub value: f64,
    /// always true: the absolute constant is not known and is set to 1
    pub constant_free: bool,
}

/// `(1/σ²) · (m p̃(1−p̃) + p̃³(1−p̃)³ Σ_i deg_i³)^{1/2}`.
pub fn be_bound(graph: &Graph, ptilde: f64, sigma2: f64) -> Result<BerryEsseenBound> {
    check_open_unit("ptilde", ptilde)?;
    if !(sigma2 > 0.0) {
        return Err(Error::range("sigma2", format!("must be positive, got {sigma2}")));
    }
    let q = ptilde * (1.0 - ptilde);
    let cubes: f64 = graph.degree.iter().map(|&k| f64::from(k).powi(3)).sum();
    let inner = graph.edges.len() as f64 * q + q.powi(3) * cubes;
    Ok(BerryEsseenBound {
        value: inner.sqrt() / sigma2,
        constant_free: true,
    })
}

/// Monte Carlo summary of `N_d` over independent percolations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeCountEstimate {
    pub d: u32,
    pub replicates: u64,
    pub mean: f64,
    pub variance: f64,
}

impl DegreeCountEstimate {
    pub fn std_error(&self) -> f64 {
        (self.variance / self.replicates as f64).sqrt()
    }
}

/// Estimates mean and variance of `N_d` for `0 ≤ d ≤ max_d`; replicate `r`
/// uses stream `r` of `seed`.
pub fn estimate_degree_counts(
    graph: &Graph,
    ptilde: f64,
    max_d: u32,
    replicates: u64,
    seed: u64,
) -> Result<Vec<DegreeCountEstimate>> {
    check_open_unit("ptilde", ptilde)?;
    if replicates < 2 {
        return Err(Error::InsufficientData("need at least two replicates".into()));
    }
    let coin = Coin::new(ptilde);
    let width = max_d as usize + 1;
    // integer sums keep the reduction exact whatever the thread layout
    let (s1, s2) = (0..replicates)
        .into_par_iter()
        .fold(
            || (vec![0u64; width], vec![0u64; width], vec![0u32; graph.n]),
            |(mut s1, mut s2, mut buf), r| {
                let mut rng = replicate_rng(seed, r);
                percolate_into(graph, coin, &mut rng, &mut buf);
                for (d, c) in degree_counts(&buf, max_d).into_iter().enumerate() {
                    s1[d] += u64::from(c);
                    s2[d] += u64::from(c) * u64::from(c);
                }
                (s1, s2, buf)
            },
        )
        .map(|(s1, s2, _)| (s1, s2))
        .reduce(
            || (vec![0u64; width], vec![0u64; width]),
            |(mut a1, mut a2), (b1, b2)| {
                a1.iter_mut().zip(b1).for_each(|(a, b)| *a += b);
                a2.iter_mut().zip(b2).for_each(|(a, b)| *a += b);
                (a1, a2)
            },
        );
    let nf = replicates as f64;
    Ok((0..width)
        .map(|d| {
            let mean = s1[d] as f64 / nf;
            let variance = (s2[d] as f64 - nf * mean * mean) / (nf - 1.0);
            DegreeCountEstimate {
                d: d as u32,
                replicates,
                mean,
                variance: variance.max(0.0),
            }
        })
        .collect())
}
