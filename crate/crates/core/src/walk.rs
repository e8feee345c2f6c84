//! Positively and negatively step-reinforced random walks.
//!
//! At step 1 the walk takes a fresh innovation. At each later step `j` it
//! either draws the next innovation (probability `p`, ε_j = 1) or revisits a
//! uniformly chosen earlier step `U_j` (ε_j = 0) and repeats it (positive mode)
//! or repeats it with the sign flipped (negative mode).

use rand::RngCore;

use crate::dist::StepDistribution;
use crate::error::{check_open_unit, Error, Result};
use crate::moments::{bn, theory_constants};
use crate::rng::{replicate_rng, uniform_below, Coin};
use crate::tree::{cluster_subtrees, delta_tree, grow_tree, percolate, ClusterStats, RecursiveTree};

/// Largest horizon accepted for a stored trace.
pub const MAX_HORIZON: usize = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Positive,
    Negative,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Positive => "positive",
            Mode::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    pub p: f64,
    pub mode: Mode,
    pub n: usize,
    pub seed: u64,
}

/// Fully specified randomness, for hand-checked traces.
///
/// `choices[k]` is the 0-based step copied at 0-based step `k + 1`; it must be
/// `≤ k` even where `eps` makes it irrelevant.
#[derive(Debug, Clone, PartialEq)]
pub struct Injected {
    pub eps: Vec<bool>,
    pub choices: Vec<u32>,
    pub innovations: Vec<f64>,
}

pub enum Randomness<'a> {
    Stream(&'a mut dyn RngCore),
    Injected(&'a Injected),
}

/// One realised path. `partial[0] = 0` and `partial[j] = partial[j-1] + steps[j-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkTrace {
    pub mode: Mode,
    pub eps: Vec<bool>,
    pub choices: Vec<u32>,
    pub innovations: Vec<f64>,
    pub steps: Vec<f64>,
    pub partial: Vec<f64>,
}

impl WalkTrace {
    pub fn n(&self) -> usize {
        self.steps.len()
    }

    /// i(n), the number of fresh innovations used.
    pub fn innovation_count(&self) -> usize {
        self.eps.iter().filter(|&&e| e).count()
    }

    pub fn terminal(&self) -> f64 {
        *self.partial.last().expect("partial sums start at 0")
    }

    /// The recursive tree formed by the copy choices.
    pub fn tree(&self) -> RecursiveTree {
        RecursiveTree::from_parents(self.choices.clone()).expect("trace choices are validated")
    }

    pub fn cluster_stats(&self) -> ClusterStats {
        percolate(&self.tree(), &self.eps).expect("trace eps are validated")
    }
}

fn check_horizon(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::range("n", "horizon must be at least 1"));
    }
    if n > MAX_HORIZON {
        return Err(Error::range("n", format!("horizon {n} exceeds {MAX_HORIZON}")));
    }
    Ok(())
}

fn build_trace(
    mode: Mode,
    eps: Vec<bool>,
    choices: Vec<u32>,
    innovations: Vec<f64>,
) -> WalkTrace {
    let n = eps.len();
    let mut steps: Vec<f64> = Vec::with_capacity(n);
    let mut next = 0usize;
    for (v, &fresh) in eps.iter().enumerate() {
        let x = if fresh {
            next += 1;
            innovations[next - 1]
        } else {
            let earlier: f64 = steps[choices[v - 1] as usize];
            match mode {
                Mode::Positive => earlier,
                Mode::Negative => -earlier,
            }
        };
        steps.push(x);
    }
    let mut partial = Vec::with_capacity(n + 1);
    partial.push(0.0);
    let mut s = 0.0;
    for &x in &steps {
        s += x;
        partial.push(s);
    }
    WalkTrace {
        mode,
        eps,
        choices,
        innovations,
        steps,
        partial,
    }
}

fn from_injected(mode: Mode, inj: &Injected) -> Result<WalkTrace> {
    let n = inj.eps.len();
    check_horizon(n)?;
    if !inj.eps[0] {
        return Err(Error::InvalidInjection("eps[0] must be 1".into()));
    }
    if inj.choices.len() != n - 1 {
        return Err(Error::InvalidInjection(format!(
            "expected {} choices, got {}",
            n - 1,
            inj.choices.len()
        )));
    }
    if let Some((k, &c)) = inj.choices.iter().enumerate().find(|(k, &c)| c as usize > *k) {
        return Err(Error::InvalidInjection(format!(
            "choice {c} at step {} does not point to an earlier step",
            k + 1
        )));
    }
    let needed = inj.eps.iter().filter(|&&e| e).count();
    if inj.innovations.len() < needed {
        return Err(Error::InvalidInjection(format!(
            "{needed} innovations needed, {} supplied",
            inj.innovations.len()
        )));
    }
    Ok(build_trace(
        mode,
        inj.eps.clone(),
        inj.choices.clone(),
        inj.innovations[..needed].to_vec(),
    ))
}

fn from_stream<R: RngCore + ?Sized>(
    mode: Mode,
    dist: &StepDistribution,
    p: f64,
    n: usize,
    rng: &mut R,
) -> Result<WalkTrace> {
    check_horizon(n)?;
    check_open_unit("p", p)?;
    let coin = Coin::new(p);
    let mut eps = Vec::with_capacity(n);
    let mut choices = Vec::with_capacity(n - 1);
    let mut innovations = Vec::new();
    eps.push(true);
    innovations.push(dist.sample(rng));
    for v in 1..n {
        let fresh = coin.flip(rng);
        eps.push(fresh);
        choices.push(uniform_below(rng, v as u32));
        if fresh {
            innovations.push(dist.sample(rng));
        }
    }
    Ok(build_trace(mode, eps, choices, innovations))
}

pub fn simulate(
    mode: Mode,
    dist: &StepDistribution,
    p: f64,
    n: usize,
    randomness: Randomness<'_>,
) -> Result<WalkTrace> {
    match randomness {
        Randomness::Stream(rng) => from_stream(mode, dist, p, n, rng),
        Randomness::Injected(inj) => {
            if inj.eps.len() != n {
                return Err(Error::InvalidInjection(format!(
                    "eps has length {}, horizon is {n}",
                    inj.eps.len()
                )));
            }
            from_injected(mode, inj)
        }
    }
}

pub fn simulate_positive(
    dist: &StepDistribution,
    p: f64,
    n: usize,
    randomness: Randomness<'_>,
) -> Result<WalkTrace> {
    simulate(Mode::Positive, dist, p, n, randomness)
}

pub fn simulate_negative(
    dist: &StepDistribution,
    p: f64,
    n: usize,
    randomness: Randomness<'_>,
) -> Result<WalkTrace> {
    simulate(Mode::Negative, dist, p, n, randomness)
}

/// Trace for `params`, drawn from stream 0 of `params.seed`.
pub fn simulate_params(params: &WalkParams, dist: &StepDistribution) -> Result<WalkTrace> {
    let mut rng = replicate_rng(params.seed, 0);
    from_stream(params.mode, dist, params.p, params.n, &mut rng)
}

/// Centering and scale of the normal approximation for `S_n`:
/// `(m1·n, σ₀√b_n)` in positive mode, `(b̌·n, σ̌√n)` in negative mode.
pub fn normalization(mode: Mode, dist: &StepDistribution, p: f64, n: usize) -> Result<(f64, f64)> {
    check_open_unit("p", p)?;
    let nf = n as f64;
    match mode {
        Mode::Positive => {
            if p < 0.5 {
                return Err(Error::range(
                    "p",
                    format!("positive-walk normalization needs p in [1/2, 1), got {p}"),
                ));
            }
            if !(dist.sigma0sq > 0.0) {
                return Err(Error::Degenerate("step variance is zero".into()));
            }
            Ok((dist.m1 * nf, (dist.sigma0sq * bn(n as u64, p)?).sqrt()))
        }
        Mode::Negative => {
            let c = theory_constants(p, dist)?;
            if !(c.checksigmasq > 0.0) {
                return Err(Error::Degenerate("limit variance is zero".into()));
            }
            Ok((c.checkb * nf, (c.checksigmasq * nf).sqrt()))
        }
    }
}

/// `(Ŝ_n − m1 n)/(σ₀√b_n)` or `(Š_n − b̌ n)/(σ̌√n)` depending on the trace mode.
pub fn normalized_statistic(trace: &WalkTrace, dist: &StepDistribution, p: f64) -> Result<f64> {
    let (center, scale) = normalization(trace.mode, dist, p, trace.n())?;
    Ok((trace.terminal() - center) / scale)
}

/// Recomputes `S_n` from the cluster census (`Σ_j N_j X_j` in positive mode,
/// `Σ_j Δ(T_j) X_j` in negative mode) and compares with the recursion.
pub fn representation_check(trace: &WalkTrace) -> bool {
    let tree = trace.tree();
    let weights: Vec<i64> = match trace.mode {
        Mode::Positive => match percolate(&tree, &trace.eps) {
            Ok(stats) => stats.occupancy().iter().map(|&k| i64::from(k)).collect(),
            Err(_) => return false,
        },
        Mode::Negative => match cluster_subtrees(&tree, &trace.eps) {
            Ok(subs) => subs.iter().map(delta_tree).collect(),
            Err(_) => return false,
        },
    };
    if weights.len() != trace.innovations.len() {
        return false;
    }
    let mut total = 0.0;
    let mut magnitude = 0.0;
    for (&w, &x) in weights.iter().zip(&trace.innovations) {
        let term = w as f64 * x;
        total += term;
        magnitude += term.abs();
    }
    (total - trace.terminal()).abs() <= 1e-9 * magnitude.max(1.0)
}

/// Δ(T_k) for a fresh uniform random recursive tree of size `k`.
pub fn sample_delta<R: RngCore + ?Sized>(k: usize, rng: &mut R) -> Result<i64> {
    if k == 0 {
        return Err(Error::range("k", "tree size must be at least 1"));
    }
    Ok(delta_tree(&grow_tree(k, rng)?))
}

/// Terminal value `S_n` without keeping the trace; `steps` is scratch space.
#[inline]
pub fn terminal_sum<R: RngCore + ?Sized>(
    mode: Mode,
    dist: &StepDistribution,
    coin: Coin,
    n: usize,
    rng: &mut R,
    steps: &mut Vec<f64>,
) -> f64 {
    steps.clear();
    let first = dist.sample(rng);
    steps.push(first);
    let mut sum = first;
    for v in 1..n {
        let x = if coin.flip(rng) {
            dist.sample(rng)
        } else {
            let earlier = steps[uniform_below(rng, v as u32) as usize];
            match mode {
                Mode::Positive => earlier,
                Mode::Negative => -earlier,
            }
        };
        steps.push(x);
        sum += x;
    }
    sum
}
