//! Kolmogorov distances to the normal law, DKW bands and convergence-rate
//! experiments.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dist::StepDistribution;
use crate::error::{Error, Result};
use crate::moments::{nu1_linear_mean, rate_delta1, rate_delta2, theory_constants};
use crate::rng::{replicate_rng, Coin, GRID_STRIDE};
use crate::tree::{power_table, sample_mu, sample_small_cluster_counts, Scratch};
use crate::walk::{normalization, terminal_sum, Mode};

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov distance between the empirical law of `(x − mean)/sd` and Φ.
pub fn dk_sample(sample: &[f64], mean: f64, sd: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    if !(sd > 0.0) {
        return Err(Error::range("sd", format!("must be positive, got {sd}")));
    }
    let mut z: Vec<f64> = sample.iter().map(|&x| (x - mean) / sd).collect();
    z.sort_unstable_by(f64::total_cmp);
    Ok(dk_sorted(&z))
}

fn dk_sorted(z: &[f64]) -> f64 {
    let n = z.len() as f64;
    z.iter().enumerate().fold(0.0, |worst: f64, (i, &x)| {
        let phi = normal_cdf(x);
        worst.max((i + 1) as f64 / n - phi).max(phi - i as f64 / n)
    })
}

/// Dvoretzky–Kiefer–Wolfowitz half-width `√(ln(2/α)/(2N))`.
pub fn dkw_halfwidth(replicates: u64, alpha: f64) -> Result<f64> {
    if replicates == 0 {
        return Err(Error::range("N", "need at least one replicate"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::range("alpha", format!("{alpha} is not in (0, 1)")));
    }
    Ok(((2.0 / alpha).ln() / (2.0 * replicates as f64)).sqrt())
}

/// Statistic whose normal approximation is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateTarget {
    PositiveWalk,
    NegativeWalk,
    Nu1,
    MuTree,
}

impl RateTarget {
    pub fn name(self) -> &'static str {
        match self {
            RateTarget::PositiveWalk => "positive-walk",
            RateTarget::NegativeWalk => "negative-walk",
            RateTarget::Nu1 => "nu1",
            RateTarget::MuTree => "mu-tree",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            RateTarget::PositiveWalk,
            RateTarget::NegativeWalk,
            RateTarget::Nu1,
            RateTarget::MuTree,
        ]
        .into_iter()
        .find(|t| t.name() == name)
    }

    /// Reference rate δ(n) for this target.
    pub fn rate(self, n: u64, p: f64) -> Result<f64> {
        match self {
            RateTarget::PositiveWalk => rate_delta1(n, p),
            RateTarget::NegativeWalk => rate_delta2(n, p),
            RateTarget::Nu1 | RateTarget::MuTree => Ok((n as f64).powf(-0.5)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RateConfig {
    pub target: RateTarget,
    pub dist: StepDistribution,
    pub p: f64,
    pub n_grid: Vec<usize>,
    pub replicates: u64,
    pub seed: u64,
    pub alpha: f64,
}

/// Smallest replicate budget accepted by [`rate_experiment`].
pub const MIN_REPLICATES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub replicates: u64,
    pub dk: f64,
    pub dkw: f64,
    pub delta: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub target: RateTarget,
    pub p: f64,
    pub alpha: f64,
    pub rows: Vec<RateRow>,
    /// present when at least three grid points have `d̂_K > 0`
    pub slope: Option<SlopeFit>,
    /// DKW width is not below `δ(n_max)/3`
    pub inconclusive: bool,
    pub warnings: Vec<String>,
}

impl RateTable {
    /// CSV body: header, one row per grid point, then a `slope` record.
    pub fn csv_body(&self) -> String {
        let mut out = String::from("n,N,dk,dkw,delta,ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.n, r.replicates, r.dk, r.dkw, r.delta, r.ratio
            );
        }
        match self.slope {
            Some(s) => {
                let _ = writeln!(out, "slope,{:.16e},{:.16e}", s.slope, s.stderr);
            }
            None => out.push_str("slope,NA,NA\n"),
        }
        out
    }
}

/// Least squares fit of `ln d̂_K` on `ln n`.
pub fn fit_slope(rows: &[RateRow]) -> Result<SlopeFit> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.dk > 0.0)
        .map(|r| (r.n as f64, r.dk))
        .collect();
    fit_power_law(&points)
}

/// Least squares fit of `ln y` on `ln x` over points with `x, y > 0`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<SlopeFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "slope fit needs three positive points, got {}",
            logs.len()
        )));
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("grid has a single distinct n".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        stderr: (ssr / (k - 2.0) / sxx).sqrt(),
    })
}

/// Centering and scale turning the raw statistic into an approximately
/// standard normal one.
fn target_normalization(cfg: &RateConfig, n: usize) -> Result<(f64, f64)> {
    let nf = n as f64;
    match cfg.target {
        RateTarget::PositiveWalk => normalization(Mode::Positive, &cfg.dist, cfg.p, n),
        RateTarget::NegativeWalk => normalization(Mode::Negative, &cfg.dist, cfg.p, n),
        RateTarget::Nu1 => {
            let c = theory_constants(cfg.p, &cfg.dist)?;
            Ok((nu1_linear_mean(n, cfg.p), (c.sigma1sq * nf).sqrt()))
        }
        RateTarget::MuTree => {
            let c = theory_constants(cfg.p, &cfg.dist)?;
            Ok((nu1_linear_mean(n, cfg.p), (c.sigma3sq * nf).sqrt()))
        }
    }
}

/// Draws `replicates` raw statistics at size `n`; replicate `r` uses stream
/// `stream_base + r` of `seed`.
pub fn sample_statistic(
    target: RateTarget,
    dist: &StepDistribution,
    p: f64,
    n: usize,
    replicates: u64,
    seed: u64,
    stream_base: u64,
) -> Vec<f64> {
    let coin = Coin::new(p);
    match target {
        RateTarget::PositiveWalk | RateTarget::NegativeWalk => {
            let mode = if target == RateTarget::PositiveWalk {
                Mode::Positive
            } else {
                Mode::Negative
            };
            (0..replicates)
                .into_par_iter()
                .map_init(
                    || Vec::with_capacity(n),
                    |steps, r| {
                        let mut rng = replicate_rng(seed, stream_base + r);
                        terminal_sum(mode, dist, coin, n, &mut rng, steps)
                    },
                )
                .collect()
        }
        RateTarget::Nu1 => (0..replicates)
            .into_par_iter()
            .map_init(Scratch::default, |scratch, r| {
                let mut rng = replicate_rng(seed, stream_base + r);
                f64::from(sample_small_cluster_counts(coin, n, &mut rng, scratch).0)
            })
            .collect(),
        RateTarget::MuTree => {
            let powers = power_table(p, n);
            (0..replicates)
                .into_par_iter()
                .map_init(Scratch::default, |scratch, r| {
                    let mut rng = replicate_rng(seed, stream_base + r);
                    sample_mu(n, &powers, &mut rng, scratch)
                })
                .collect()
        }
    }
}

pub fn rate_experiment(cfg: &RateConfig) -> Result<RateTable> {
    if cfg.replicates < MIN_REPLICATES {
        return Err(Error::range(
            "replicates",
            format!("need at least {MIN_REPLICATES}, got {}", cfg.replicates),
        ));
    }
    if cfg.n_grid.is_empty() {
        return Err(Error::range("n_grid", "grid is empty"));
    }
    if let Some(&bad) = cfg.n_grid.iter().find(|&&n| n < 2) {
        return Err(Error::range("n_grid", format!("grid sizes must be at least 2, got {bad}")));
    }
    let dkw = dkw_halfwidth(cfg.replicates, cfg.alpha)?;
    // validate every grid point before spending time on sampling
    let plans = cfg
        .n_grid
        .iter()
        .map(|&n| Ok((n, target_normalization(cfg, n)?, cfg.target.rate(n as u64, cfg.p)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(plans.len());
    for (g, (n, (center, scale), delta)) in plans.into_iter().enumerate() {
        let sample = sample_statistic(
            cfg.target,
            &cfg.dist,
            cfg.p,
            n,
            cfg.replicates,
            cfg.seed,
            g as u64 * GRID_STRIDE,
        );
        let dk = dk_sample(&sample, center, scale)?;
        rows.push(RateRow {
            n,
            replicates: cfg.replicates,
            dk,
            dkw,
            delta,
            ratio: dk / delta,
        });
    }

    let mut warnings = Vec::new();
    let last = rows.iter().max_by_key(|r| r.n).expect("grid is nonempty");
    let inconclusive = dkw >= last.delta / 3.0;
    if inconclusive {
        warnings.push(format!(
            "DKW half-width {dkw:.3e} is not below δ(n_max)/3 = {:.3e}; increase replicates",
            last.delta / 3.0
        ));
    }
    for r in rows.iter().filter(|r| r.dk < dkw) {
        warnings.push(format!(
            "at n = {} the estimate {:.3e} is inside the DKW noise band {dkw:.3e}",
            r.n, r.dk
        ));
    }
    Ok(RateTable {
        target: cfg.target,
        p: cfg.p,
        alpha: cfg.alpha,
        slope: fit_slope(&rows).ok(),
        rows,
        inconclusive,
        warnings,
    })
}
