use std::fmt::Write as _;

use anyhow::{Context, Result};
use reinforced_walks::gof::{rate_experiment, RateConfig};
use reinforced_walks::graph::{be_bound, estimate_degree_counts, exact_mean_count, exact_variance_count};
use reinforced_walks::moments::{bn, ez2_closed, theory_constants, MomentTable};
use reinforced_walks::oracle::{enum_delta_pmf, enum_percolation, enum_tree_functionals, enum_walk_pmf, MAX_WALK_N};
use reinforced_walks::rng::replicate_rng;
use reinforced_walks::walk::{normalized_statistic, representation_check, simulate, Randomness};
use reinforced_walks::{Graph, RateTarget, StepKind};
use serde_json::Value;

use crate::config::{Config, ConfigError};
use crate::verify;

/// A command's CSV body plus any checks that did not hold.
#[derive(Debug, Default)]
pub struct Report {
    pub body: String,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

/// 17 significant digits.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NA".to_string()
    }
}

fn opt_real(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), real)
}

fn config_err(key: &str, e: impl std::fmt::Display) -> anyhow::Error {
    ConfigError::new(key, e.to_string()).into()
}

pub fn simulate_cmd(cfg: &Config) -> Result<Report> {
    let p = cfg.probability("p")?;
    let mode = cfg.mode()?;
    let n = cfg.require_uint("n")? as usize;
    let seed = cfg.uint("seed")?.unwrap_or(0);
    let replicates = cfg.uint("replicates")?.unwrap_or(1);
    let dist = cfg.distribution()?;
    let trace_rows = cfg.boolean("trace")?.unwrap_or(false);
    cfg.reject_unknown()?;
    if replicates == 0 {
        return Err(config_err("replicates", "must be at least 1"));
    }
    if trace_rows && replicates != 1 {
        return Err(config_err("trace", "step rows need replicates = 1"));
    }

    let mut report = Report::default();
    if trace_rows {
        let mut rng = replicate_rng(seed, 0);
        let t = simulate(mode, &dist, p, n, Randomness::Stream(&mut rng)).map_err(|e| config_err("n", e))?;
        report.body.push_str("step,fresh,copied,value,partial\n");
        for j in 0..t.n() {
            let copied = if t.eps[j] {
                "NA".to_string()
            } else {
                (t.choices[j - 1] + 1).to_string()
            };
            let _ = writeln!(
                report.body,
                "{},{},{copied},{},{}",
                j + 1,
                u8::from(t.eps[j]),
                real(t.steps[j]),
                real(t.partial[j + 1])
            );
        }
        if !representation_check(&t) {
            report.failures.push("trace disagrees with its cluster representation".into());
        }
        return Ok(report);
    }

    report
        .body
        .push_str("replicate,n,terminal,normalized,innovations,clusters,z2,representation\n");
    for r in 0..replicates {
        let mut rng = replicate_rng(seed, r);
        let t = simulate(mode, &dist, p, n, Randomness::Stream(&mut rng)).map_err(|e| config_err("n", e))?;
        let stats = t.cluster_stats();
        let ok = representation_check(&t);
        if !ok {
            report.failures.push(format!("replicate {r} disagrees with its cluster representation"));
        }
        let _ = writeln!(
            report.body,
            "{r},{n},{},{},{},{},{},{ok}",
            real(t.terminal()),
            opt_real(normalized_statistic(&t, &dist, p).ok()),
            t.innovation_count(),
            stats.cluster_count(),
            real(stats.z_stat(2.0)),
        );
    }
    Ok(report)
}

/// 1, 2, 5, 10, 20, 50, ... below `n`, then `n`.
fn default_grid(n: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut decade = 1u64;
    'outer: loop {
        for m in [1, 2, 5] {
            let v = m * decade;
            if v >= n {
                break 'outer;
            }
            grid.push(v);
        }
        decade *= 10;
    }
    grid.push(n);
    grid
}

pub fn moments_cmd(cfg: &Config) -> Result<Report> {
    let p = cfg.probability("p")?;
    let n = cfg.require_uint("n")?;
    let lmax = cfg.uint("l")?.unwrap_or(4) as usize;
    let grid = cfg.uint_list("n_grid")?;
    cfg.reject_unknown()?;
    if n == 0 {
        return Err(config_err("n", "must be at least 1"));
    }
    if lmax == 0 || lmax > 16 {
        return Err(config_err("l", "moment order must be between 1 and 16"));
    }
    let mut grid = grid.unwrap_or_else(|| default_grid(n));
    if let Some(bad) = grid.iter().find(|&&g| g == 0 || g > n) {
        return Err(config_err("n_grid", format!("{bad} is outside 1..={n}")));
    }
    grid.sort_unstable();
    grid.dedup();

    let table = MomentTable::new(p, lmax.max(2), n as usize).map_err(|e| config_err("n", e))?;
    let mut body = String::from("n,ez2,ez2_closed,varz2,bn,ratio");
    for l in 1..=lmax {
        let _ = write!(body, ",ez{l}");
    }
    body.push('\n');
    for &k in &grid {
        let ez2 = table.ez(2, k as usize);
        let closed = ez2_closed(k as usize, p).ok();
        let b = bn(k, p).ok();
        let _ = write!(
            body,
            "{k},{},{},{},{},{}",
            real(ez2),
            opt_real(closed),
            real(table.varz2(k as usize)),
            opt_real(b),
            opt_real(b.map(|b| ez2 / b))
        );
        for l in 1..=lmax {
            let _ = write!(body, ",{}", real(table.ez(l, k as usize)));
        }
        body.push('\n');
    }
    Ok(Report {
        body,
        ..Report::default()
    })
}

pub fn enumerate_cmd(cfg: &Config) -> Result<Report> {
    let p = cfg.probability("p")?;
    let n = cfg.require_uint("n")? as usize;
    let dist = cfg.distribution()?;
    let mode = cfg.mode()?;
    let finite = dist.kind() != StepKind::CenteredGaussian;
    let walk = cfg.boolean("walk")?.unwrap_or(n <= MAX_WALK_N && finite);
    cfg.reject_unknown()?;
    if walk && !finite {
        return Err(config_err("walk", "exact walk laws need a finite-support distribution"));
    }

    let perc = enum_percolation(n, p).map_err(|e| config_err("n", e))?;
    let trees = enum_tree_functionals(n, p).map_err(|e| config_err("n", e))?;
    let delta = enum_delta_pmf(n).map_err(|e| config_err("n", e))?;

    let mut rows: Vec<(String, f64)> = vec![("total_mass".into(), perc.total_mass)];
    for l in 0..perc.ez.len() {
        rows.push((format!("E[Z_{l}]"), perc.ez[l]));
        rows.push((format!("Var[Z_{l}]"), perc.varz[l]));
    }
    for k in 1..=n {
        rows.push((format!("E[nu_{k}]"), perc.nu_mean(k)));
        rows.push((format!("Var[nu_{k}]"), perc.nu_var(k)));
        for (c, q) in perc.nu_distribution(k) {
            rows.push((format!("P[nu_{k}={c}]"), q));
        }
    }
    rows.push(("E[mu(T)]".into(), trees.mean_mu));
    rows.push(("Var[mu(T)]".into(), trees.var_mu));
    rows.push(("E[sigma2(T)]".into(), trees.mean_sigma2));
    for (l, v) in trees.degree_moments.iter().enumerate() {
        rows.push((format!("sum_i E[D_i^{l}]"), *v));
    }
    for &d in delta.counts.keys() {
        rows.push((format!("P[delta={d}]"), delta.prob(d)));
    }
    if walk {
        let w = enum_walk_pmf(n, p, &dist, mode).map_err(|e| config_err("n", e))?;
        rows.push(("E[S]".into(), w.mean));
        rows.push(("Var[S]".into(), w.variance));
        for &(x, q) in &w.atoms {
            rows.push((format!("P[S={x}]"), q));
        }
        rows.push(("d_K".into(), w.dk.unwrap_or(f64::NAN)));
    }

    let mut body = String::from("quantity,value\n");
    for (k, v) in rows {
        let _ = writeln!(body, "{k},{}", real(v));
    }
    Ok(Report {
        body,
        ..Report::default()
    })
}

pub fn rate_cmd(cfg: &Config) -> Result<Report> {
    let name = cfg
        .string("target")?
        .ok_or_else(|| ConfigError::new("target", "required"))?
        .to_string();
    let target = RateTarget::from_name(&name).ok_or_else(|| {
        ConfigError::new(
            "target",
            format!("`{name}` is not positive-walk, negative-walk, nu1 or mu-tree"),
        )
    })?;
    let p = cfg.probability("p")?;
    let dist = cfg.distribution()?;
    let n_grid = cfg
        .uint_list("n_grid")?
        .ok_or_else(|| ConfigError::new("n_grid", "required"))?;
    let replicates = cfg.uint("replicates")?.unwrap_or(100_000);
    let seed = cfg.uint("seed")?.unwrap_or(0);
    let alpha = cfg.real("alpha")?.unwrap_or(0.05);
    cfg.reject_unknown()?;

    let table = rate_experiment(&RateConfig {
        target,
        dist,
        p,
        n_grid: n_grid.iter().map(|&n| n as usize).collect(),
        replicates,
        seed,
        alpha,
    })
    .map_err(|e| match &e {
        reinforced_walks::Error::OutOfRange { name, .. } => config_err(name, &e),
        _ => config_err("target", &e),
    })?;
    Ok(Report {
        body: table.csv_body(),
        failures: Vec::new(),
        warnings: table.warnings,
    })
}

fn load_graph(cfg: &Config) -> Result<Graph> {
    match cfg.value("graph") {
        Some(Value::String(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading graph file {path}"))
                .map_err(|e| config_err("graph", format!("{e:#}")))?;
            Graph::from_edge_list(&text).map_err(|e| config_err("graph", e))
        }
        Some(Value::Object(obj)) if obj.len() == 1 => {
            let (kind, size) = obj.iter().next().expect("one entry");
            let n = size
                .as_u64()
                .ok_or_else(|| ConfigError::new(format!("graph.{kind}"), "expected a vertex count"))?
                as usize;
            match kind.as_str() {
                "complete" => Ok(Graph::complete(n)),
                "path" => Ok(Graph::path(n)),
                other => Err(config_err(&format!("graph.{other}"), "expected `complete` or `path`")),
            }
        }
        Some(_) => Err(config_err("graph", "expected an edge-list path or {\"complete\": n}")),
        None => Err(config_err("graph", "required")),
    }
}

pub fn percolation_cmd(cfg: &Config) -> Result<Report> {
    let graph = load_graph(cfg)?;
    let ptilde = cfg.probability("ptilde")?;
    let replicates = cfg.uint("replicates")?.unwrap_or(100_000);
    let seed = cfg.uint("seed")?.unwrap_or(0);
    let max_d = cfg.uint("max_degree")?.map_or(graph.max_degree(), |d| d as u32);
    enum Sigma {
        Exact,
        MonteCarlo,
        Fixed(f64),
    }
    let sigma = match cfg.value("sigma2") {
        None => Sigma::Exact,
        Some(Value::String(s)) if s == "exact" => Sigma::Exact,
        Some(Value::String(s)) if s == "monte-carlo" => Sigma::MonteCarlo,
        Some(_) => match cfg.real("sigma2")? {
            Some(v) if v > 0.0 => Sigma::Fixed(v),
            _ => return Err(config_err("sigma2", "expected `exact`, `monte-carlo` or a positive number")),
        },
    };
    cfg.reject_unknown()?;

    let est = estimate_degree_counts(&graph, ptilde, max_d, replicates, seed)
        .map_err(|e| config_err("replicates", e))?;
    let mut report = Report {
        body: String::from("d,exact_mean,mc_mean,mc_var,std_error,z,exact_var,be_bound\n"),
        ..Report::default()
    };
    for e in est {
        let mean = exact_mean_count(&graph, ptilde, e.d);
        let var = exact_variance_count(&graph, ptilde, e.d);
        let se = e.std_error();
        let z = if se > 0.0 {
            (e.mean - mean) / se
        } else if (e.mean - mean).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        if z.abs() > 4.0 {
            report
                .failures
                .push(format!("d = {}: Monte Carlo mean is {z:.2} standard errors from exact", e.d));
        }
        let s2 = match sigma {
            Sigma::Exact => var,
            Sigma::MonteCarlo => e.variance,
            Sigma::Fixed(v) => v,
        };
        let bound = be_bound(&graph, ptilde, s2).ok().map(|b| b.value);
        let _ = writeln!(
            report.body,
            "{},{},{},{},{},{},{},{}",
            e.d,
            real(mean),
            real(e.mean),
            real(e.variance),
            real(se),
            real(z),
            real(var),
            opt_real(bound)
        );
    }
    report
        .warnings
        .push("be_bound uses an absolute constant of 1 (constant-free)".into());
    Ok(report)
}

pub fn constants_cmd(cfg: &Config) -> Result<Report> {
    let p = cfg.probability("p")?;
    let dist = cfg.distribution()?;
    cfg.reject_unknown()?;
    let c = theory_constants(p, &dist).map_err(|e| config_err("p", e))?;
    let walk = c.walk_identity_residual();
    let cluster = c.cluster_identity_residual();
    let rows = [
        ("p", c.p),
        ("m1", c.m1),
        ("m2", c.m2),
        ("sigma0sq", c.sigma0sq),
        ("checkb", c.checkb),
        ("checksigmasq", c.checksigmasq),
        ("sigma1sq", c.sigma1sq),
        ("sigma2sq", c.sigma2sq),
        ("sigma3sq", c.sigma3sq),
        ("sigma4sq", c.sigma4sq),
        ("walk_identity_residual", walk),
        ("cluster_identity_residual", cluster),
    ];
    let mut report = Report {
        body: String::from("name,value\n"),
        ..Report::default()
    };
    for (k, v) in rows {
        let _ = writeln!(report.body, "{k},{}", real(v));
    }
    if walk.abs() > 1e-12 {
        report.failures.push(format!("walk identity residual {walk:.3e}"));
    }
    if cluster.abs() > 1e-12 {
        report.failures.push(format!("cluster identity residual {cluster:.3e}"));
    }
    Ok(report)
}

pub fn verify_cmd(cfg: &Config) -> Result<Report> {
    let seed = cfg.uint("seed")?.unwrap_or(0);
    cfg.reject_unknown()?;
    let results = verify::run_suite(seed);
    let mut report = Report {
        body: String::from("check,status,detail\n"),
        ..Report::default()
    };
    for r in results {
        let _ = writeln!(
            report.body,
            "{},{},{}",
            r.name,
            if r.pass { "pass" } else { "fail" },
            r.detail.replace(',', ";")
        );
        if !r.pass {
            report.failures.push(format!("{}: {}", r.name, r.detail));
        }
    }
    Ok(report)
}
