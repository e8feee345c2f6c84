//! Exact finite-n moments of the cluster census, normalizing sequences,
//! Berry–Esseen rate sequences and the limiting constants.
//!
//! Everything here is deterministic. `E Z_l(n)` follows from taking
//! expectations in the one-step transition of the percolation: a fresh
//! innovation adds a singleton, a copy grows a size-k cluster with
//! probability `k ν_k / n`, so
//!
//! ```text
//! E Z_l(n+1) = E Z_l(n) + p + (1−p)/n · Σ_{j<l} C(l,j) E Z_{j+1}(n).
//! ```

use crate::dist::StepDistribution;
use crate::error::{check_open_unit, Error, Result};
use crate::special::{euler_gamma, harmonic, ln_gamma, ln_gamma_ratio, KahanSum};

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Table of `E Z_l(k)` for `1 ≤ l ≤ lmax`, `1 ≤ k ≤ nmax`, plus `Var Z_2(k)`.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub p: f64,
    pub lmax: usize,
    pub nmax: usize,
    // ez[l - 1][k - 1]
    ez: Vec<Vec<f64>>,
    varz2: Vec<f64>,
}

impl MomentTable {
    /// Builds the table; `lmax` is raised to 3 internally when needed for
    /// `Var Z_2`.
    pub fn new(p: f64, lmax: usize, nmax: usize) -> Result<Self> {
        check_open_unit("p", p)?;
        if lmax == 0 {
            return Err(Error::range("l", "moment order must be at least 1"));
        }
        if nmax == 0 {
            return Err(Error::range("n", "must be at least 1"));
        }
        let depth = lmax.max(3);
        let q = 1.0 - p;
        let coeffs: Vec<Vec<f64>> = (1..=depth)
            .map(|l| (0..l).map(|j| binomial(l, j)).collect())
            .collect();

        let mut ez: Vec<Vec<f64>> = (0..depth).map(|_| Vec::with_capacity(nmax)).collect();
        let mut acc: Vec<KahanSum> = (0..depth)
            .map(|_| {
                let mut s = KahanSum::new();
                s.add(1.0);
                s
            })
            .collect();
        for col in ez.iter_mut() {
            col.push(1.0);
        }
        let mut varz2 = Vec::with_capacity(nmax);
        varz2.push(0.0);
        let mut var_acc = KahanSum::new();

        let mut current = vec![1.0; depth];
        for k in 1..nmax {
            let kf = k as f64;
            // Var Z_2(k+1) = γ'_k Var Z_2(k) + α_k
            let ez2 = current[1];
            let ez3 = current[2];
            let alpha = 4.0 * q / kf * ez3 - 4.0 * q * q / (kf * kf) * ez2 * ez2;
            let prev_var = var_acc.value();
            var_acc.add(4.0 * q / kf * prev_var + alpha);
            varz2.push(var_acc.value());

            let mut next = vec![0.0; depth];
            for l in 1..=depth {
                let cross: f64 = coeffs[l - 1]
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * current[j])
                    .sum();
                acc[l - 1].add(p + q / kf * cross);
                next[l - 1] = acc[l - 1].value();
            }
            if let Some(l) = next.iter().position(|v| !v.is_finite()) {
                return Err(Error::Overflow(format!(
                    "E Z_{}({}) exceeds f64 range at p = {p}",
                    l + 1,
                    k + 1
                )));
            }
            for (col, &v) in ez.iter_mut().zip(&next) {
                col.push(v);
            }
            current = next;
        }
        if varz2.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow(format!("Var Z_2 exceeds f64 range at p = {p}")));
        }
        Ok(MomentTable {
            p,
            lmax,
            nmax,
            ez,
            varz2,
        })
    }

    /// `E Z_l(n)`.
    pub fn ez(&self, l: usize, n: usize) -> f64 {
        assert!(l >= 1 && l <= self.lmax, "order {l} outside table");
        self.ez[l - 1][n - 1]
    }

    pub fn varz2(&self, n: usize) -> f64 {
        self.varz2[n - 1]
    }

    /// `γ_n = (n + 2(1−p))/n`, the growth factor of `E Z_2`.
    pub fn gamma_factor(&self, n: usize) -> f64 {
        (n as f64 + 2.0 * (1.0 - self.p)) / n as f64
    }

    /// `γ'_n = (n + 4(1−p))/n`, the growth factor of `Var Z_2`.
    pub fn gamma_prime_factor(&self, n: usize) -> f64 {
        (n as f64 + 4.0 * (1.0 - self.p)) / n as f64
    }
}

/// `E Z_l(n)` by the exact moment recursion.
pub fn ez(l: usize, n: usize, p: f64) -> Result<f64> {
    Ok(MomentTable::new(p, l, n)?.ez(l, n))
}

/// `Var Z_2(n)`.
pub fn varz2(n: usize, p: f64) -> Result<f64> {
    Ok(MomentTable::new(p, 3, n)?.varz2(n))
}

fn is_half(p: f64) -> bool {
    (p - 0.5).abs() < 1e-12
}

/// Closed form of `E Z_2(n)`: `n H_n` at `p = 1/2`, otherwise
/// `(2(1−p) a_n(2) − n)/(1 − 2p)`.
pub fn ez2_closed(n: usize, p: f64) -> Result<f64> {
    check_open_unit("p", p)?;
    if n == 0 {
        return Err(Error::range("n", "must be at least 1"));
    }
    let nf = n as f64;
    if is_half(p) {
        Ok(nf * harmonic(n as u64))
    } else {
        Ok((2.0 * (1.0 - p) * a_n_l(n, 2.0, p)? - nf) / (1.0 - 2.0 * p))
    }
}

/// `a_{i,j}(x) = Π_{k=i}^{j−1} (1 − x/k)`, with `a_{i,i}(x) = 1`.
pub fn a_product(i: usize, j: usize, x: f64) -> Result<f64> {
    if i == 0 || i > j {
        return Err(Error::range("i", format!("need 1 ≤ i ≤ j, got i={i}, j={j}")));
    }
    if !(x >= 0.0) || x >= i as f64 {
        return Err(Error::range("x", format!("need 0 ≤ x < i = {i}, got {x}")));
    }
    Ok((i..j).map(|k| 1.0 - x / k as f64).product())
}

/// `a_n(l) = Π_{k=1}^{n−1} (k + l(1−p))/k = Γ(n + l(1−p)) / (Γ(n) Γ(l(1−p) + 1))`.
pub fn a_n_l(n: usize, l: f64, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::range("n", "must be at least 1"));
    }
    let s = l * (1.0 - p);
    if !(s >= 0.0) {
        return Err(Error::range("l", format!("need l(1−p) ≥ 0, got {s}")));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let v = (ln_gamma_ratio(n as f64, s) - ln_gamma(s + 1.0)).exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("a_{n}({l}) at p = {p}")))
    }
}

/// The exact normalizer `b_n` for `p ∈ [1/2, 1)`.
pub fn bn(n: u64, p: f64) -> Result<f64> {
    if !(p >= 0.5 && p < 1.0) {
        return Err(Error::range("p", format!("b_n needs p in [1/2, 1), got {p}")));
    }
    if n == 0 {
        return Err(Error::range("n", "must be at least 1"));
    }
    let nf = n as f64;
    if p == 0.5 {
        Ok(nf * nf.ln() + euler_gamma() * nf)
    } else {
        let d = 2.0 * p - 1.0;
        let s = 2.0 - 2.0 * p;
        Ok(nf / d - nf.powf(s) / (d * ln_gamma(s).exp()))
    }
}

/// Growth order `b_l(n)`: `n^{l(1−p)}`, `n log n` or `n` as `l(1−p)` is above,
/// at or below 1.
pub fn b_l(l: f64, n: u64, p: f64) -> Result<f64> {
    check_open_unit("p", p)?;
    if !(l >= 0.0) {
        return Err(Error::range("l", format!("must be nonnegative, got {l}")));
    }
    let nf = n as f64;
    let s = l * (1.0 - p);
    Ok(if s > 1.0 {
        nf.powf(s)
    } else if s == 1.0 {
        nf * nf.ln()
    } else {
        nf
    })
}

fn need_log_domain(n: u64) -> Result<()> {
    if n < 2 {
        Err(Error::range("n", "logarithmic rate needs n ≥ 2"))
    } else {
        Ok(())
    }
}

/// Berry–Esseen rate for the positive walk, `p ∈ [1/2, 1)`.
pub fn rate_delta1(n: u64, p: f64) -> Result<f64> {
    if !(p >= 0.5 && p < 1.0) {
        return Err(Error::range("p", format!("δ₁ needs p in [1/2, 1), got {p}")));
    }
    let nf = n as f64;
    if n == 0 {
        return Err(Error::range("n", "must be at least 1"));
    }
    let two_thirds = 2.0 / 3.0;
    Ok(if p > two_thirds {
        nf.powf(-0.5)
    } else if p == two_thirds {
        need_log_domain(n)?;
        nf.powf(-0.5) * nf.ln()
    } else if p > 0.5 {
        nf.powf(1.5 - 3.0 * p)
    } else {
        need_log_domain(n)?;
        nf.ln().powf(-1.5)
    })
}

/// Berry–Esseen rate for the negative walk, `p ∈ (0, 1)`.
pub fn rate_delta2(n: u64, p: f64) -> Result<f64> {
    check_open_unit("p", p)?;
    if n == 0 {
        return Err(Error::range("n", "must be at least 1"));
    }
    let nf = n as f64;
    let third = 1.0 / 3.0;
    Ok(if p > third {
        nf.powf(-0.5)
    } else if p == third {
        need_log_domain(n)?;
        nf.powf(-0.5) * nf.ln()
    } else {
        nf.powf(-1.5 * p)
    })
}

/// Limiting constants of the walk and the singleton-cluster count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub p: f64,
    pub m1: f64,
    pub m2: f64,
    pub sigma0sq: f64,
    /// b̌ = p m1/(2−p), the drift of the negative walk
    pub checkb: f64,
    /// σ̌² = (m2 − b̌²)/(3−2p)
    pub checksigmasq: f64,
    /// variance constant of ν_1(n)
    pub sigma1sq: f64,
    /// m2/(3−2p) − p m1²/(2−p)
    pub sigma2sq: f64,
    /// variance constant of μ(T_n)
    pub sigma3sq: f64,
    /// mean constant of σ²(T_n)
    pub sigma4sq: f64,
}

impl TheoryConstants {
    /// `σ₂² + m1² σ₁² − σ̌²`
    pub fn walk_identity_residual(&self) -> f64 {
        self.sigma2sq + self.m1 * self.m1 * self.sigma1sq - self.checksigmasq
    }

    /// `σ₃² + σ₄² − σ₁²`
    pub fn cluster_identity_residual(&self) -> f64 {
        self.sigma3sq + self.sigma4sq - self.sigma1sq
    }
}

pub fn theory_constants(p: f64, dist: &StepDistribution) -> Result<TheoryConstants> {
    check_open_unit("p", p)?;
    let (m1, m2) = (dist.m1, dist.m2);
    let q = 1.0 - p;
    let two_p = 2.0 - p;
    let three_2p = 3.0 - 2.0 * p;
    let two_p2 = 2.0 - p * p;
    let checkb = p * m1 / two_p;
    let c = TheoryConstants {
        p,
        m1,
        m2,
        sigma0sq: dist.sigma0sq,
        checkb,
        checksigmasq: (m2 - checkb * checkb) / three_2p,
        sigma1sq: 2.0 * p * q * (3.0 - p) / (three_2p * two_p * two_p),
        sigma2sq: m2 / three_2p - p * m1 * m1 / two_p,
        sigma3sq: 2.0 * p * p * q.powi(4) / (two_p2 * two_p * two_p * three_2p),
        sigma4sq: 2.0 * p * q * (3.0 - p * p * p) / (two_p * two_p2 * three_2p),
    };
    debug_assert!(c.walk_identity_residual().abs() <= 1e-12 * (1.0 + m2));
    debug_assert!(c.cluster_identity_residual().abs() <= 1e-12);
    Ok(c)
}

/// Exact `E μ(T_n) = p Σ_{i<n} a_{i,n}(1−p) + (1−p) a_{1,n}(1−p) + p`.
pub fn exact_mean_mu(n: usize, p: f64) -> Result<f64> {
    check_open_unit("p", p)?;
    if n == 0 {
        return Err(Error::range("n", "must be at least 1"));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let x = 1.0 - p;
    // a_{i,n} for i = n-1 down to 1
    let mut a = 1.0;
    let mut sum = KahanSum::new();
    for i in (1..n).rev() {
        a *= 1.0 - x / i as f64;
        sum.add(a);
    }
    Ok(p * sum.value() + (1.0 - p) * a + p)
}

/// Leading term `np/(2−p)` of `E ν_1(n)` and `E μ(T_n)`.
pub fn nu1_linear_mean(n: usize, p: f64) -> f64 {
    n as f64 * p / (2.0 - p)
}

/// Leading term `np(1−p)/((2−p)(3−2p))` of `E ν_2(n)`.
pub fn nu2_linear_mean(n: usize, p: f64) -> f64 {
    n as f64 * p * (1.0 - p) / ((2.0 - p) * (3.0 - 2.0 * p))
}
