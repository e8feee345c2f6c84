//! Step laws μ with their exact moments.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Description of a step law, before validation.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    Rademacher,
    CustomDiscrete { values: Vec<f64>, probs: Vec<f64> },
    CenteredGaussian { sd: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Rademacher,
    CustomDiscrete,
    CenteredGaussian,
}

#[derive(Debug, Clone, PartialEq)]
enum Law {
    Rademacher,
    Discrete {
        values: Vec<f64>,
        probs: Vec<f64>,
        // upper sampling thresholds on the 64-bit grid; last is u64::MAX
        cutoffs: Vec<u64>,
    },
    Gaussian {
        sd: f64,
    },
}

/// A validated step law together with `m1 = E X`, `m2 = E X²`,
/// `m3abs = E|X|³` and `sigma0sq = m2 − m1²`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    law: Law,
    pub m1: f64,
    pub m2: f64,
    pub m3abs: f64,
    pub sigma0sq: f64,
}

const PROB_SUM_TOL: f64 = 1e-12;

pub fn make_distribution(spec: &DistributionSpec) -> Result<StepDistribution> {
    match spec {
        DistributionSpec::Rademacher => Ok(StepDistribution::rademacher()),
        DistributionSpec::CustomDiscrete { values, probs } => {
            StepDistribution::discrete(values.clone(), probs.clone())
        }
        DistributionSpec::CenteredGaussian { sd } => StepDistribution::gaussian(*sd),
    }
}

impl StepDistribution {
    pub fn rademacher() -> Self {
        StepDistribution {
            law: Law::Rademacher,
            m1: 0.0,
            m2: 1.0,
            m3abs: 1.0,
            sigma0sq: 1.0,
        }
    }

    pub fn discrete(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if values.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} values but {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution(format!("non-finite support value {v}")));
        }
        if let Some(q) = probs.iter().find(|q| !(**q >= 0.0) || !q.is_finite()) {
            return Err(Error::InvalidDistribution(format!("invalid probability {q}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }

        let m1: f64 = values.iter().zip(&probs).map(|(v, q)| q * v).sum();
        let m2: f64 = values.iter().zip(&probs).map(|(v, q)| q * v * v).sum();
        let m3abs: f64 = values.iter().zip(&probs).map(|(v, q)| q * v.abs().powi(3)).sum();
        let sigma0sq = (m2 - m1 * m1).max(0.0);

        let mut cutoffs = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for q in &probs {
            acc += q;
            cutoffs.push((acc.min(1.0) * 18_446_744_073_709_551_616.0) as u64);
        }
        *cutoffs.last_mut().expect("nonempty") = u64::MAX;

        Ok(StepDistribution {
            law: Law::Discrete {
                values,
                probs,
                cutoffs,
            },
            m1,
            m2,
            m3abs,
            sigma0sq,
        })
    }

    pub fn gaussian(sd: f64) -> Result<Self> {
        if !(sd > 0.0) || !sd.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "gaussian standard deviation must be positive, got {sd}"
            )));
        }
        let m2 = sd * sd;
        Ok(StepDistribution {
            law: Law::Gaussian { sd },
            m1: 0.0,
            m2,
            // E|X|³ = 2σ³√(2/π)
            m3abs: 2.0 * sd * m2 * (2.0 / std::f64::consts::PI).sqrt(),
            sigma0sq: m2,
        })
    }

    pub fn kind(&self) -> StepKind {
        match self.law {
            Law::Rademacher => StepKind::Rademacher,
            Law::Discrete { .. } => StepKind::CustomDiscrete,
            Law::Gaussian { .. } => StepKind::CenteredGaussian,
        }
    }

    /// Finite support as `(value, probability)` pairs; `None` for the gaussian.
    pub fn support(&self) -> Option<Vec<(f64, f64)>> {
        match &self.law {
            Law::Rademacher => Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
            Law::Discrete { values, probs, .. } => {
                Some(values.iter().copied().zip(probs.iter().copied()).collect())
            }
            Law::Gaussian { .. } => None,
        }
    }

    /// Support rescaled onto the integers: returns `(scale, [(value·scale, prob)])`
    /// with the smallest power-of-ten scale that makes every value integral.
    pub fn integer_support(&self) -> Option<(f64, Vec<(i64, f64)>)> {
        let support = self.support()?;
        for digits in 0..=9 {
            let scale = 10f64.powi(digits);
            let scaled: Option<Vec<(i64, f64)>> = support
                .iter()
                .map(|&(v, q)| {
                    let s = v * scale;
                    let r = s.round();
                    ((s - r).abs() <= 1e-9 * scale.max(1.0) && r.abs() < 1e15).then_some((r as i64, q))
                })
                .collect();
            if let Some(scaled) = scaled {
                return Some((scale, scaled));
            }
        }
        None
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.law {
            Law::Rademacher => {
                if rng.next_u32() & 1 == 0 {
                    -1.0
                } else {
                    1.0
                }
            }
            Law::Discrete { values, cutoffs, .. } => {
                let u = rng.next_u64();
                let idx = cutoffs.iter().position(|&c| u < c).unwrap_or(cutoffs.len() - 1);
                values[idx]
            }
            Law::Gaussian { sd } => {
                let z: f64 = StandardNormal.sample(rng);
                sd * z
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;

    #[test]
    fn rademacher_moments() {
        let d = make_distribution(&DistributionSpec::Rademacher).unwrap();
        assert_eq!((d.m1, d.m2, d.sigma0sq, d.m3abs), (0.0, 1.0, 1.0, 1.0));
        assert_eq!(d.kind(), StepKind::Rademacher);
    }

    #[test]
    fn zero_two_law_moments() {
        let d = StepDistribution::discrete(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert_eq!((d.m1, d.m2, d.sigma0sq, d.m3abs), (1.0, 2.0, 1.0, 4.0));
    }

    #[test]
    fn gaussian_third_absolute_moment() {
        // 2·8·√(2/π); mpmath quadrature of 2∫_0^∞ x³ φ(x/2)/2 dx gives 12.766152972845845694
        let d = StepDistribution::gaussian(2.0).unwrap();
        assert_eq!(d.m2, 4.0);
        assert!((d.m3abs - 12.766_152_972_845_845_694).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(StepDistribution::discrete(vec![], vec![]).is_err());
        assert!(StepDistribution::discrete(vec![1.0, 2.0], vec![0.6, 0.6]).is_err());
        assert!(StepDistribution::discrete(vec![1.0, 2.0], vec![-0.1, 1.1]).is_err());
        assert!(StepDistribution::discrete(vec![1.0], vec![0.5, 0.5]).is_err());
        assert!(StepDistribution::gaussian(0.0).is_err());
        assert!(StepDistribution::gaussian(-1.0).is_err());
    }

    #[test]
    fn integer_support_scaling() {
        let d = StepDistribution::discrete(vec![-0.5, 1.25], vec![0.5, 0.5]).unwrap();
        let (scale, s) = d.integer_support().unwrap();
        assert_eq!(scale, 100.0);
        assert_eq!(s, vec![(-50, 0.5), (125, 0.5)]);
        assert!(StepDistribution::gaussian(1.0).unwrap().integer_support().is_none());
    }

    #[test]
    fn discrete_sampling_frequencies() {
        let d = StepDistribution::discrete(vec![0.0, 2.0, 5.0], vec![0.2, 0.3, 0.5]).unwrap();
        let mut rng = replicate_rng(11, 0);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let x = d.sample(&mut rng);
            counts[[0.0, 2.0, 5.0].iter().position(|&v| v == x).unwrap()] += 1;
        }
        for (c, q) in counts.iter().zip([0.2, 0.3, 0.5]) {
            let sd = (n as f64 * q * (1.0 - q)).sqrt();
            assert!((*c as f64 - q * n as f64).abs() < 4.0 * sd);
        }
    }
}
