//! Sample histograms and distribution comparisons.

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::cme::{DistributionVector, TruncatedStateSpace};
use crate::error::{Error, Result};

/// Minimum expected count per bin in a chi-square test.
const MIN_EXPECTED: f64 = 5.0;

/// Counts of samples over an enumerated state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub counts: Vec<u64>,
    /// Samples that fall outside the state space.
    pub outside: u64,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.outside
    }
}

pub fn empirical_histogram(space: &TruncatedStateSpace, samples: &[Vec<f64>]) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut counts = vec![0; space.size()];
    let mut outside = 0;
    for s in samples {
        match space.index_of_real(s) {
            Some(i) => counts[i] += 1,
            None => outside += 1,
        }
    }
    Ok(Histogram { counts, outside })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMetric {
    TotalVariation,
    ChiSquarePValue,
}

pub fn distribution_distance(hist: &Histogram, exact: &DistributionVector, metric: DistanceMetric) -> Result<f64> {
    let total = hist.total();
    if total == 0 {
        return Err(Error::EmptySample);
    }
    if hist.counts.len() != exact.probabilities.len() {
        return Err(Error::ShapeMismatch("histogram and distribution sizes differ".into()));
    }
    let n = total as f64;
    match metric {
        DistanceMetric::TotalVariation => {
            let inside: f64 =
                hist.counts.iter().zip(&exact.probabilities).map(|(&c, &p)| (c as f64 / n - p).abs()).sum();
            Ok(0.5 * (inside + hist.outside as f64 / n))
        }
        DistanceMetric::ChiSquarePValue => {
            let mut observed: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
            let mut expected: Vec<f64> = exact.probabilities.iter().map(|&p| p * n).collect();
            // out-of-box samples join the last bin, where the exact mass is zero
            if let Some(last) = observed.last_mut() {
                *last += hist.outside as f64;
            }
            let (obs, exp) = merge_bins(&mut observed, &mut expected);
            chi_square_p(&obs, &exp)
        }
    }
}

fn merge_bins(observed: &mut [f64], expected: &mut [f64]) -> (Vec<f64>, Vec<f64>) {
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&oi, &ei) in observed.iter().zip(expected.iter()) {
        o += oi;
        e += ei;
        if e >= MIN_EXPECTED {
            obs.push(o);
            exp.push(e);
            o = 0.0;
            e = 0.0;
        }
    }
    if o > 0.0 || e > 0.0 {
        match (obs.last_mut(), exp.last_mut()) {
            (Some(lo), Some(le)) => {
                *lo += o;
                *le += e;
            }
            _ => {
                obs.push(o);
                exp.push(e);
            }
        }
    }
    (obs, exp)
}

fn chi_square_p(observed: &[f64], expected: &[f64]) -> Result<f64> {
    if observed.len() < 2 {
        return Ok(1.0);
    }
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            if e > 0.0 {
                (o - e) * (o - e) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    upper_tail(stat, (observed.len() - 1) as f64)
}

fn upper_tail(stat: f64, dof: f64) -> Result<f64> {
    if !stat.is_finite() {
        return Ok(0.0);
    }
    let dist = ChiSquared::new(dof).map_err(|e| Error::Validation(e.to_string()))?;
    Ok(1.0 - dist.cdf(stat))
}

/// Chi-square homogeneity test between two samples of lattice states.
/// Returns the p-value.
pub fn two_sample_chi2_pvalue(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut bins: BTreeMap<Vec<i64>, (f64, f64)> = BTreeMap::new();
    for s in a {
        bins.entry(lattice_key(s)).or_default().0 += 1.0;
    }
    for s in b {
        bins.entry(lattice_key(s)).or_default().1 += 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let share_a = na / (na + nb);
    // merge consecutive bins until both expected counts reach the floor
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for &(ca, cb) in bins.values() {
        acc.0 += ca;
        acc.1 += cb;
        let pooled = acc.0 + acc.1;
        if pooled * share_a.min(1.0 - share_a) >= MIN_EXPECTED {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => merged.push(acc),
        }
    }
    if merged.len() < 2 {
        return Ok(1.0);
    }
    let stat: f64 = merged
        .iter()
        .map(|&(ca, cb)| {
            let pooled = ca + cb;
            let (ea, eb) = (pooled * share_a, pooled * (1.0 - share_a));
            (ca - ea).powi(2) / ea + (cb - eb).powi(2) / eb
        })
        .sum();
    upper_tail(stat, (merged.len() - 1) as f64)
}

fn lattice_key(x: &[f64]) -> Vec<i64> {
    x.iter().map(|v| v.round() as i64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn tv_extremes() {
        let space = TruncatedStateSpace::new(vec![0], vec![1]).unwrap();
        let exact = DistributionVector::new(vec![1.0, 0.0], 0.0).unwrap();
        let same = empirical_histogram(&space, &[vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(distribution_distance(&same, &exact, DistanceMetric::TotalVariation).unwrap(), 0.0);
        let disjoint = empirical_histogram(&space, &[vec![1.0]]).unwrap();
        assert_eq!(distribution_distance(&disjoint, &exact, DistanceMetric::TotalVariation).unwrap(), 1.0);
        let off = empirical_histogram(&space, &[vec![7.0]]).unwrap();
        assert_eq!(distribution_distance(&off, &exact, DistanceMetric::TotalVariation).unwrap(), 1.0);
    }

    #[test]
    fn empty_sample_rejected() {
        let space = TruncatedStateSpace::new(vec![0], vec![1]).unwrap();
        assert!(matches!(empirical_histogram(&space, &[]), Err(Error::EmptySample)));
        assert!(matches!(two_sample_chi2_pvalue(&[], &[vec![1.0]]), Err(Error::EmptySample)));
    }

    #[test]
    fn exact_draws_are_close() {
        // inverse-cdf draws from a binomial(20, 0.3) target
        let space = TruncatedStateSpace::new(vec![0], vec![20]).unwrap();
        let mut p = vec![0.0; 21];
        let mut c = 1.0;
        for k in 0..=20 {
            p[k] = c * 0.3f64.powi(k as i32) * 0.7f64.powi(20 - k as i32);
            c = c * (20 - k) as f64 / (k + 1) as f64;
        }
        let exact = DistributionVector::new(p.clone(), 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<Vec<f64>> = (0..100_000)
            .map(|_| {
                let u = uniform(&mut rng);
                let mut acc = 0.0;
                let k = p.iter().position(|&q| {
                    acc += q;
                    u < acc
                });
                vec![k.unwrap_or(20) as f64]
            })
            .collect();
        let hist = empirical_histogram(&space, &samples).unwrap();
        assert!(distribution_distance(&hist, &exact, DistanceMetric::TotalVariation).unwrap() < 0.02);
        assert!(distribution_distance(&hist, &exact, DistanceMetric::ChiSquarePValue).unwrap() > 1e-3);
        // a shifted target is rejected
        let mut shifted = p.clone();
        shifted.rotate_right(1);
        let shifted = DistributionVector::new(shifted, 0.0).unwrap();
        assert!(distribution_distance(&hist, &shifted, DistanceMetric::ChiSquarePValue).unwrap() < 1e-6);
    }

    #[test]
    fn two_sample_test_separates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draw = |rng: &mut ChaCha8Rng, bias: f64| -> Vec<Vec<f64>> {
            (0..5000).map(|_| vec![(0..10).filter(|_| uniform(rng) < bias).count() as f64]).collect()
        };
        let a = draw(&mut rng, 0.5);
        let b = draw(&mut rng, 0.5);
        let c = draw(&mut rng, 0.55);
        assert!(two_sample_chi2_pvalue(&a, &b).unwrap() > 1e-3);
        assert!(two_sample_chi2_pvalue(&a, &c).unwrap() < 1e-6);
        assert_eq!(two_sample_chi2_pvalue(&[vec![1.0]], &[vec![1.0]]).unwrap(), 1.0);
    }
}
