//! Truncated chemical master equation on a box of the lattice, integrated by
//! uniformization.

use crate::error::{Error, Result};
use crate::network::ReactionNetwork;

pub const DEFAULT_STATE_CAP: usize = 1_000_000;
/// Poisson tail mass left out of each uniformization sum.
const TAIL_MASS: f64 = 1e-12;
/// Largest `rate * t` handled in one uniformization pass.
const MAX_POISSON_MEAN: f64 = 50.0;

/// State space `{x : lower <= x <= upper}` enumerated with the first species
/// varying fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedStateSpace {
    lower: Vec<i64>,
    upper: Vec<i64>,
    strides: Vec<usize>,
    size: usize,
}

impl TruncatedStateSpace {
    pub fn new(lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        Self::with_cap(lower, upper, DEFAULT_STATE_CAP)
    }

    pub fn with_cap(lower: Vec<i64>, upper: Vec<i64>, cap: usize) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::ShapeMismatch("box bounds differ in length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::InvalidConfig("box lower bound exceeds upper bound".into()));
        }
        let mut size: u128 = 1;
        for (l, u) in lower.iter().zip(&upper) {
            size = size.saturating_mul((u - l + 1) as u128);
        }
        if size > cap as u128 {
            return Err(Error::StateSpaceTooLarge { size, cap });
        }
        let mut strides = Vec::with_capacity(lower.len());
        let mut stride = 1;
        for (l, u) in lower.iter().zip(&upper) {
            strides.push(stride);
            stride *= (u - l + 1) as usize;
        }
        Ok(Self { lower, upper, strides, size: size as usize })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn upper(&self) -> &[i64] {
        &self.upper
    }

    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut idx = 0;
        for i in 0..x.len() {
            if x[i] < self.lower[i] || x[i] > self.upper[i] {
                return None;
            }
            idx += (x[i] - self.lower[i]) as usize * self.strides[i];
        }
        Some(idx)
    }

    /// Index of a real-valued state, `None` if it is off the lattice or outside.
    pub fn index_of_real(&self, x: &[f64]) -> Option<usize> {
        if x.iter().any(|v| v.fract() != 0.0) {
            return None;
        }
        let ints: Vec<i64> = x.iter().map(|&v| v as i64).collect();
        self.index_of(&ints)
    }

    pub fn state_at(&self, mut index: usize) -> Vec<i64> {
        let mut x = vec![0; self.dim()];
        for i in 0..self.dim() {
            let width = (self.upper[i] - self.lower[i] + 1) as usize;
            x[i] = self.lower[i] + (index % width) as i64;
            index /= width;
        }
        x
    }
}

/// Generator stored as `(row, col, value)` triplets, duplicates summed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGenerator {
    size: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseGenerator {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.size]; self.size];
        for &(i, j, v) in &self.entries {
            m[i][j] += v;
        }
        m
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.size];
        for &(_, j, v) in &self.entries {
            s[j] += v;
        }
        s
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.size];
        for &(i, j, v) in &self.entries {
            if i == j {
                d[i] += v;
            }
        }
        d
    }

    /// `y = A p`.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.size];
        for &(i, j, v) in &self.entries {
            y[i] += v * p[j];
        }
        y
    }
}

/// Builds `A` with `dp/dt = A p`. Transitions that leave the box are dropped
/// from both the target and the outflow.
pub fn cme_generator(net: &ReactionNetwork<f64>, space: &TruncatedStateSpace) -> Result<SparseGenerator> {
    if space.dim() != net.species_count() {
        return Err(Error::ShapeMismatch("state space and network dimensions differ".into()));
    }
    let mut entries = Vec::new();
    let mut state = vec![0.0; space.dim()];
    for col in 0..space.size() {
        let x = space.state_at(col);
        for (s, &v) in state.iter_mut().zip(&x) {
            *s = v as f64;
        }
        let mut outflow = 0.0;
        for (r, reaction) in net.reactions().iter().enumerate() {
            let w = net.propensity(r, &state);
            if w == 0.0 {
                continue;
            }
            let target: Vec<i64> = x.iter().zip(&reaction.stoich).map(|(&a, &n)| a - n as i64).collect();
            if let Some(row) = space.index_of(&target) {
                if row != col {
                    entries.push((row, col, w));
                    outflow += w;
                }
            }
        }
        entries.push((col, col, -outflow));
    }
    Ok(SparseGenerator { size: space.size(), entries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVector {
    pub probabilities: Vec<f64>,
    pub time: f64,
}

impl DistributionVector {
    pub fn new(probabilities: Vec<f64>, time: f64) -> Result<Self> {
        if probabilities.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Validation("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("probabilities sum to {total}")));
        }
        Ok(Self { probabilities, time })
    }

    pub fn point_mass(space: &TruncatedStateSpace, x: &[i64], time: f64) -> Result<Self> {
        let idx =
            space.index_of(x).ok_or_else(|| Error::InvalidState(format!("{x:?} lies outside the state space")))?;
        let mut p = vec![0.0; space.size()];
        p[idx] = 1.0;
        Ok(Self { probabilities: p, time })
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Marginal mean of species `i`.
    pub fn mean(&self, space: &TruncatedStateSpace, i: usize) -> f64 {
        self.probabilities.iter().enumerate().map(|(k, &p)| p * space.state_at(k)[i] as f64).sum()
    }
}

/// Distribution after time `t` from `p0`.
pub fn cme_evolve(a: &SparseGenerator, p0: &DistributionVector, t: f64) -> Result<DistributionVector> {
    if p0.probabilities.len() != a.size() {
        return Err(Error::ShapeMismatch("distribution and generator sizes differ".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidConfig(format!("evolution time must be nonnegative, got {t}")));
    }
    let rate = a.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if t == 0.0 || rate == 0.0 {
        return Ok(DistributionVector { probabilities: p0.probabilities.clone(), time: p0.time + t });
    }
    let passes = ((rate * t) / MAX_POISSON_MEAN).ceil().max(1.0) as usize;
    let h = t / passes as f64;
    let mut p = p0.probabilities.clone();
    for _ in 0..passes {
        p = uniformization_pass(a, &p, rate, h);
    }
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    Ok(DistributionVector { probabilities: p, time: p0.time + t })
}

fn uniformization_pass(a: &SparseGenerator, p: &[f64], rate: f64, h: f64) -> Vec<f64> {
    let mean = rate * h;
    let mut weight = (-mean).exp();
    let mut cumulative = weight;
    let mut term = p.to_vec();
    let mut out: Vec<f64> = term.iter().map(|&v| weight * v).collect();
    let max_terms = (mean + 20.0 * mean.sqrt() + 100.0) as usize;
    for k in 1..=max_terms {
        if 1.0 - cumulative < TAIL_MASS {
            break;
        }
        // term <- (I + A / rate) term
        let at = a.apply(&term);
        for (v, d) in term.iter_mut().zip(&at) {
            *v += d / rate;
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        weight *= mean / k as f64;
        cumulative += weight;
        for (o, &v) in out.iter_mut().zip(&term) {
            *o += weight * v;
        }
    }
    out
}
