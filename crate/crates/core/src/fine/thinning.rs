//! Acceptance-rejection realization of the jump process from one dominating
//! Poisson measure with uniform marks on `[0, W_bar]`.
//!
//! Channel bounds are cumulative: `W_bar_r = sum_{s <= r} max_S w_s`. A
//! candidate arrival with mark `z` fires channel `r` iff
//! `0 <= z - W_bar_{r-1} < w_r(x)`.

use super::trajectory::{PathObserver, Trajectory};
use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::noise::{IntervalNoise, NoiseSource, StreamClass};
use crate::scalar::Scalar;

/// Integer box `S` assumed to contain the dynamics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundingBox {
    lower: Vec<i64>,
    upper: Vec<i64>,
}

impl BoundingBox {
    pub fn new(lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::ShapeMismatch("box bounds of different lengths".into()));
        }
        if let Some(i) = lower.iter().zip(&upper).position(|(l, u)| l > u) {
            return Err(Error::InvalidConfig(format!("box lower bound exceeds upper bound for species {i}")));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn upper(&self) -> &[i64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains<T: Scalar>(&self, x: &[T]) -> bool {
        self.first_violation(x).is_none()
    }

    pub(crate) fn first_violation<T: Scalar>(&self, x: &[T]) -> Option<usize> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .position(|(&v, (&l, &u))| v < T::of(l as f64) || v > T::of(u as f64))
    }
}

/// Cumulative channel bounds `W_bar_1, ..., W_bar_R` over the box.
pub fn channel_bounds<T: Scalar>(net: &ReactionNetwork<T>, bbox: &BoundingBox) -> Vec<T> {
    let lower: Vec<T> = bbox.lower.iter().map(|&v| T::of(v as f64)).collect();
    let upper: Vec<T> = bbox.upper.iter().map(|&v| T::of(v as f64)).collect();
    let mut total = T::zero();
    net.reactions()
        .iter()
        .map(|re| {
            total = total + re.propensity.max_over_box(&lower, &upper, net.volume());
            total
        })
        .collect()
}

/// Samples the jump process over `[t0, t0 + dt]` by thinning.
pub fn thinning_propagate<T: Scalar>(
    net: &ReactionNetwork<T>,
    x0: &[T],
    t0: T,
    dt: T,
    bbox: &BoundingBox,
    noise: IntervalNoise,
) -> Result<Trajectory<T>> {
    if bbox.dim() != net.species_count() || x0.len() != net.species_count() {
        return Err(Error::ShapeMismatch("box, state and network dimensions differ".into()));
    }
    if !(dt > T::zero()) {
        return Err(Error::InvalidConfig(format!("interval length must be positive, got {dt}")));
    }
    if x0.iter().any(|v| v.fract() != T::zero()) {
        return Err(Error::InvalidState("thinning requires an integer start state".into()));
    }
    if let Some(i) = bbox.first_violation(x0) {
        return Err(Error::BoxViolation {
            time: t0.to_f64().unwrap_or(f64::NAN),
            species: i,
            value: x0[i].to_f64().unwrap_or(f64::NAN),
        });
    }
    let end = t0 + dt;
    let mut path = Trajectory::new(t0, end, x0.to_vec());
    let bounds = channel_bounds(net, bbox);
    let Some(&w_bar) = bounds.last() else {
        return Ok(path);
    };
    if !(w_bar > T::zero()) {
        return Ok(path);
    }
    let mut gaps = NoiseSource::new(noise.key(0, StreamClass::ThinningGap));
    let mut marks = NoiseSource::new(noise.key(0, StreamClass::ThinningMark));
    let mut x = x0.to_vec();
    let mut t = t0;
    loop {
        t = t + T::of(gaps.exponential_gap()) / w_bar;
        if t > end {
            break;
        }
        let z = T::of(marks.next_uniform()) * w_bar;
        let r = bounds.partition_point(|&b| b <= z);
        if r >= bounds.len() {
            continue;
        }
        let offset = if r == 0 { z } else { z - bounds[r - 1] };
        if offset >= T::zero() && offset < net.propensity(r, &x) {
            net.fire(r, &mut x);
            if let Some(i) = bbox.first_violation(&x) {
                return Err(Error::BoxViolation {
                    time: t.to_f64().unwrap_or(f64::NAN),
                    species: i,
                    value: x[i].to_f64().unwrap_or(f64::NAN),
                });
            }
            path.jump(t, &x);
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{PropensityForm, Reactants, Reaction};

    fn birth_death() -> ReactionNetwork<f64> {
        ReactionNetwork::new(
            vec!["A".into()],
            vec![
                Reaction::new(PropensityForm::Constant { value: 5.0 }, vec![-1]),
                Reaction::new(PropensityForm::MassAction { rate_constant: 1.0, reactants: Reactants::One(0) }, vec![1]),
            ],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn cumulative_bounds() {
        let b = BoundingBox::new(vec![0], vec![40]).unwrap();
        assert_eq!(channel_bounds(&birth_death(), &b), vec![5.0, 45.0]);
    }

    #[test]
    fn hill_bound_at_lower_corner() {
        let net = ReactionNetwork::new(
            vec!["X".into(), "Y".into()],
            vec![Reaction::new(PropensityForm::HillRepression { a: 3000.0, b: 11000.0, repressor: 1 }, vec![-1, 0])],
            1.0,
        )
        .unwrap();
        let b = BoundingBox::new(vec![0, 10], vec![100, 100]).unwrap();
        assert_eq!(channel_bounds(&net, &b), vec![3000.0 / 11100.0]);
    }

    #[test]
    fn saturated_channel_accepts_every_candidate() {
        let net = ReactionNetwork::new(
            vec!["A".into()],
            vec![Reaction::new(PropensityForm::Constant { value: 2.0 }, vec![-1])],
            1.0,
        )
        .unwrap();
        let b = BoundingBox::new(vec![0], vec![10_000]).unwrap();
        let noise = IntervalNoise::new(3, 0);
        let path = thinning_propagate(&net, &[0.0], 0.0, 100.0, &b, noise).unwrap();
        // count the candidates directly from the gap stream
        let mut gaps = NoiseSource::new(noise.key(0, StreamClass::ThinningGap));
        let mut t = 0.0;
        let mut candidates = 0;
        loop {
            t += gaps.exponential_gap() / 2.0;
            if t > 100.0 {
                break;
            }
            candidates += 1;
        }
        assert_eq!(path.len(), candidates);
    }

    #[test]
    fn start_outside_box_rejected() {
        let b = BoundingBox::new(vec![0], vec![40]).unwrap();
        let err = thinning_propagate(&birth_death(), &[41.0], 0.0, 1.0, &b, IntervalNoise::new(0, 0)).unwrap_err();
        assert!(matches!(err, Error::BoxViolation { .. }));
    }

    #[test]
    fn escape_from_box_detected() {
        let b = BoundingBox::new(vec![0], vec![3]).unwrap();
        let err = thinning_propagate(&birth_death(), &[0.0], 0.0, 50.0, &b, IntervalNoise::new(0, 0)).unwrap_err();
        assert!(matches!(err, Error::BoxViolation { species: 0, .. }));
    }

    #[test]
    fn inverted_box_rejected() {
        assert!(BoundingBox::new(vec![5], vec![4]).is_err());
    }
}
