//! Monte-Carlo check of the jump-martingale bound
//! `E |X_J(t)|^2 <= |N|^2 W t` with
//! `X_J(t) = X_t - X_0 + int_0^t sum_r N_r w_r(X_s) ds`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fine::{channel_bounds, nrm_propagate, BoundingBox, Trajectory, DEFAULT_EVENT_CAP};
use crate::network::ReactionNetwork;
use crate::noise::IntervalNoise;

#[derive(Debug, Clone, PartialEq)]
pub struct JumpBoundReport {
    pub estimate: f64,
    pub standard_error: f64,
    pub bound: f64,
    pub replicas: usize,
    /// `estimate <= bound + 3 SE`.
    pub pass: bool,
}

impl JumpBoundReport {
    /// Two-sided agreement, for cases where the bound is attained.
    pub fn matches_bound(&self) -> bool {
        (self.estimate - self.bound).abs() <= 3.0 * self.standard_error
    }
}

/// Sum of per-channel propensity maxima over the box.
pub fn max_total_intensity(net: &ReactionNetwork<f64>, bbox: &BoundingBox) -> f64 {
    // the bounds are cumulative
    channel_bounds(net, bbox).last().copied().unwrap_or(0.0)
}

/// `X_J(t)` of one recorded path.
pub fn jump_term(net: &ReactionNetwork<f64>, path: &Trajectory<f64>) -> Vec<f64> {
    let d = net.species_count();
    let mut xj: Vec<f64> = path.final_state().iter().zip(path.initial_state()).map(|(a, b)| a - b).collect();
    for (from, to, state) in path.segments() {
        let span = to - from;
        for (r, reaction) in net.reactions().iter().enumerate() {
            let w = net.propensity(r, state);
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                xj[i] += reaction.stoich[i] as f64 * w * span;
            }
        }
    }
    xj
}

#[allow(clippy::too_many_arguments)]
pub fn jump_bound_check(
    net: &ReactionNetwork<f64>,
    x0: &[f64],
    t: f64,
    replicas: usize,
    w: f64,
    norm_n: f64,
    bbox: &BoundingBox,
    seed: u64,
) -> Result<JumpBoundReport> {
    if replicas < 2 {
        return Err(Error::InvalidConfig("at least two replicas are required".into()));
    }
    if x0.iter().any(|v| v.fract() != 0.0) {
        return Err(Error::InvalidState("start state must be integer-valued".into()));
    }
    let squares: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let path = nrm_propagate(net, x0, 0.0, t, IntervalNoise::new(seed, i as u64), DEFAULT_EVENT_CAP)?;
            if !bbox.contains(path.initial_state()) {
                return Err(box_exit(0.0, bbox, path.initial_state()));
            }
            for (time, state) in path.breakpoints() {
                if !bbox.contains(state) {
                    return Err(box_exit(time, bbox, state));
                }
            }
            Ok(jump_term(net, &path).iter().map(|v| v * v).sum())
        })
        .collect::<Result<_>>()?;
    let n = replicas as f64;
    let mean = squares.iter().sum::<f64>() / n;
    let var = squares.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let standard_error = (var / n).sqrt();
    let bound = norm_n * norm_n * w * t;
    Ok(JumpBoundReport { estimate: mean, standard_error, bound, replicas, pass: mean <= bound + 3.0 * standard_error })
}

fn box_exit(time: f64, bbox: &BoundingBox, state: &[f64]) -> Error {
    let species =
        (0..state.len()).find(|&i| state[i] < bbox.lower()[i] as f64 || state[i] > bbox.upper()[i] as f64).unwrap_or(0);
    Error::BoxViolation { time, species, value: state[species] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{PropensityForm, Reactants, Reaction};

    fn birth(rate: f64) -> ReactionNetwork<f64> {
        ReactionNetwork::new(
            vec!["A".into()],
            vec![Reaction::new(
                PropensityForm::MassAction { rate_constant: rate, reactants: Reactants::None },
                vec![-1],
            )],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn jump_term_of_pure_birth() {
        let net = birth(2.0);
        let path = nrm_propagate(&net, &[0.0], 0.0, 3.0, IntervalNoise::new(5, 0), 1000).unwrap();
        let count = path.final_state()[0];
        assert!((jump_term(&net, &path)[0] - (count - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn total_intensity_of_birth_death_box() {
        let net = crate::validation::fixtures::birth_death(5.0, 1.0).unwrap();
        let bbox = BoundingBox::new(vec![0], vec![40]).unwrap();
        assert_eq!(max_total_intensity(&net, &bbox), 45.0);
    }

    #[test]
    fn short_horizon_estimate_vanishes() {
        let net = birth(1.0);
        let bbox = BoundingBox::new(vec![0], vec![100]).unwrap();
        let r = jump_bound_check(&net, &[0.0], 1e-9, 100, 1.0, 1.0, &bbox, 1).unwrap();
        assert!(r.estimate <= 1e-12 && r.pass);
    }

    #[test]
    fn box_exit_reported() {
        let net = birth(50.0);
        let bbox = BoundingBox::new(vec![0], vec![3]).unwrap();
        let err = jump_bound_check(&net, &[0.0], 1.0, 10, 50.0, 1.0, &bbox, 1).unwrap_err();
        assert!(matches!(err, Error::BoxViolation { .. }));
    }
}
