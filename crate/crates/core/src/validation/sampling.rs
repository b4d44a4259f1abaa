//! Endpoint ensembles of the fine samplers; replica `i` draws from the noise
//! keyed `(seed, i)`.

use rayon::prelude::*;

use crate::error::Result;
use crate::fine::{thinning_propagate, BoundingBox, NextReaction, DEFAULT_EVENT_CAP};
use crate::network::ReactionNetwork;
use crate::noise::IntervalNoise;

#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    NextReaction,
    Thinning(BoundingBox),
}

pub fn endpoint_samples(
    net: &ReactionNetwork<f64>,
    x0: &[f64],
    t: f64,
    replicas: usize,
    seed: u64,
    sampler: &Sampler,
) -> Result<Vec<Vec<f64>>> {
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            let noise = IntervalNoise::new(seed, i as u64);
            match sampler {
                Sampler::NextReaction => {
                    let mut sim = NextReaction::new(net, x0, 0.0, noise, DEFAULT_EVENT_CAP)?;
                    sim.run(t, &mut ())?;
                    Ok(sim.state().to_vec())
                }
                Sampler::Thinning(bbox) => Ok(thinning_propagate(net, x0, 0.0, t, bbox, noise)?.final_state().to_vec()),
            }
        })
        .collect()
}
