//! Exact stochastic propagators over one time interval.

mod nrm;
mod queue;
mod thinning;
mod trajectory;

pub use nrm::{nrm_propagate, NextReaction, DEFAULT_EVENT_CAP};
pub use queue::IndexedMinHeap;
pub use thinning::{channel_bounds, thinning_propagate, BoundingBox};
pub use trajectory::{homogenize, PathObserver, Trajectory, WindowAverage};

use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::noise::IntervalNoise;
use crate::scalar::Scalar;

/// What the fine propagator reports at the end of an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FineMode<T> {
    /// The end state of the exact path.
    Exact,
    /// The average of the exact path over the trailing `window`.
    Homogenized { window: T },
}

/// Result of one fine propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct FineOutcome<T> {
    /// Unfiltered end state of the exact path.
    pub end_state: Vec<T>,
    /// Value handed to the parareal correction (equal to `end_state` in
    /// exact mode).
    pub reported: Vec<T>,
    pub events: u64,
}

/// Propagates `x0` over `[t0, t0 + dt]` with the next reaction method and
/// reports the end state or its trailing average.
pub fn fine_endpoint<T: Scalar>(
    net: &ReactionNetwork<T>,
    x0: &[T],
    t0: T,
    dt: T,
    noise: IntervalNoise,
    mode: FineMode<T>,
    event_cap: u64,
) -> Result<FineOutcome<T>> {
    fine_endpoint_observed(net, x0, t0, dt, noise, mode, event_cap, &mut ())
}

/// As [`fine_endpoint`], also returning the recorded exact path.
pub fn fine_endpoint_with_path<T: Scalar>(
    net: &ReactionNetwork<T>,
    x0: &[T],
    t0: T,
    dt: T,
    noise: IntervalNoise,
    mode: FineMode<T>,
    event_cap: u64,
) -> Result<(FineOutcome<T>, Trajectory<T>)> {
    let mut path = Trajectory::new(t0, t0 + dt, x0.to_vec());
    let outcome = fine_endpoint_observed(net, x0, t0, dt, noise, mode, event_cap, &mut path)?;
    Ok((outcome, path))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn fine_endpoint_observed<T: Scalar, O: PathObserver<T>>(
    net: &ReactionNetwork<T>,
    x0: &[T],
    t0: T,
    dt: T,
    noise: IntervalNoise,
    mode: FineMode<T>,
    event_cap: u64,
    observer: &mut O,
) -> Result<FineOutcome<T>> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidConfig(format!("interval length must be positive, got {dt}")));
    }
    let end = t0 + dt;
    let mut sim = NextReaction::new(net, x0, t0, noise, event_cap)?;
    match mode {
        FineMode::Exact => {
            sim.run(end, observer)?;
            let end_state = sim.state().to_vec();
            Ok(FineOutcome { reported: end_state.clone(), end_state, events: sim.events() })
        }
        FineMode::Homogenized { window } => {
            if !(window > T::zero() && window <= dt) {
                return Err(Error::InvalidConfig(format!("averaging window {window} must lie in (0, {dt}]")));
            }
            let mut avg = WindowAverage::new(x0, t0, end, window);
            let mut both = (&mut avg, observer);
            sim.run(end, &mut both)?;
            Ok(FineOutcome { end_state: sim.state().to_vec(), reported: avg.finish(), events: sim.events() })
        }
    }
}

impl<T, O: PathObserver<T> + ?Sized> PathObserver<T> for &mut O {
    fn jump(&mut self, time: T, state: &[T]) {
        (**self).jump(time, state);
    }
}
