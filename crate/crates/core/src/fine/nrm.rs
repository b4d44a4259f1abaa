//! Next Reaction Method with one unit-rate Poisson clock per channel.
//!
//! Channel `r` fires when its operational time `T_r = int w_r ds` reaches
//! the next arrival `P_r` of its own unit-rate Poisson process. Arrivals are
//! drawn only from the channel's stream, so two propagations from different
//! start states over the same interval share every channel's driving
//! process.

use super::queue::IndexedMinHeap;
use super::trajectory::{PathObserver, Trajectory};
use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::noise::{IntervalNoise, NoiseSource, StreamClass};
use crate::scalar::Scalar;

/// Default cap on the number of events in one interval.
pub const DEFAULT_EVENT_CAP: u64 = 100_000_000;

#[derive(Debug, Clone)]
struct ChannelClock<T> {
    internal_time: T,
    next_arrival: T,
    propensity: T,
    updated_at: T,
    source: NoiseSource,
    arrivals: u64,
}

impl<T: Scalar> ChannelClock<T> {
    fn putative_time(&self, now: T) -> T {
        if self.propensity > T::zero() {
            let remaining = self.next_arrival - self.internal_time;
            let remaining = if remaining > T::zero() { remaining } else { T::zero() };
            now + remaining / self.propensity
        } else {
            T::infinity()
        }
    }

    fn advance_to(&mut self, now: T) {
        if self.propensity > T::zero() {
            self.internal_time = self.internal_time + self.propensity * (now - self.updated_at);
        }
        self.updated_at = now;
    }

    fn draw_arrival(&mut self) {
        self.next_arrival = self.next_arrival + T::of(self.source.exponential_gap());
        self.arrivals += 1;
    }
}

/// Stepwise next-reaction simulator over one interval.
#[derive(Debug, Clone)]
pub struct NextReaction<'a, T> {
    net: &'a ReactionNetwork<T>,
    state: Vec<T>,
    time: T,
    clocks: Vec<ChannelClock<T>>,
    queue: IndexedMinHeap<T>,
    events: u64,
    event_cap: u64,
    interval: u64,
}

impl<'a, T: Scalar> NextReaction<'a, T> {
    pub fn new(net: &'a ReactionNetwork<T>, x0: &[T], t0: T, noise: IntervalNoise, event_cap: u64) -> Result<Self> {
        if x0.len() != net.species_count() {
            return Err(Error::ShapeMismatch(format!(
                "state has {} components, network has {} species",
                x0.len(),
                net.species_count()
            )));
        }
        if let Some(i) = x0.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidState(format!("component {i} of the start state is not finite")));
        }
        let clocks: Vec<ChannelClock<T>> = (0..net.reaction_count())
            .map(|r| {
                let mut clock = ChannelClock {
                    internal_time: T::zero(),
                    next_arrival: T::zero(),
                    propensity: net.propensity(r, x0),
                    updated_at: t0,
                    source: NoiseSource::new(noise.key(r, StreamClass::NrmGap)),
                    arrivals: 0,
                };
                clock.draw_arrival();
                clock
            })
            .collect();
        let queue = IndexedMinHeap::new(clocks.iter().map(|c| c.putative_time(t0)).collect());
        Ok(Self {
            net,
            state: x0.to_vec(),
            time: t0,
            clocks,
            queue,
            events: 0,
            event_cap,
            interval: noise.interval_index,
        })
    }

    pub fn state(&self) -> &[T] {
        &self.state
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Operational time of channel `r` at the current simulation time.
    pub fn internal_time(&self, r: usize) -> T {
        let c = &self.clocks[r];
        if c.propensity > T::zero() {
            c.internal_time + c.propensity * (self.time - c.updated_at)
        } else {
            c.internal_time
        }
    }

    pub fn next_arrival(&self, r: usize) -> T {
        self.clocks[r].next_arrival
    }

    /// Uniforms consumed by channel `r`.
    pub fn draws(&self, r: usize) -> u64 {
        self.clocks[r].source.counter()
    }

    /// Unit-rate arrivals generated for channel `r`.
    pub fn arrivals(&self, r: usize) -> u64 {
        self.clocks[r].arrivals
    }

    /// Fires the next reaction if it occurs no later than `horizon`.
    pub fn step(&mut self, horizon: T) -> Result<Option<usize>> {
        let Some((r, tau)) = self.queue.peek() else {
            return Ok(None);
        };
        if !(tau <= horizon) {
            return Ok(None);
        }
        self.events += 1;
        if self.events > self.event_cap {
            return Err(Error::StiffnessOverflow { interval: self.interval, cap: self.event_cap });
        }
        self.time = tau;
        self.net.fire(r, &mut self.state);
        {
            let clock = &mut self.clocks[r];
            clock.internal_time = clock.next_arrival;
            clock.updated_at = tau;
            clock.draw_arrival();
        }
        for &s in &self.net.dependency_sets()[r] {
            let clock = &mut self.clocks[s];
            if s != r {
                clock.advance_to(tau);
            }
            clock.propensity = self.net.propensity(s, &self.state);
            let next = clock.putative_time(tau);
            self.queue.update(s, next);
        }
        Ok(Some(r))
    }

    /// Runs to `horizon`, reporting each jump to `observer`.
    pub fn run<O: PathObserver<T>>(&mut self, horizon: T, observer: &mut O) -> Result<()> {
        while self.step(horizon)?.is_some() {
            observer.jump(self.time, &self.state);
        }
        Ok(())
    }
}

/// Exact sample path of the network over `[t0, t0 + dt]`.
pub fn nrm_propagate<T: Scalar>(
    net: &ReactionNetwork<T>,
    x0: &[T],
    t0: T,
    dt: T,
    noise: IntervalNoise,
    event_cap: u64,
) -> Result<Trajectory<T>> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidConfig(format!("interval length must be positive, got {dt}")));
    }
    let end = t0 + dt;
    let mut sim = NextReaction::new(net, x0, t0, noise, event_cap)?;
    let mut path = Trajectory::new(t0, end, x0.to_vec());
    sim.run(end, &mut path)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_model, ModelName, ModelParams, PropensityForm, Reactants, Reaction};

    fn birth(k: f64) -> ReactionNetwork<f64> {
        ReactionNetwork::new(
            vec!["A".into()],
            vec![Reaction::new(PropensityForm::Constant { value: k }, vec![-1])],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn silent_network_has_no_breakpoints() {
        let net = ReactionNetwork::new(
            vec!["A".into()],
            vec![Reaction::new(
                PropensityForm::MassAction { rate_constant: 1.0, reactants: Reactants::One(0) },
                vec![1],
            )],
            1.0,
        )
        .unwrap();
        let path = nrm_propagate(&net, &[0.0], 0.0, 10.0, IntervalNoise::new(1, 0), DEFAULT_EVENT_CAP).unwrap();
        assert!(path.is_empty());
        assert_eq!(path.final_state(), &[0.0]);
    }

    #[test]
    fn poisson_event_rate() {
        let path =
            nrm_propagate(&birth(1.0), &[0.0], 0.0, 1000.0, IntervalNoise::new(11, 0), DEFAULT_EVENT_CAP).unwrap();
        let rate = path.len() as f64 / 1000.0;
        assert!((rate - 1.0).abs() < 0.095, "rate {rate}");
        assert_eq!(path.final_state()[0], path.len() as f64);
    }

    #[test]
    fn event_times_strictly_inside_interval() {
        let path = nrm_propagate(&birth(3.0), &[0.0], 2.0, 5.0, IntervalNoise::new(2, 9), DEFAULT_EVENT_CAP).unwrap();
        let times = path.event_times();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert!(times.iter().all(|&t| t > 2.0 && t <= 7.0));
    }

    #[test]
    fn dimer_conserves_total() {
        let m = build_model::<f64>(ModelName::DimerIso, &ModelParams::default()).unwrap();
        let path =
            nrm_propagate(&m.network, &m.initial_state, 0.0, 0.2, IntervalNoise::new(5, 1), DEFAULT_EVENT_CAP).unwrap();
        assert!(path.len() > 1000);
        for (_, s) in path.breakpoints() {
            assert_eq!(s.iter().sum::<f64>(), 60.0);
            assert!(s.iter().all(|&v| v >= 0.0 && v.fract() == 0.0));
        }
    }

    #[test]
    fn event_cap_reports_interval() {
        let err = nrm_propagate(&birth(1000.0), &[0.0], 0.0, 10.0, IntervalNoise::new(1, 17), 100).unwrap_err();
        assert!(matches!(err, Error::StiffnessOverflow { interval: 17, cap: 100 }));
    }

    #[test]
    fn clock_discipline_and_monotone_operational_time() {
        let m = build_model::<f64>(ModelName::Toggle, &ModelParams::default()).unwrap();
        let mut sim = NextReaction::new(&m.network, &m.initial_state, 0.0, IntervalNoise::new(3, 0), 10_000).unwrap();
        let mut previous: Vec<f64> = (0..4).map(|r| sim.internal_time(r)).collect();
        let mut fired = [0u64; 4];
        while let Some(r) = sim.step(20_000.0).unwrap() {
            fired[r] += 1;
            for s in 0..4 {
                let now = sim.internal_time(s);
                assert!(now >= previous[s], "operational time decreased on channel {s}");
                assert!(now <= sim.next_arrival(s) * (1.0 + 1e-12));
                previous[s] = now;
            }
        }
        for r in 0..4 {
            assert_eq!(sim.draws(r), sim.arrivals(r));
            assert_eq!(sim.arrivals(r), fired[r] + 1);
        }
    }

    #[test]
    fn zero_propensity_channel_resumes() {
        // A is produced only after B appears; the A channel starts idle.
        let net = ReactionNetwork::new(
            vec!["A".into(), "B".into()],
            vec![
                Reaction::new(PropensityForm::Constant { value: 1.0 }, vec![0, -1]),
                Reaction::new(PropensityForm::ScaledLinear { coefficient: 2.0, species: 1 }, vec![-1, 0]),
            ],
            1.0,
        )
        .unwrap();
        let path = nrm_propagate(&net, &[0.0, 0.0], 0.0, 50.0, IntervalNoise::new(4, 0), DEFAULT_EVENT_CAP).unwrap();
        let end = path.final_state();
        assert!(end[1] > 20.0);
        assert!(end[0] > 100.0);
    }

    #[test]
    fn same_key_same_path() {
        let m = build_model::<f64>(ModelName::Toggle, &ModelParams::default()).unwrap();
        let a =
            nrm_propagate(&m.network, &m.initial_state, 0.0, 1e4, IntervalNoise::new(9, 2), DEFAULT_EVENT_CAP).unwrap();
        let b =
            nrm_propagate(&m.network, &m.initial_state, 0.0, 1e4, IntervalNoise::new(9, 2), DEFAULT_EVENT_CAP).unwrap();
        assert_eq!(a, b);
    }
}
