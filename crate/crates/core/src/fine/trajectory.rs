use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Receives every jump of a simulated path.
pub trait PathObserver<T> {
    fn jump(&mut self, time: T, state: &[T]);
}

/// Discards the path.
impl<T> PathObserver<T> for () {
    fn jump(&mut self, _: T, _: &[T]) {}
}

impl<T, A: PathObserver<T>, B: PathObserver<T>> PathObserver<T> for (A, B)
where
    T: Copy,
{
    fn jump(&mut self, time: T, state: &[T]) {
        self.0.jump(time, state);
        self.1.jump(time, state);
    }
}

/// Piecewise-constant, right-continuous jump path over `[start, end]`.
///
/// Breakpoint `i` holds the state entered at `times[i]`; states are stored
/// flat with stride `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    start_time: T,
    end_time: T,
    initial_state: Vec<T>,
    times: Vec<T>,
    states: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(start_time: T, end_time: T, initial_state: Vec<T>) -> Self {
        Self { start_time, end_time, initial_state, times: Vec::new(), states: Vec::new() }
    }

    pub fn start_time(&self) -> T {
        self.start_time
    }

    pub fn end_time(&self) -> T {
        self.end_time
    }

    pub fn initial_state(&self) -> &[T] {
        &self.initial_state
    }

    pub fn dim(&self) -> usize {
        self.initial_state.len()
    }

    /// Number of jumps.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn event_times(&self) -> &[T] {
        &self.times
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (T, &[T])> + '_ {
        let d = self.dim();
        self.times.iter().copied().zip(self.states.chunks_exact(d.max(1)).map(move |c| &c[..d]))
    }

    pub fn final_state(&self) -> &[T] {
        let d = self.dim();
        if self.times.is_empty() {
            &self.initial_state
        } else {
            &self.states[self.states.len() - d..]
        }
    }

    /// State at `t`; at a breakpoint this is the post-jump state.
    pub fn state_at(&self, t: T) -> &[T] {
        let count = self.times.partition_point(|&s| s <= t);
        if count == 0 {
            &self.initial_state
        } else {
            let d = self.dim();
            &self.states[(count - 1) * d..count * d]
        }
    }

    /// Constant segments `(from, to, state)` covering `[start, end]`.
    pub fn segments(&self) -> impl Iterator<Item = (T, T, &[T])> + '_ {
        let starts = std::iter::once((self.start_time, &self.initial_state[..])).chain(self.breakpoints());
        let ends = self.times.iter().copied().chain(std::iter::once(self.end_time));
        starts.zip(ends).map(|((from, state), to)| (from, to, state))
    }
}

impl<T: Scalar> PathObserver<T> for Trajectory<T> {
    fn jump(&mut self, time: T, state: &[T]) {
        self.times.push(time);
        self.states.extend_from_slice(state);
    }
}

/// Streaming evaluation of `(1/delta) * integral of Y over [end - delta, end]`
/// for a piecewise-constant path `Y`.
#[derive(Debug, Clone)]
pub struct WindowAverage<T> {
    window_start: T,
    end: T,
    delta: T,
    last_time: T,
    current: Vec<T>,
    sums: Vec<T>,
}

impl<T: Scalar> WindowAverage<T> {
    pub fn new(initial_state: &[T], start: T, end: T, delta: T) -> Self {
        Self {
            window_start: end - delta,
            end,
            delta,
            last_time: start,
            current: initial_state.to_vec(),
            sums: vec![T::zero(); initial_state.len()],
        }
    }

    fn accumulate_until(&mut self, t: T) {
        let from = if self.last_time > self.window_start { self.last_time } else { self.window_start };
        let to = if t < self.end { t } else { self.end };
        let overlap = to - from;
        if overlap > T::zero() {
            for (s, &x) in self.sums.iter_mut().zip(&self.current) {
                *s = *s + x * overlap;
            }
        }
    }

    pub fn finish(mut self) -> Vec<T> {
        let end = self.end;
        self.accumulate_until(end);
        let delta = self.delta;
        self.sums.into_iter().map(|s| s / delta).collect()
    }
}

impl<T: Scalar> PathObserver<T> for WindowAverage<T> {
    fn jump(&mut self, time: T, state: &[T]) {
        self.accumulate_until(time);
        self.last_time = time;
        self.current.copy_from_slice(state);
    }
}

/// Exact trailing-window average of a recorded path.
pub fn homogenize<T: Scalar>(trajectory: &Trajectory<T>, delta_t: T) -> Result<Vec<T>> {
    let length = trajectory.end_time() - trajectory.start_time();
    if !(delta_t > T::zero() && delta_t <= length) {
        return Err(Error::InvalidConfig(format!("averaging window {delta_t} must lie in (0, {length}]")));
    }
    let mut avg =
        WindowAverage::new(trajectory.initial_state(), trajectory.start_time(), trajectory.end_time(), delta_t);
    for (t, state) in trajectory.breakpoints() {
        avg.jump(t, state);
    }
    Ok(avg.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_path() -> Trajectory<f64> {
        let mut tr = Trajectory::new(0.0, 2.0, vec![0.0]);
        tr.jump(1.0, &[10.0]);
        tr
    }

    #[test]
    fn constant_trajectory_average() {
        let tr = Trajectory::new(0.0, 3.0, vec![4.0, 7.0]);
        assert_eq!(homogenize(&tr, 1.5).unwrap(), vec![4.0, 7.0]);
    }

    #[test]
    fn half_and_half_window() {
        assert_eq!(homogenize(&step_path(), 2.0).unwrap(), vec![5.0]);
        assert_eq!(homogenize(&step_path(), 1.0).unwrap(), vec![10.0]);
    }

    #[test]
    fn full_window_is_time_average() {
        let mut tr = Trajectory::new(1.0, 5.0, vec![2.0]);
        tr.jump(2.0, &[4.0]);
        tr.jump(4.5, &[0.0]);
        // (2*1 + 4*2.5 + 0*0.5) / 4
        assert_eq!(homogenize(&tr, 4.0).unwrap(), vec![3.0]);
    }

    #[test]
    fn window_bounds_checked() {
        assert!(homogenize(&step_path(), 0.0).is_err());
        assert!(homogenize(&step_path(), 2.5).is_err());
    }

    #[test]
    fn right_continuous_lookup() {
        let tr = step_path();
        assert_eq!(tr.state_at(0.5), &[0.0]);
        assert_eq!(tr.state_at(1.0), &[10.0]);
        assert_eq!(tr.final_state(), &[10.0]);
        let segs: Vec<_> = tr.segments().map(|(a, b, s)| (a, b, s[0])).collect();
        assert_eq!(segs, vec![(0.0, 1.0, 0.0), (1.0, 2.0, 10.0)]);
    }
}
