//! Parareal iteration with a reaction-rate coarse propagator `C` and a
//! next-reaction fine propagator `F`:
//!
//! ```text
//! v[0][n] = C v[0][n-1]
//! v[k][n] = F v[k-1][n-1] + (C v[k][n-1] - C v[k-1][n-1])
//! ```
//!
//! The fine propagation over interval `n` always draws from the noise keyed
//! `(seed, n)`, whatever the iteration, so the first `k` values of row `k`
//! coincide with the serial reference.
//!
//! With homogenization the correction acts on trailing-window averages while
//! every cell also carries an unfiltered state from which the next fine
//! propagation starts. The carried state receives the same coarse correction
//! as the reported value.

use rayon::prelude::*;

use crate::coarse::{coarse_step, CoarseMethod, NewtonConfig};
use crate::error::{Error, Result};
use crate::fine::{fine_endpoint, fine_endpoint_with_path, FineMode, FineOutcome, Trajectory, DEFAULT_EVENT_CAP};
use crate::network::ReactionNetwork;
use crate::noise::IntervalNoise;
use crate::scalar::Scalar;

pub const DEFAULT_SEED: u64 = 1;
/// Default residual tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Homogenization<T> {
    Off,
    /// Average over the trailing `fraction * dt` of every interval.
    Fraction(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PararealConfig<T> {
    pub t_final: T,
    pub intervals: usize,
    pub max_iterations: usize,
    pub residual_tolerance: T,
    pub homogenization: Homogenization<T>,
    pub coarse: CoarseMethod<T>,
    pub newton: NewtonConfig<T>,
    pub seed: u64,
    pub event_cap: u64,
}

impl<T: Scalar> PararealConfig<T> {
    pub fn new(t_final: T, intervals: usize) -> Self {
        Self {
            t_final,
            intervals,
            max_iterations: 20,
            residual_tolerance: T::of(DEFAULT_TOLERANCE),
            homogenization: Homogenization::Off,
            coarse: CoarseMethod::BackwardEuler,
            newton: NewtonConfig::default(),
            seed: DEFAULT_SEED,
            event_cap: DEFAULT_EVENT_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.t_final > T::zero() && self.t_final.is_finite()) {
            return bad(format!("final time must be positive, got {}", self.t_final));
        }
        if self.intervals == 0 {
            return bad("interval count must be positive".into());
        }
        if self.max_iterations == 0 {
            return bad("iteration count must be positive".into());
        }
        if !(self.residual_tolerance > T::zero()) {
            return bad(format!("residual tolerance must be positive, got {}", self.residual_tolerance));
        }
        if let Homogenization::Fraction(f) = self.homogenization {
            if !(f > T::zero() && f <= T::one()) {
                return bad(format!("homogenization fraction must lie in (0, 1], got {f}"));
            }
        }
        if let CoarseMethod::AdaptiveImplicit { rel_tol, abs_tol } = self.coarse {
            if !(rel_tol > T::zero() && abs_tol > T::zero()) {
                return bad("adaptive coarse tolerances must be positive".into());
            }
        }
        Ok(())
    }

    /// `dt = T / N`.
    pub fn interval_length(&self) -> T {
        self.t_final / T::of(self.intervals as f64)
    }

    /// Start time of interval `n` (1-based).
    pub fn interval_start(&self, n: usize) -> T {
        T::of((n - 1) as f64) * self.interval_length()
    }

    pub fn grid_time(&self, n: usize) -> T {
        T::of(n as f64) * self.interval_length()
    }

    pub fn fine_mode(&self) -> FineMode<T> {
        match self.homogenization {
            Homogenization::Off => FineMode::Exact,
            Homogenization::Fraction(f) => FineMode::Homogenized { window: f * self.interval_length() },
        }
    }

    pub fn interval_noise(&self, n: usize) -> IntervalNoise {
        IntervalNoise::new(self.seed, n as u64)
    }
}

/// How the fine propagations of one iteration are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Executor {
    Serial,
    /// Fork-join over the rayon pool; `threads` sizes a dedicated pool.
    #[default]
    Parallel,
    ParallelWith {
        threads: usize,
    },
}

impl Executor {
    fn map<R: Send, F>(&self, count: usize, f: F) -> Result<Vec<R>>
    where
        F: Fn(usize) -> Result<R> + Sync + Send,
    {
        match *self {
            Executor::Serial => (1..=count).map(f).collect(),
            Executor::Parallel => (1..=count).into_par_iter().map(f).collect(),
            Executor::ParallelWith { threads } => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
                pool.install(|| (1..=count).into_par_iter().map(f).collect())
            }
        }
    }
}

/// Serial chaining of fine propagations over the interval grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution<T> {
    /// Reported values `u_0, ..., u_N` (filtered in homogenized mode).
    pub states: Vec<Vec<T>>,
    /// Unfiltered states at the grid times; equal to `states` in exact mode.
    pub exact_states: Vec<Vec<T>>,
    /// Recorded paths, one per interval, when requested.
    pub paths: Option<Vec<Trajectory<T>>>,
    pub events: u64,
}

pub fn reference_solve<T: Scalar>(
    net: &ReactionNetwork<T>,
    x0: &[T],
    config: &PararealConfig<T>,
    record_paths: bool,
) -> Result<ReferenceSolution<T>> {
    config.validate()?;
    if x0.iter().any(|v| v.fract() != T::zero()) {
        return Err(Error::InvalidState("reference start state must be integer-valued".into()));
    }
    let dt = config.interval_length();
    let mode = config.fine_mode();
    let mut states = vec![x0.to_vec()];
    let mut exact_states = vec![x0.to_vec()];
    let mut paths = record_paths.then(Vec::new);
    let mut events = 0;
    for n in 1..=config.intervals {
        let start = &exact_states[n - 1];
        let noise = config.interval_noise(n);
        let outcome = match paths.as_mut() {
            Some(paths) => {
                let (outcome, path) =
                    fine_endpoint_with_path(net, start, config.interval_start(n), dt, noise, mode, config.event_cap)?;
                paths.push(path);
                outcome
            }
            None => fine_endpoint(net, start, config.interval_start(n), dt, noise, mode, config.event_cap)?,
        };
        events += outcome.events;
        states.push(outcome.reported);
        exact_states.push(outcome.end_state);
    }
    Ok(ReferenceSolution { states, exact_states, paths, events })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ToleranceMet,
    MaxIterations,
    /// `k = N`: every value equals the reference.
    PrefixExact,
}

/// Residual and error histories of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    pub iterations_run: usize,
    /// `residuals[k - 1]` compares rows `k - 1` and `k`.
    pub residuals: Vec<T>,
    /// `errors[k]` compares row `k` with the reference, `k = 0..=iterations_run`.
    pub errors: Option<Vec<T>>,
    pub stop_reason: StopReason,
}

impl<T: Scalar> ConvergenceReport<T> {
    /// Residual of iteration `k >= 1`.
    pub fn residual(&self, k: usize) -> Option<T> {
        k.checked_sub(1).and_then(|i| self.residuals.get(i).copied())
    }

    pub fn error(&self, k: usize) -> Option<T> {
        self.errors.as_ref().and_then(|e| e.get(k).copied())
    }
}

/// The iterate matrix `v[k][n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PararealGrid<T> {
    pub iterates: Vec<Vec<Vec<T>>>,
    pub fine_events: Vec<u64>,
}

impl<T> PararealGrid<T> {
    pub fn row(&self, k: usize) -> &[Vec<T>] {
        &self.iterates[k]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PararealOutcome<T> {
    pub grid: PararealGrid<T>,
    pub report: ConvergenceReport<T>,
}

fn relative_norm<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>], denominators: &[Vec<T>]) -> Result<T> {
    if a.len() != b.len() || a.len() != denominators.len() {
        return Err(Error::ShapeMismatch(format!("rows of length {} and {}", a.len(), b.len())));
    }
    let mut worst = T::zero();
    for (n, ((x, y), den)) in a.iter().zip(b).zip(denominators).enumerate() {
        if x.len() != y.len() || x.len() != den.len() {
            return Err(Error::ShapeMismatch(format!("state dimensions differ at interval {n}")));
        }
        if x.is_empty() {
            continue;
        }
        let mut sum = T::zero();
        for (i, ((&xi, &yi), &di)) in x.iter().zip(y).zip(den).enumerate() {
            let d = T::one() + di;
            if d == T::zero() {
                return Err(Error::DegenerateDenominator { interval: n, species: i });
            }
            let q = (xi - yi) / d;
            sum = sum + q * q;
        }
        let value = (sum / T::of(x.len() as f64)).sqrt();
        if value > worst {
            worst = value;
        }
    }
    Ok(worst)
}

/// `max_n D^{-1/2} |(prev_n - next_n) / (1 + next_n)|`.
pub fn residual_norm<T: Scalar>(prev: &[Vec<T>], next: &[Vec<T>]) -> Result<T> {
    relative_norm(prev, next, next)
}

/// `max_n D^{-1/2} |(v_n - u_n) / (1 + u_n)|`.
pub fn error_norm<T: Scalar>(row: &[Vec<T>], reference: &[Vec<T>]) -> Result<T> {
    relative_norm(row, reference, reference)
}

fn corrected<T: Scalar>(base: &[T], new: &[T], old: &[T]) -> Vec<T> {
    // F + (C_new - C_old): the bracket vanishes exactly on identical inputs
    base.iter().zip(new.iter().zip(old)).map(|(&f, (&cn, &co))| f + (cn - co)).collect()
}

pub fn parareal_run<T: Scalar>(
    net: &ReactionNetwork<T>,
    x0: &[T],
    config: &PararealConfig<T>,
    executor: Executor,
    reference: Option<&[Vec<T>]>,
) -> Result<PararealOutcome<T>> {
    config.validate()?;
    let n_int = config.intervals;
    if x0.len() != net.species_count() {
        return Err(Error::ShapeMismatch("initial state has wrong length".into()));
    }
    if let Some(u) = reference {
        if u.len() != n_int + 1 {
            return Err(Error::ShapeMismatch(format!("reference has {} states, expected {}", u.len(), n_int + 1)));
        }
    }
    let dt = config.interval_length();
    let mode = config.fine_mode();
    let homogenized = matches!(mode, FineMode::Homogenized { .. });
    let coarse = |x: &[T], k: usize, n: usize| {
        coarse_step(net, x, dt, &config.coarse, &config.newton).map_err(|e| Error::CoarseCell {
            k,
            n,
            source: Box::new(e),
        })
    };

    let mut row = vec![x0.to_vec()];
    let mut coarse_prev = vec![Vec::new(); n_int + 1];
    for n in 1..=n_int {
        let c = coarse(&row[n - 1], 0, n)?;
        coarse_prev[n] = c.clone();
        row.push(c);
    }
    let mut carry_prev = row.clone();
    let mut errors = match reference {
        Some(u) => Some(vec![error_norm(&row, u)?]),
        None => None,
    };
    let mut iterates = vec![row];
    let mut residuals = Vec::new();
    let mut fine_events = Vec::new();
    let mut stop_reason = StopReason::MaxIterations;

    for k in 1..=config.max_iterations {
        let fine: Vec<FineOutcome<T>> = executor.map(n_int, |n| {
            fine_endpoint(
                net,
                &carry_prev[n - 1],
                config.interval_start(n),
                dt,
                config.interval_noise(n),
                mode,
                config.event_cap,
            )
            .map_err(|e| Error::FineCell { k, n, source: Box::new(e) })
        })?;
        fine_events.push(fine.iter().map(|f| f.events).sum());

        let mut row = vec![x0.to_vec()];
        let mut carry = homogenized.then(|| vec![x0.to_vec()]);
        let mut coarse_cur = vec![Vec::new(); n_int + 1];
        for n in 1..=n_int {
            let c_new = coarse(&row[n - 1], k, n)?;
            let outcome = &fine[n - 1];
            row.push(corrected(&outcome.reported, &c_new, &coarse_prev[n]));
            if let Some(carry) = carry.as_mut() {
                carry.push(corrected(&outcome.end_state, &c_new, &coarse_prev[n]));
            }
            coarse_cur[n] = c_new;
        }
        let residual = residual_norm(&iterates[k - 1], &row)?;
        residuals.push(residual);
        if let (Some(errors), Some(u)) = (errors.as_mut(), reference) {
            errors.push(error_norm(&row, u)?);
        }
        carry_prev = carry.unwrap_or_else(|| row.clone());
        coarse_prev = coarse_cur;
        iterates.push(row);

        if residual <= config.residual_tolerance {
            stop_reason = StopReason::ToleranceMet;
            break;
        }
        if k == n_int {
            stop_reason = StopReason::PrefixExact;
            break;
        }
    }
    let iterations_run = iterates.len() - 1;
    Ok(PararealOutcome {
        grid: PararealGrid { iterates, fine_events },
        report: ConvergenceReport { iterations_run, residuals, errors, stop_reason },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_model, ModelName, ModelParams, PropensityForm, Reactants, Reaction};

    #[test]
    fn residual_examples() {
        let a = vec![vec![1.0, 2.0]];
        assert_eq!(residual_norm(&a, &a).unwrap(), 0.0);
        assert_eq!(residual_norm(&[vec![2.0]], &[vec![1.0]]).unwrap(), 0.5);
        let prev = vec![vec![2.0], vec![5.0], vec![0.0]];
        let next = vec![vec![1.0], vec![5.0], vec![1.0]];
        let value = residual_norm(&prev, &next).unwrap();
        let (rp, rn): (Vec<_>, Vec<_>) = (prev.iter().rev().cloned().collect(), next.iter().rev().cloned().collect());
        assert_eq!(residual_norm(&rp, &rn).unwrap(), value);
    }

    #[test]
    fn error_example() {
        let e = error_norm(&[vec![1.0, 3.0]], &[vec![1.0, 1.0]]).unwrap();
        assert!((e - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(error_norm(&[vec![4.0, 3.0]], &[vec![4.0, 3.0]]).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_denominator() {
        let err = residual_norm(&[vec![0.0]], &[vec![-1.0]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateDenominator { interval: 0, species: 0 }));
    }

    #[test]
    fn config_validation() {
        let mut c = PararealConfig::<f64>::new(1.0, 10);
        assert!(c.validate().is_ok());
        c.homogenization = Homogenization::Fraction(1.5);
        assert!(c.validate().is_err());
        c.homogenization = Homogenization::Off;
        c.intervals = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_propensity_reference_is_constant() {
        let net = ReactionNetwork::new(
            vec!["A".into()],
            vec![Reaction::new(
                PropensityForm::MassAction { rate_constant: 1.0, reactants: Reactants::One(0) },
                vec![1],
            )],
            1.0,
        )
        .unwrap();
        let cfg = PararealConfig::new(5.0, 5);
        let r = reference_solve(&net, &[0.0], &cfg, false).unwrap();
        assert!(r.states.iter().all(|s| s == &vec![0.0]));
    }

    #[test]
    fn single_interval_reference_is_one_fine_solve() {
        let m = build_model::<f64>(ModelName::DimerIso, &ModelParams::default()).unwrap();
        let cfg = PararealConfig::new(0.5, 1);
        let r = reference_solve(&m.network, &m.initial_state, &cfg, true).unwrap();
        let direct = fine_endpoint(
            &m.network,
            &m.initial_state,
            0.0,
            0.5,
            cfg.interval_noise(1),
            FineMode::Exact,
            cfg.event_cap,
        )
        .unwrap();
        assert_eq!(r.states[1], direct.end_state);
        assert_eq!(r.paths.unwrap()[0].final_state(), &direct.end_state[..]);
    }

    #[test]
    fn fractional_reference_start_rejected() {
        let m = build_model::<f64>(ModelName::Toggle, &ModelParams::default()).unwrap();
        let cfg = PararealConfig::new(10.0, 2);
        assert!(reference_solve(&m.network, &[0.5, 1.0], &cfg, false).is_err());
    }

    fn small_toggle(homogenization: Homogenization<f64>) -> (BuiltToggle, PararealConfig<f64>) {
        let m = build_model::<f64>(ModelName::Toggle, &ModelParams::default()).unwrap();
        let mut cfg = PararealConfig::new(2e5, 8);
        cfg.max_iterations = 8;
        cfg.residual_tolerance = 1e-300;
        cfg.homogenization = homogenization;
        cfg.seed = 3;
        ((m.network, m.initial_state), cfg)
    }

    type BuiltToggle = (ReactionNetwork<f64>, Vec<f64>);

    #[test]
    fn row_zero_is_coarse_sweep_and_prefix_exact() {
        for h in [Homogenization::Off, Homogenization::Fraction(0.5)] {
            let ((net, x0), cfg) = small_toggle(h);
            let reference = reference_solve(&net, &x0, &cfg, false).unwrap();
            let out = parareal_run(&net, &x0, &cfg, Executor::Serial, Some(&reference.states)).unwrap();
            let dt = cfg.interval_length();
            let mut x = x0.clone();
            for n in 1..=cfg.intervals {
                x = coarse_step(&net, &x, dt, &cfg.coarse, &cfg.newton).unwrap();
                assert_eq!(out.grid.iterates[0][n], x);
            }
            for (k, row) in out.grid.iterates.iter().enumerate() {
                assert_eq!(row[0], x0);
                for n in 0..=k.min(cfg.intervals) {
                    assert_eq!(row[n], reference.states[n], "cell ({k}, {n}) in {h:?}");
                }
            }
            assert_eq!(out.report.stop_reason, StopReason::PrefixExact);
            assert_eq!(out.report.iterations_run, cfg.intervals);
            assert_eq!(out.report.error(cfg.intervals), Some(0.0));
        }
    }

    #[test]
    fn serial_and_parallel_agree() {
        let ((net, x0), mut cfg) = small_toggle(Homogenization::Off);
        cfg.max_iterations = 3;
        let a = parareal_run(&net, &x0, &cfg, Executor::Serial, None).unwrap();
        let b = parareal_run(&net, &x0, &cfg, Executor::ParallelWith { threads: 3 }, None).unwrap();
        let c = parareal_run(&net, &x0, &cfg, Executor::Parallel, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn tolerance_stops_early() {
        let ((net, x0), mut cfg) = small_toggle(Homogenization::Off);
        cfg.residual_tolerance = 1e6;
        let out = parareal_run(&net, &x0, &cfg, Executor::Serial, None).unwrap();
        assert_eq!(out.report.iterations_run, 1);
        assert_eq!(out.report.stop_reason, StopReason::ToleranceMet);
    }

    #[test]
    fn coarse_failure_names_cell() {
        let ((net, x0), mut cfg) = small_toggle(Homogenization::Off);
        cfg.newton =
            NewtonConfig { max_iterations: 1, residual_tolerance: 1e-300, damping: crate::coarse::Damping::None };
        let err = parareal_run(&net, &x0, &cfg, Executor::Serial, None).unwrap_err();
        assert!(matches!(err, Error::CoarseCell { k: 0, n: 1, .. }), "{err}");
    }
}
