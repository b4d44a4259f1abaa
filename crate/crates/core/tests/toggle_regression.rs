//! Seeded toggle run at the default configuration. The numbers pin one
//! realization; a change means the noise streams or the recursion moved.

use kinetic_parareal::io::ModelSpec;
use kinetic_parareal::network::ModelName;
use kinetic_parareal::parareal::{parareal_run, reference_solve, Executor};

#[test]
fn default_seed_convergence_history() {
    let mut spec = ModelSpec::builtin(ModelName::Toggle);
    spec.run.max_iterations = Some(5);
    spec.run.tolerance = Some(f64::MIN_POSITIVE);
    let r = spec.resolve().unwrap();
    let reference = reference_solve(&r.network, &r.initial_state, &r.config, false).unwrap();
    let out =
        parareal_run(&r.network, &r.initial_state, &r.config, Executor::Parallel, Some(&reference.states)).unwrap();
    let rep = out.report;
    let ratio = rep.residual(5).unwrap() / rep.residual(1).unwrap();
    assert!((ratio - 0.0123).abs() < 5e-4, "residual ratio {ratio}");
    let errors: Vec<f64> = (0..=5).map(|k| rep.error(k).unwrap()).collect();
    let pinned = [4.800, 2.942, 4.592, 2.589, 1.642, 3.217];
    for (e, p) in errors.iter().zip(pinned) {
        assert!((e - p).abs() < 5e-3, "{errors:?}");
    }
}
