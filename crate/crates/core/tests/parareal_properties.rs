#![allow(clippy::needless_range_loop)]

use kinetic_parareal::network::{build_model, ModelName, ModelParams};
use kinetic_parareal::parareal::{
    error_norm, parareal_run, reference_solve, residual_norm, Executor, Homogenization, PararealConfig, StopReason,
};
use kinetic_parareal::validation::fixtures;
use proptest::prelude::*;

fn row() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0f64..1e4, 2), 1..8)
}

proptest! {
    #[test]
    fn residual_is_a_nonnegative_symmetric_in_order_max(a in row(), seed in 0u64..1000) {
        let b: Vec<Vec<f64>> = a.iter().map(|x| x.iter().map(|v| v + (seed % 7) as f64).collect()).collect();
        let r = residual_norm(&a, &b).unwrap();
        prop_assert!(r >= 0.0);
        prop_assert_eq!(residual_norm(&a, &a).unwrap(), 0.0);
        let (mut ra, mut rb) = (a.clone(), b.clone());
        ra.reverse();
        rb.reverse();
        prop_assert_eq!(residual_norm(&ra, &rb).unwrap(), r);
        prop_assert_eq!(error_norm(&a, &b).unwrap(), r);
    }

    #[test]
    fn prefix_exactness_on_birth_death(seed in 0u64..u64::MAX, intervals in 2usize..8, homogenize in any::<bool>()) {
        let net = fixtures::birth_death(5.0, 1.0).unwrap();
        let mut config = PararealConfig::new(2.0, intervals);
        config.seed = seed;
        config.max_iterations = intervals;
        config.residual_tolerance = f64::MIN_POSITIVE;
        if homogenize {
            config.homogenization = Homogenization::Fraction(0.5);
        }
        let reference = reference_solve(&net, &[3.0], &config, false).unwrap();
        let out = parareal_run(&net, &[3.0], &config, Executor::Serial, Some(&reference.states)).unwrap();
        for (k, row) in out.grid.iterates.iter().enumerate() {
            for n in 0..=k.min(intervals) {
                prop_assert_eq!(&row[n], &reference.states[n]);
            }
        }
        // an exactly zero residual can stop the run before k = N
        if out.report.stop_reason == StopReason::PrefixExact {
            prop_assert_eq!(out.report.error(intervals), Some(0.0));
        } else {
            prop_assert_eq!(out.report.stop_reason, StopReason::ToleranceMet);
        }
    }
}

#[test]
fn serial_and_parallel_agree_on_the_dimer() {
    let m = build_model::<f64>(ModelName::DimerIso, &ModelParams::default()).unwrap();
    let mut config = PararealConfig::new(0.5, 6);
    config.max_iterations = 3;
    config.homogenization = Homogenization::Fraction(0.5);
    let a = parareal_run(&m.network, &m.initial_state, &config, Executor::Serial, None).unwrap();
    let b = parareal_run(&m.network, &m.initial_state, &config, Executor::ParallelWith { threads: 3 }, None).unwrap();
    assert_eq!(a.grid.iterates, b.grid.iterates);
    assert_eq!(a.report.residuals, b.report.residuals);
}

#[test]
fn single_precision_run() {
    let m = build_model::<f32>(ModelName::Toggle, &ModelParams::default()).unwrap();
    let mut config = PararealConfig::new(5e6f32, 50);
    config.max_iterations = 3;
    let reference = reference_solve(&m.network, &m.initial_state, &config, false).unwrap();
    let out = parareal_run(&m.network, &m.initial_state, &config, Executor::Parallel, Some(&reference.states)).unwrap();
    assert!(out.report.residuals.iter().all(|r| r.is_finite()));
    for n in 0..=3 {
        assert_eq!(out.grid.iterates[3][n], reference.states[n]);
    }
}
