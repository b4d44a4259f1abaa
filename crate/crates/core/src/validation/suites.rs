//! Named validation suites with pass/fail outcomes.

use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use super::cme::{cme_evolve, cme_generator, DistributionVector, TruncatedStateSpace};
use super::fixtures::{birth_death, conversion, decay, pure_birth};
use super::jump::{jump_bound_check, max_total_intensity};
use super::sampling::{endpoint_samples, Sampler};
use super::scaling::omega_scaling_study;
use super::stats::{distribution_distance, empirical_histogram, two_sample_chi2_pvalue, DistanceMetric};
use crate::coarse::{coarse_step, rre_jacobian, rre_rhs, CoarseMethod, NewtonConfig};
use crate::error::{Error, Result};
use crate::fine::BoundingBox;
use crate::network::{build_model, ModelName, ModelParams, ReactionNetwork};
use crate::parareal::DEFAULT_SEED;

pub const SUITES: &[&str] = &["cme", "equivalence", "jump", "kernels", "scaling"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub suite: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Runs `suite` (or every suite for `"all"`); `quick` shrinks sample sizes.
pub fn run_suite(suite: &str, quick: bool) -> Result<Vec<CheckOutcome>> {
    match suite {
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(s, quick)?);
            }
            Ok(out)
        }
        "cme" => Ok(vec![
            timed("cme", "two_state_solution", two_state_solution),
            timed("cme", "birth_death_tv", || birth_death_tv(if quick { 20_000 } else { 100_000 })),
        ]),
        "equivalence" => {
            Ok(vec![timed("equivalence", "thinning_vs_nrm", || thinning_vs_nrm(if quick { 2_000 } else { 10_000 }))])
        }
        "jump" => {
            let mut out = vec![
                timed("jump", "pure_birth_tight", || pure_birth_tight(if quick { 2_000 } else { 10_000 })),
                timed("jump", "birth_death_bound", || birth_death_bound(if quick { 2_000 } else { 10_000 })),
            ];
            if !quick {
                for name in [ModelName::Toggle, ModelName::DimerIso, ModelName::RdmeChain] {
                    out.push(timed("jump", &format!("{name}_bound"), || model_bound(name)));
                }
            }
            Ok(out)
        }
        "kernels" => {
            let mut out: Vec<CheckOutcome> = [ModelName::Toggle, ModelName::DimerIso, ModelName::RdmeChain]
                .into_iter()
                .map(|name| timed("kernels", &format!("{name}_jacobian"), || jacobian_check(name, 100)))
                .collect();
            out.push(timed("kernels", "backward_euler_order", backward_euler_order));
            Ok(out)
        }
        "scaling" => Ok(vec![timed("scaling", "omega_slope", || omega_slope(if quick { 100 } else { 200 }))]),
        other => {
            Err(Error::InvalidConfig(format!("unknown suite '{other}'; expected one of all, {}", SUITES.join(", "))))
        }
    }
}

fn timed<F: FnOnce() -> Result<(bool, String)>>(suite: &str, check: &str, f: F) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome { suite: suite.into(), check: check.into(), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

fn two_state_solution() -> Result<(bool, String)> {
    let (net, _) = conversion(1.0)?;
    // both molecules' positions on the two-species lattice with one molecule
    let space = TruncatedStateSpace::new(vec![0, 0], vec![1, 1])?;
    let a = cme_generator(&net, &space)?;
    let p0 = DistributionVector::point_mass(&space, &[1, 0], 0.0)?;
    let p = cme_evolve(&a, &p0, 1.0)?;
    let e = (-2.0f64).exp();
    let got_a = p.probabilities[space.index_of(&[1, 0]).unwrap()];
    let got_b = p.probabilities[space.index_of(&[0, 1]).unwrap()];
    let err = (got_a - (1.0 + e) / 2.0).abs().max((got_b - (1.0 - e) / 2.0).abs());
    Ok((err < 1e-9, format!("max deviation {err:.3e}")))
}

/// Birth-death at rates 5 and 1 from zero at `t = 10` against the CME.
pub fn birth_death_tv(samples: usize) -> Result<(bool, String)> {
    let net = birth_death(5.0, 1.0)?;
    let space = TruncatedStateSpace::new(vec![0], vec![60])?;
    let exact = cme_evolve(&cme_generator(&net, &space)?, &DistributionVector::point_mass(&space, &[0], 0.0)?, 10.0)?;
    let draws = endpoint_samples(&net, &[0.0], 10.0, samples, DEFAULT_SEED, &Sampler::NextReaction)?;
    let hist = empirical_histogram(&space, &draws)?;
    let tv = distribution_distance(&hist, &exact, DistanceMetric::TotalVariation)?;
    Ok((tv < 0.02, format!("TV {tv:.4} over {samples} samples (limit 0.02)")))
}

pub fn thinning_vs_nrm(samples: usize) -> Result<(bool, String)> {
    let net = birth_death(5.0, 1.0)?;
    let bbox = BoundingBox::new(vec![0], vec![40])?;
    let nrm = endpoint_samples(&net, &[0.0], 1.0, samples, DEFAULT_SEED, &Sampler::NextReaction)?;
    let thin = endpoint_samples(&net, &[0.0], 1.0, samples, DEFAULT_SEED, &Sampler::Thinning(bbox))?;
    let p = two_sample_chi2_pvalue(&nrm, &thin)?;
    Ok((p > 0.01, format!("chi-square p {p:.4} with {samples} samples each (limit 0.01)")))
}

pub fn pure_birth_tight(replicas: usize) -> Result<(bool, String)> {
    let net = pure_birth(4.0)?;
    let bbox = BoundingBox::new(vec![0], vec![1_000])?;
    let w = max_total_intensity(&net, &bbox);
    let r = jump_bound_check(&net, &[0.0], 2.0, replicas, w, net.stoich_frobenius_norm(), &bbox, DEFAULT_SEED)?;
    Ok((
        r.matches_bound(),
        format!("estimate {:.4} +- {:.4}, bound {:.4} (two-sided 3 SE)", r.estimate, r.standard_error, r.bound),
    ))
}

pub fn birth_death_bound(replicas: usize) -> Result<(bool, String)> {
    let net = birth_death(5.0, 1.0)?;
    let bbox = BoundingBox::new(vec![0], vec![40])?;
    let w = max_total_intensity(&net, &bbox);
    let r = jump_bound_check(&net, &[0.0], 1.0, replicas, w, net.stoich_frobenius_norm(), &bbox, DEFAULT_SEED)?;
    Ok((r.pass, format!("estimate {:.4} +- {:.4}, bound {:.4}", r.estimate, r.standard_error, r.bound)))
}

fn model_bound(name: ModelName) -> Result<(bool, String)> {
    let m = build_model::<f64>(name, &ModelParams::default())?;
    let (upper, t) = match name {
        ModelName::Toggle => (1_000, 1_000.0),
        ModelName::DimerIso => (60, 1e-3),
        ModelName::RdmeChain => (500, 1e-2),
    };
    let d = m.network.species_count();
    let bbox = BoundingBox::new(vec![0; d], vec![upper; d])?;
    let w = max_total_intensity(&m.network, &bbox);
    let r = jump_bound_check(
        &m.network,
        &m.initial_state,
        t,
        200,
        w,
        m.network.stoich_frobenius_norm(),
        &bbox,
        DEFAULT_SEED,
    )?;
    Ok((r.pass, format!("estimate {:.4e} +- {:.2e}, bound {:.4e}", r.estimate, r.standard_error, r.bound)))
}

/// Largest relative deviation of the analytic Jacobian from central
/// differences over `states` random states with every species at least 2.
pub fn jacobian_deviation(net: &ReactionNetwork<f64>, upper: f64, states: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = net.species_count();
    let mut worst = 0.0f64;
    for _ in 0..states {
        let x: Vec<f64> =
            (0..d).map(|_| 2.5 + (upper - 2.5) * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)).collect();
        let j = rre_jacobian(net, &x);
        let mut diff = 0.0;
        for col in 0..d {
            let h = 1e-6 * x[col].abs().max(1.0);
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[col] += h;
            xm[col] -= h;
            let (fp, fm) = (rre_rhs(net, &xp), rre_rhs(net, &xm));
            for row in 0..d {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                diff += (j[(row, col)] - fd).powi(2);
            }
        }
        let scale = j.frobenius_norm().max(f64::MIN_POSITIVE);
        worst = worst.max(diff.sqrt() / scale);
    }
    worst
}

pub fn jacobian_check(name: ModelName, states: usize) -> Result<(bool, String)> {
    let m = build_model::<f64>(name, &ModelParams::default())?;
    let upper = match name {
        ModelName::Toggle => 500.0,
        ModelName::DimerIso => 60.0,
        ModelName::RdmeChain => 300.0,
    };
    let dev = jacobian_deviation(&m.network, upper, states, DEFAULT_SEED);
    Ok((dev <= 1e-5, format!("max relative deviation {dev:.3e} over {states} states (limit 1e-5)")))
}

/// Error ratios of backward Euler on `x' = -x` over `[0, 1]` under step halving.
pub fn backward_euler_ratios() -> Result<Vec<f64>> {
    let net = decay(1.0)?;
    let newton = NewtonConfig::default();
    let err = |dt: f64| -> Result<f64> {
        let mut x = vec![100.0];
        for _ in 0..(1.0 / dt).round() as usize {
            x = coarse_step(&net, &x, dt, &CoarseMethod::BackwardEuler, &newton)?;
        }
        Ok((x[0] - 100.0 * (-1.0f64).exp()).abs())
    };
    let e = [err(0.1)?, err(0.05)?, err(0.025)?];
    Ok(vec![e[0] / e[1], e[1] / e[2]])
}

fn backward_euler_order() -> Result<(bool, String)> {
    let ratios = backward_euler_ratios()?;
    let ok = ratios.iter().all(|r| (1.8..=2.2).contains(r));
    Ok((ok, format!("error ratios {:.4}, {:.4} (range [1.8, 2.2])", ratios[0], ratios[1])))
}

pub fn omega_slope(replicas: usize) -> Result<(bool, String)> {
    let study = omega_scaling_study(conversion, 1.0, &[1e2, 1e3, 1e4], replicas, DEFAULT_SEED)?;
    match study.slope {
        Some(s) => Ok((
            (0.35..=0.65).contains(&s),
            format!("slope {s:.4} +- {:.4} (range [0.35, 0.65])", study.slope_standard_error.unwrap_or(f64::NAN)),
        )),
        None => Ok((false, "no fluctuations; study not applicable".into())),
    }
}
