//! Growth of fluctuations about the reaction-rate solution with the system
//! size: RMS of `|X(t) - x(t)|` against `Omega` on log-log axes.

use crate::coarse::{coarse_step, CoarseMethod, NewtonConfig};
use crate::error::{Error, Result};
use crate::network::ReactionNetwork;

use super::sampling::{endpoint_samples, Sampler};

/// RMS values below this are treated as noise-free.
const DEGENERATE_RMS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub omega: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    pub points: Vec<ScalingPoint>,
    pub replicas: usize,
    /// `None` when the noise vanishes at every size.
    pub slope: Option<f64>,
    pub slope_standard_error: Option<f64>,
}

impl ScalingStudy {
    pub fn applicable(&self) -> bool {
        self.slope.is_some()
    }
}

/// `family(omega)` returns the network and start state at size `omega`.
pub fn omega_scaling_study<F>(family: F, t: f64, omegas: &[f64], replicas: usize, seed: u64) -> Result<ScalingStudy>
where
    F: Fn(f64) -> Result<(ReactionNetwork<f64>, Vec<f64>)>,
{
    if omegas.len() < 3 {
        return Err(Error::InvalidConfig(format!("scaling study needs at least 3 sizes, got {}", omegas.len())));
    }
    if omegas.iter().any(|&o| !(o > 0.0)) {
        return Err(Error::InvalidConfig("sizes must be positive".into()));
    }
    if replicas == 0 {
        return Err(Error::EmptySample);
    }
    let tight = CoarseMethod::AdaptiveImplicit { rel_tol: 1e-10, abs_tol: 1e-10 };
    let newton = NewtonConfig { residual_tolerance: 1e-13, ..NewtonConfig::default() };
    let mut points = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let (net, x0) = family(omega)?;
        let mean = coarse_step(&net, &x0, t, &tight, &newton)?;
        let samples = endpoint_samples(&net, &x0, t, replicas, seed, &Sampler::NextReaction)?;
        let msd = samples.iter().map(|s| s.iter().zip(&mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sum::<f64>()
            / replicas as f64;
        points.push(ScalingPoint { omega, rms: msd.sqrt() });
    }
    let (slope, slope_standard_error) = if points.iter().all(|p| p.rms > DEGENERATE_RMS) {
        let (s, se) = log_log_fit(&points);
        (Some(s), Some(se))
    } else {
        (None, None)
    };
    Ok(ScalingStudy { points, replicas, slope, slope_standard_error })
}

fn log_log_fit(points: &[ScalingPoint]) -> (f64, f64) {
    let xs: Vec<f64> = points.iter().map(|p| p.omega.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.rms.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let se = if n > 2.0 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    (slope, se)
}
