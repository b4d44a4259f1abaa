//! TR-BDF2 with an embedded third-order error estimate.
//!
//! Each step is a trapezoidal stage to `t + gamma h` followed by a BDF2
//! stage to `t + h`; both implicit stages share the coefficient `d h`,
//! `d = gamma / 2`, `gamma = 2 - sqrt(2)`.

use super::{rre_jacobian, rre_rhs, solve_implicit, NewtonConfig};
use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::scalar::Scalar;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 1_000_000;

struct Coefficients<T> {
    gamma: T,
    d: T,
    bdf_stage: T,
    bdf_start: T,
    est: [T; 3],
}

impl<T: Scalar> Coefficients<T> {
    fn new() -> Self {
        let sqrt2 = T::of(2.0).sqrt();
        let gamma = T::of(2.0) - sqrt2;
        let d = gamma / T::of(2.0);
        let w = sqrt2 / T::of(4.0);
        let denom = gamma * (T::of(2.0) - gamma);
        let three = T::of(3.0);
        Self {
            gamma,
            d,
            bdf_stage: T::one() / denom,
            bdf_start: (T::one() - gamma) * (T::one() - gamma) / denom,
            est: [(T::one() - w) / three, (three * w + T::one()) / three, d / three],
        }
    }
}

struct StepResult<T> {
    y: Vec<T>,
    error: Vec<T>,
}

fn tr_bdf2_step<T: Scalar>(
    net: &ReactionNetwork<T>,
    y0: &[T],
    h: T,
    c: &Coefficients<T>,
    newton: &NewtonConfig<T>,
) -> Result<StepResult<T>> {
    let dh = c.d * h;
    let f0 = rre_rhs(net, y0);
    let b1: Vec<T> = y0.iter().zip(&f0).map(|(&y, &f)| y + dh * f).collect();
    let guess1: Vec<T> = y0.iter().zip(&f0).map(|(&y, &f)| y + c.gamma * h * f).collect();
    let stage = solve_implicit(net, &b1, dh, &guess1, newton).or_else(|_| solve_implicit(net, &b1, dh, y0, newton))?;
    let f_stage = rre_rhs(net, &stage);
    let b2: Vec<T> = stage.iter().zip(y0).map(|(&z, &y)| c.bdf_stage * z - c.bdf_start * y).collect();
    let y1 = solve_implicit(net, &b2, dh, &stage, newton)?;
    let f1 = rre_rhs(net, &y1);
    let raw: Vec<T> = (0..y0.len())
        .map(|i| y0[i] + h * (c.est[0] * f0[i] + c.est[1] * f_stage[i] + c.est[2] * f1[i]) - y1[i])
        .collect();
    // filter the estimate through the stage matrix to keep it bounded on stiff modes
    let error = rre_jacobian(net, &y1).shifted_identity(dh).solve(&raw)?;
    Ok(StepResult { y: y1, error })
}

fn error_norm<T: Scalar>(err: &[T], y0: &[T], y1: &[T], rel_tol: T, abs_tol: T) -> T {
    err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(&e, (&a, &b))| e.abs() / (abs_tol + rel_tol * a.abs().max(b.abs())))
        .fold(T::zero(), T::max)
}

pub(super) fn integrate<T: Scalar>(
    net: &ReactionNetwork<T>,
    x0: &[T],
    dt: T,
    rel_tol: T,
    abs_tol: T,
    newton: &NewtonConfig<T>,
) -> Result<Vec<T>> {
    let c = Coefficients::new();
    let mut t = T::zero();
    let mut y = x0.to_vec();
    let mut h = dt;
    let h_min = dt * T::of(1e-14);
    let third = T::one() / T::of(3.0);
    for _ in 0..MAX_STEPS {
        let remaining = dt - t;
        if remaining <= T::zero() {
            return Ok(y);
        }
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        match tr_bdf2_step(net, &y, step, &c, newton) {
            Ok(res) => {
                let err = error_norm(&res.error, &y, &res.y, rel_tol, abs_tol);
                let factor = if err > T::zero() {
                    (T::of(SAFETY) * err.powf(-third)).max(T::of(MIN_FACTOR)).min(T::of(MAX_FACTOR))
                } else {
                    T::of(MAX_FACTOR)
                };
                if err <= T::one() {
                    y = res.y;
                    t = if last { dt } else { t + step };
                    h = step * factor;
                } else {
                    h = step * factor.min(T::of(SAFETY));
                }
            }
            Err(Error::CoarseFailure { .. }) | Err(Error::SingularJacobian) => {
                h = step * T::of(0.25);
            }
            Err(e) => return Err(e),
        }
        if h < h_min {
            return Err(Error::StepSizeUnderflow { time: t.to_f64().unwrap_or(f64::NAN) });
        }
    }
    Err(Error::StepSizeUnderflow { time: t.to_f64().unwrap_or(f64::NAN) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{PropensityForm, Reactants, Reaction};

    fn dimerization() -> ReactionNetwork<f64> {
        // A + A -> 0 with rate x(x-1)
        ReactionNetwork::new(
            vec!["A".into()],
            vec![Reaction::new(
                PropensityForm::MassAction { rate_constant: 1.0, reactants: Reactants::Two(0, 0) },
                vec![2],
            )],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn coefficients_consistent() {
        let c = Coefficients::<f64>::new();
        assert!((c.bdf_stage - c.bdf_start - 1.0).abs() < 1e-15);
        assert!((c.est.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // the BDF2 stage coefficient (1 - gamma)/(2 - gamma) equals d
        assert!(((1.0 - c.gamma) / (2.0 - c.gamma) - c.d).abs() < 1e-15);
    }

    #[test]
    fn step_is_second_order_with_third_order_estimate() {
        let net = dimerization();
        let c = Coefficients::new();
        let newton = NewtonConfig { residual_tolerance: 1e-14, ..NewtonConfig::default() };
        // exact solution of x' = -2 x (x - 1) from x0 = 10
        let exact = |t: f64| {
            let k = (10.0 - 1.0) / 10.0;
            1.0 / (1.0 - k * (-2.0 * t).exp())
        };
        let local_error = |h: f64| {
            let res = tr_bdf2_step(&net, &[10.0], h, &c, &newton).unwrap();
            ((res.y[0] - exact(h)).abs(), res.error[0].abs())
        };
        let (e1, est1) = local_error(0.004);
        assert!((est1 / e1 - 1.0).abs() < 0.05);
        let (e2, est2) = local_error(0.002);
        // local error of an order-2 method scales like h^3
        let order = (e1 / e2).log2();
        assert!((order - 3.0).abs() < 0.3, "local order {order}");
        let est_order = (est1 / est2).log2();
        assert!((est_order - 3.0).abs() < 0.3, "estimate order {est_order}");
    }
}
