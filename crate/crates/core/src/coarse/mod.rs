//! Deterministic propagation of the reaction-rate equations
//! `dx/dt = -sum_r N_r w_r(x)`.

mod adaptive;
mod linalg;

pub use linalg::DenseMatrix;

use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::scalar::Scalar;
use linalg::norm2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoarseMethod<T> {
    /// One backward Euler step solved by Newton's method.
    BackwardEuler,
    /// One Newton step of backward Euler from the start state.
    LinearizedBackwardEuler,
    /// Error-controlled TR-BDF2 sub-stepping.
    AdaptiveImplicit { rel_tol: T, abs_tol: T },
}

impl<T: Scalar> CoarseMethod<T> {
    pub fn adaptive_default() -> Self {
        CoarseMethod::AdaptiveImplicit { rel_tol: T::of(1e-6), abs_tol: T::of(1e-8) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Damping {
    None,
    /// Halve the Newton step (at most ten times) until the residual drops.
    Halving,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig<T> {
    pub max_iterations: usize,
    /// Convergence when `|G(x)| <= residual_tolerance * (1 + |x|)`.
    pub residual_tolerance: T,
    pub damping: Damping,
}

impl<T: Scalar> Default for NewtonConfig<T> {
    fn default() -> Self {
        // 1e-10, or a hundred ulps where that is finer than the precision
        let residual_tolerance = T::of(1e-10).max(T::epsilon() * T::of(100.0));
        Self { max_iterations: 25, residual_tolerance, damping: Damping::Halving }
    }
}

const MAX_HALVINGS: usize = 10;

/// Reaction-rate right-hand side. Fluxes are clamped at zero but, unlike the
/// jump propensities, not cut off below the reactant multiplicity.
pub fn rre_rhs<T: Scalar>(net: &ReactionNetwork<T>, x: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); net.species_count()];
    for reaction in net.reactions() {
        let w = reaction.propensity.rate(x, net.volume());
        if w == T::zero() {
            continue;
        }
        for (o, &n) in out.iter_mut().zip(&reaction.stoich) {
            if n != 0 {
                *o = *o - T::of(n as f64) * w;
            }
        }
    }
    out
}

/// Analytic Jacobian of [`rre_rhs`]. Clamped channels contribute nothing.
pub fn rre_jacobian<T: Scalar>(net: &ReactionNetwork<T>, x: &[T]) -> DenseMatrix<T> {
    let d = net.species_count();
    let mut jac = DenseMatrix::zeros(d);
    let mut grad = vec![T::zero(); d];
    for reaction in net.reactions() {
        if reaction.propensity.rate_clamped(x, net.volume()) {
            continue;
        }
        grad.iter_mut().for_each(|g| *g = T::zero());
        reaction.propensity.accumulate_gradient(x, net.volume(), T::one(), &mut grad);
        for (i, &n) in reaction.stoich.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let n = T::of(n as f64);
            for (j, &g) in grad.iter().enumerate() {
                if g != T::zero() {
                    jac[(i, j)] = jac[(i, j)] - n * g;
                }
            }
        }
    }
    jac
}

/// Solves `x - c * rhs(x) = b` by (damped) Newton iteration from `guess`.
pub(crate) fn solve_implicit<T: Scalar>(
    net: &ReactionNetwork<T>,
    b: &[T],
    c: T,
    guess: &[T],
    newton: &NewtonConfig<T>,
) -> Result<Vec<T>> {
    let residual =
        |x: &[T]| -> Vec<T> { rre_rhs(net, x).iter().zip(x).zip(b).map(|((&f, &xi), &bi)| xi - c * f - bi).collect() };
    let mut x = guess.to_vec();
    let mut g = residual(&x);
    let mut g_norm = norm2(&g);
    for _ in 0..newton.max_iterations {
        if g_norm <= newton.residual_tolerance * (T::one() + norm2(&x)) {
            return Ok(x);
        }
        let system = rre_jacobian(net, &x).shifted_identity(c);
        let rhs: Vec<T> = g.iter().map(|&v| -v).collect();
        let step = system.solve(&rhs)?;
        let mut lambda = T::one();
        let halvings = match newton.damping {
            Damping::None => 0,
            Damping::Halving => MAX_HALVINGS,
        };
        let mut attempt = 0;
        loop {
            let candidate: Vec<T> = x.iter().zip(&step).map(|(&xi, &s)| xi + lambda * s).collect();
            let g_candidate = residual(&candidate);
            let n_candidate = norm2(&g_candidate);
            if n_candidate < g_norm || attempt >= halvings {
                x = candidate;
                g = g_candidate;
                g_norm = n_candidate;
                break;
            }
            lambda = lambda * T::of(0.5);
            attempt += 1;
        }
    }
    if g_norm <= newton.residual_tolerance * (T::one() + norm2(&x)) {
        return Ok(x);
    }
    Err(Error::CoarseFailure { iterations: newton.max_iterations, residual: g_norm.to_f64().unwrap_or(f64::NAN) })
}

/// Propagates the reaction-rate equations from `x0` over `dt`.
pub fn coarse_step<T: Scalar>(
    net: &ReactionNetwork<T>,
    x0: &[T],
    dt: T,
    method: &CoarseMethod<T>,
    newton: &NewtonConfig<T>,
) -> Result<Vec<T>> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidConfig(format!("coarse step must be positive, got {dt}")));
    }
    if x0.len() != net.species_count() {
        return Err(Error::ShapeMismatch("coarse start state has wrong length".into()));
    }
    match *method {
        CoarseMethod::BackwardEuler => solve_implicit(net, x0, dt, x0, newton),
        CoarseMethod::LinearizedBackwardEuler => {
            let f: Vec<T> = rre_rhs(net, x0).into_iter().map(|v| v * dt).collect();
            let step = rre_jacobian(net, x0).shifted_identity(dt).solve(&f)?;
            Ok(x0.iter().zip(step).map(|(&x, s)| x + s).collect())
        }
        CoarseMethod::AdaptiveImplicit { rel_tol, abs_tol } => {
            if !(rel_tol > T::zero() && abs_tol > T::zero()) {
                return Err(Error::InvalidConfig("adaptive tolerances must be positive".into()));
            }
            adaptive::integrate(net, x0, dt, rel_tol, abs_tol, newton)
        }
    }
}
