use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Species consumed by a mass-action channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reactants {
    /// Zeroth order: value `rate * volume`.
    None,
    /// First order: value `rate * x`.
    One(usize),
    /// Second order: `rate * x (x - 1) / volume` for identical species,
    /// `rate * x y / volume` otherwise.
    Two(usize, usize),
}

impl Reactants {
    pub fn species(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Reactants::None => (None, None),
            Reactants::One(i) => (Some(i), None),
            Reactants::Two(i, j) if i == j => (Some(i), None),
            Reactants::Two(i, j) => (Some(i), Some(j)),
        };
        a.into_iter().chain(b)
    }
}

/// Closed set of propensity laws covering mass action, Hill repression,
/// linear transport and constant inflow.
#[derive(Debug, Clone, PartialEq)]
pub enum PropensityForm<T> {
    MassAction {
        rate_constant: T,
        reactants: Reactants,
    },
    /// `a / (b + x_rep^2)`.
    HillRepression {
        a: T,
        b: T,
        repressor: usize,
    },
    /// `coefficient * x_i`.
    ScaledLinear {
        coefficient: T,
        species: usize,
    },
    Constant {
        value: T,
    },
}

impl<T: Scalar> PropensityForm<T> {
    /// Raw value of the law, clamped below at zero. Mass-action laws also
    /// vanish when the state holds fewer molecules than the reactant
    /// multiplicity.
    #[inline]
    pub fn value(&self, x: &[T], volume: T) -> T {
        self.unclamped(x, volume).unwrap_or_else(T::zero)
    }

    /// The law's value, or `None` where the zero clamp is active.
    #[inline]
    pub(crate) fn unclamped(&self, x: &[T], volume: T) -> Option<T> {
        if let PropensityForm::MassAction { reactants: Reactants::Two(i, j), .. } = *self {
            if i == j && x[i] < T::of(2.0) {
                return None;
            }
        }
        let v = self.law(x, volume);
        if v >= T::zero() {
            Some(v)
        } else {
            None
        }
    }

    /// Rate-equation flux: the law clamped below at zero only, which keeps
    /// it continuous in `x`.
    #[inline]
    pub fn rate(&self, x: &[T], volume: T) -> T {
        self.law(x, volume).max(T::zero())
    }

    #[inline]
    fn law(&self, x: &[T], volume: T) -> T {
        match *self {
            PropensityForm::MassAction { rate_constant, reactants } => match reactants {
                Reactants::None => rate_constant * volume,
                Reactants::One(i) => rate_constant * x[i],
                Reactants::Two(i, j) if i == j => rate_constant * x[i] * (x[i] - T::one()) / volume,
                Reactants::Two(i, j) => rate_constant * x[i] * x[j] / volume,
            },
            PropensityForm::HillRepression { a, b, repressor } => {
                let y = x[repressor];
                a / (b + y * y)
            }
            PropensityForm::ScaledLinear { coefficient, species } => coefficient * x[species],
            PropensityForm::Constant { value } => value,
        }
    }

    /// Whether [`rate`](Self::rate) is on its zero branch at `x`.
    #[inline]
    pub(crate) fn rate_clamped(&self, x: &[T], volume: T) -> bool {
        !(self.law(x, volume) > T::zero())
    }

    /// Adds `scale * d(value)/dx` into `grad`. Callers skip this when the
    /// channel is clamped.
    pub(crate) fn accumulate_gradient(&self, x: &[T], volume: T, scale: T, grad: &mut [T]) {
        match *self {
            PropensityForm::MassAction { rate_constant, reactants } => match reactants {
                Reactants::None => {}
                Reactants::One(i) => grad[i] = grad[i] + scale * rate_constant,
                Reactants::Two(i, j) if i == j => {
                    let d = rate_constant * (T::of(2.0) * x[i] - T::one()) / volume;
                    grad[i] = grad[i] + scale * d;
                }
                Reactants::Two(i, j) => {
                    grad[i] = grad[i] + scale * rate_constant * x[j] / volume;
                    grad[j] = grad[j] + scale * rate_constant * x[i] / volume;
                }
            },
            PropensityForm::HillRepression { a, b, repressor } => {
                let y = x[repressor];
                let denom = b + y * y;
                grad[repressor] = grad[repressor] - scale * T::of(2.0) * a * y / (denom * denom);
            }
            PropensityForm::ScaledLinear { coefficient, species } => {
                grad[species] = grad[species] + scale * coefficient;
            }
            PropensityForm::Constant { .. } => {}
        }
    }

    /// Species whose copy numbers enter the law.
    pub fn reads(&self) -> Vec<usize> {
        match *self {
            PropensityForm::MassAction { reactants, .. } => reactants.species().collect(),
            PropensityForm::HillRepression { repressor, .. } => vec![repressor],
            PropensityForm::ScaledLinear { species, .. } => vec![species],
            PropensityForm::Constant { .. } => Vec::new(),
        }
    }

    /// Maximum of the law over the box `[lower, upper]`.
    pub fn max_over_box(&self, lower: &[T], upper: &[T], volume: T) -> T {
        match self {
            PropensityForm::HillRepression { .. } => self.value(lower, volume),
            _ => self.value(upper, volume),
        }
    }

    pub(crate) fn validate(&self, species_count: usize) -> Result<()> {
        let check_index = |i: usize| {
            if i < species_count {
                Ok(())
            } else {
                Err(Error::InvalidNetwork(format!("species index {i} out of range for {species_count} species")))
            }
        };
        let nonneg = |name: &str, v: T| {
            if v.is_finite() && v >= T::zero() {
                Ok(())
            } else {
                Err(Error::InvalidNetwork(format!("{name} must be finite and nonnegative, got {v}")))
            }
        };
        match *self {
            PropensityForm::MassAction { rate_constant, reactants } => {
                nonneg("rate_constant", rate_constant)?;
                for i in reactants.species() {
                    check_index(i)?;
                }
            }
            PropensityForm::HillRepression { a, b, repressor } => {
                nonneg("a", a)?;
                if !(b.is_finite() && b > T::zero()) {
                    return Err(Error::InvalidNetwork(format!("b must be positive, got {b}")));
                }
                check_index(repressor)?;
            }
            PropensityForm::ScaledLinear { coefficient, species } => {
                nonneg("coefficient", coefficient)?;
                check_index(species)?;
            }
            PropensityForm::Constant { value } => nonneg("value", value)?,
        }
        Ok(())
    }
}

/// Evaluates a single propensity law at `x` with the zero clamp applied.
pub fn evaluate_propensity<T: Scalar>(form: &PropensityForm<T>, x: &[T], volume: T) -> Result<T> {
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidState(format!("component {i} is not finite")));
    }
    Ok(form.value(x, volume))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_dimerization_value() {
        let form = PropensityForm::MassAction { rate_constant: 1000.0, reactants: Reactants::Two(0, 0) };
        assert_eq!(evaluate_propensity(&form, &[15.0], 1.0).unwrap(), 210000.0);
    }

    #[test]
    fn hill_at_zero_repressor() {
        let form = PropensityForm::HillRepression { a: 3000.0, b: 11000.0, repressor: 0 };
        let v: f64 = evaluate_propensity(&form, &[0.0], 1.0).unwrap();
        assert!((v - 3000.0 / 11000.0).abs() < 1e-15);
        assert!((v - 0.2727).abs() < 1e-4);
    }

    #[test]
    fn empty_pool_and_fractional_clamp() {
        let unary = PropensityForm::MassAction { rate_constant: 2.0, reactants: Reactants::One(0) };
        assert_eq!(unary.value(&[0.0], 1.0), 0.0);
        let dimer = PropensityForm::MassAction { rate_constant: 2.0, reactants: Reactants::Two(0, 0) };
        assert_eq!(dimer.value(&[0.5], 1.0), 0.0);
        assert_eq!(dimer.value(&[1.5], 1.0), 0.0);
        let linear = PropensityForm::ScaledLinear { coefficient: 3.0, species: 0 };
        assert_eq!(linear.value(&[-2.0], 1.0), 0.0);
    }

    #[test]
    fn zeroth_and_bimolecular_orders() {
        let inflow = PropensityForm::MassAction { rate_constant: 2.0, reactants: Reactants::None };
        assert_eq!(inflow.value(&[], 3.0), 6.0);
        let hetero = PropensityForm::MassAction { rate_constant: 2.0, reactants: Reactants::Two(0, 1) };
        assert_eq!(hetero.value(&[3.0, 5.0], 2.0), 15.0);
    }

    #[test]
    fn non_finite_state_rejected() {
        let form = PropensityForm::Constant { value: 1.0 };
        assert!(matches!(evaluate_propensity(&form, &[f64::NAN], 1.0), Err(Error::InvalidState(_))));
    }

    #[test]
    fn generic_over_f32() {
        let form = PropensityForm::MassAction { rate_constant: 1000.0f32, reactants: Reactants::Two(0, 0) };
        assert_eq!(form.value(&[15.0f32], 1.0), 210000.0f32);
    }
}
