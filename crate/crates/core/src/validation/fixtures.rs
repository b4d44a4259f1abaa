//! Small networks with known laws, shared by the suites and the tests.

use crate::error::Result;
use crate::network::{PropensityForm, Reactants, Reaction, ReactionNetwork};

fn mass_action(rate_constant: f64, reactants: Reactants, stoich: Vec<i32>) -> Reaction<f64> {
    Reaction::new(PropensityForm::MassAction { rate_constant, reactants }, stoich)
}

/// `0 -> A` at `birth`, `A -> 0` at `death * a`.
pub fn birth_death(birth: f64, death: f64) -> Result<ReactionNetwork<f64>> {
    ReactionNetwork::new(
        vec!["A".into()],
        vec![mass_action(birth, Reactants::None, vec![-1]), mass_action(death, Reactants::One(0), vec![1])],
        1.0,
    )
}

/// `A -> 0` at `rate * a`.
pub fn decay(rate: f64) -> Result<ReactionNetwork<f64>> {
    ReactionNetwork::new(vec!["A".into()], vec![mass_action(rate, Reactants::One(0), vec![1])], 1.0)
}

/// `0 -> A` at `rate`.
pub fn pure_birth(rate: f64) -> Result<ReactionNetwork<f64>> {
    ReactionNetwork::new(vec!["A".into()], vec![mass_action(rate, Reactants::None, vec![-1])], 1.0)
}

/// Density-dependent `A <-> B` with unit rates at size `omega`, started
/// with all `omega` molecules as `A`.
pub fn conversion(omega: f64) -> Result<(ReactionNetwork<f64>, Vec<f64>)> {
    let net = ReactionNetwork::new(
        vec!["A".into(), "B".into()],
        vec![mass_action(1.0, Reactants::One(0), vec![1, -1]), mass_action(1.0, Reactants::One(1), vec![-1, 1])],
        omega,
    )?;
    Ok((net, vec![omega.round(), 0.0]))
}
