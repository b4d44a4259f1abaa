//! Reaction networks: species, propensity laws and stoichiometry.
//!
//! Firing channel `r` maps the state `x` to `x - N_r`, where `N_r` is the
//! channel's stoichiometric column. Positive entries of `N_r` are consumed.

mod models;
mod propensity;

pub use models::{build_model, BuiltModel, ModelName, ModelParams, AVOGADRO};
pub use propensity::{evaluate_propensity, PropensityForm, Reactants};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One reaction channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction<T> {
    pub propensity: PropensityForm<T>,
    /// Column `N_r`; firing maps `x -> x - N_r`.
    pub stoich: Vec<i32>,
}

impl<T: Scalar> Reaction<T> {
    pub fn new(propensity: PropensityForm<T>, stoich: Vec<i32>) -> Self {
        Self { propensity, stoich }
    }
}

/// Immutable reaction network. Shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork<T> {
    species: Vec<String>,
    reactions: Vec<Reaction<T>>,
    volume: T,
    // (species, amount) pairs removed by each channel
    consumed: Vec<Vec<(usize, T)>>,
    // sparse state increments -N_r
    deltas: Vec<Vec<(usize, T)>>,
    dependencies: Vec<Vec<usize>>,
}

impl<T: Scalar> ReactionNetwork<T> {
    pub fn new(species: Vec<String>, reactions: Vec<Reaction<T>>, volume: T) -> Result<Self> {
        let d = species.len();
        if !(volume.is_finite() && volume > T::zero()) {
            return Err(Error::InvalidNetwork(format!("volume must be positive, got {volume}")));
        }
        for (r, reaction) in reactions.iter().enumerate() {
            if reaction.stoich.len() != d {
                return Err(Error::InvalidNetwork(format!(
                    "reaction {r}: stoichiometric column has length {} but there are {d} species",
                    reaction.stoich.len()
                )));
            }
            reaction.propensity.validate(d)?;
        }
        let consumed = reactions
            .iter()
            .map(|re| {
                re.stoich.iter().enumerate().filter(|(_, &n)| n > 0).map(|(i, &n)| (i, T::of(n as f64))).collect()
            })
            .collect();
        let deltas = reactions
            .iter()
            .map(|re| {
                re.stoich.iter().enumerate().filter(|(_, &n)| n != 0).map(|(i, &n)| (i, T::of(-(n as f64)))).collect()
            })
            .collect();
        let mut net = Self { species, reactions, volume, consumed, deltas, dependencies: Vec::new() };
        net.dependencies = net.compute_dependencies();
        Ok(net)
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn reactions(&self) -> &[Reaction<T>] {
        &self.reactions
    }

    pub fn reaction_count(&self) -> usize {
        self.reactions.len()
    }

    pub fn volume(&self) -> T {
        self.volume
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    /// Species read by channel `r`: the law's arguments plus every consumed
    /// species (the negative-copy-number guard reads those).
    pub fn reads(&self, r: usize) -> Vec<usize> {
        let mut reads = self.reactions[r].propensity.reads();
        reads.extend(self.consumed[r].iter().map(|&(i, _)| i));
        reads.sort_unstable();
        reads.dedup();
        reads
    }

    /// Propensity of channel `r`, zero whenever firing would push a consumed
    /// species below zero.
    #[inline]
    pub fn propensity(&self, r: usize, x: &[T]) -> T {
        if self.is_clamped(r, x) {
            return T::zero();
        }
        self.reactions[r].propensity.value(x, self.volume)
    }

    #[inline]
    pub(crate) fn is_clamped(&self, r: usize, x: &[T]) -> bool {
        self.consumed[r].iter().any(|&(i, amount)| x[i] < amount)
    }

    /// Applies one firing of channel `r` in place.
    #[inline]
    pub fn fire(&self, r: usize, x: &mut [T]) {
        for &(i, delta) in &self.deltas[r] {
            x[i] = x[i] + delta;
        }
    }

    /// Sum of all channel propensities.
    pub fn total_intensity(&self, x: &[T]) -> T {
        (0..self.reactions.len()).map(|r| self.propensity(r, x)).sum()
    }

    /// For each channel `r`, the channels whose propensity must be refreshed
    /// after `r` fires. Always contains `r`.
    pub fn dependency_sets(&self) -> &[Vec<usize>] {
        &self.dependencies
    }

    fn compute_dependencies(&self) -> Vec<Vec<usize>> {
        let reads: Vec<Vec<usize>> = (0..self.reactions.len()).map(|s| self.reads(s)).collect();
        (0..self.reactions.len())
            .map(|r| {
                let changed: Vec<usize> = self.deltas[r].iter().map(|&(i, _)| i).collect();
                let mut deps: Vec<usize> = (0..self.reactions.len())
                    .filter(|&s| s == r || reads[s].iter().any(|i| changed.contains(i)))
                    .collect();
                deps.sort_unstable();
                deps
            })
            .collect()
    }

    /// Frobenius norm of the stoichiometric matrix.
    pub fn stoich_frobenius_norm(&self) -> T {
        self.reactions.iter().flat_map(|re| re.stoich.iter()).map(|&n| T::of((n * n) as f64)).sum::<T>().sqrt()
    }

    /// Converts the network to another scalar type.
    pub fn cast<U: Scalar>(&self) -> ReactionNetwork<U> {
        let c = |v: T| U::of(v.to_f64().unwrap_or(f64::NAN));
        let reactions = self
            .reactions
            .iter()
            .map(|re| {
                let propensity = match re.propensity {
                    PropensityForm::MassAction { rate_constant, reactants } => {
                        PropensityForm::MassAction { rate_constant: c(rate_constant), reactants }
                    }
                    PropensityForm::HillRepression { a, b, repressor } => {
                        PropensityForm::HillRepression { a: c(a), b: c(b), repressor }
                    }
                    PropensityForm::ScaledLinear { coefficient, species } => {
                        PropensityForm::ScaledLinear { coefficient: c(coefficient), species }
                    }
                    PropensityForm::Constant { value } => PropensityForm::Constant { value: c(value) },
                };
                Reaction::new(propensity, re.stoich.clone())
            })
            .collect();
        ReactionNetwork::new(self.species.clone(), reactions, c(self.volume)).expect("cast preserves validity")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn birth_death() -> ReactionNetwork<f64> {
        ReactionNetwork::new(
            vec!["A".into()],
            vec![
                Reaction::new(PropensityForm::Constant { value: 5.0 }, vec![-1]),
                Reaction::new(PropensityForm::MassAction { rate_constant: 1.0, reactants: Reactants::One(0) }, vec![1]),
            ],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn birth_death_total_intensity() {
        assert_eq!(birth_death().total_intensity(&[3.0]), 8.0);
    }

    #[test]
    fn zero_state_zero_intensity() {
        let net = ReactionNetwork::new(
            vec!["A".into(), "B".into()],
            vec![
                Reaction::new(
                    PropensityForm::MassAction { rate_constant: 1.0, reactants: Reactants::One(0) },
                    vec![1, -1],
                ),
                Reaction::new(
                    PropensityForm::MassAction { rate_constant: 2.0, reactants: Reactants::Two(0, 1) },
                    vec![1, 1],
                ),
            ],
            1.0,
        )
        .unwrap();
        assert_eq!(net.total_intensity(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn decay_sign_convention() {
        let net = ReactionNetwork::new(
            vec!["A".into()],
            vec![Reaction::new(
                PropensityForm::MassAction { rate_constant: 1.0, reactants: Reactants::One(0) },
                vec![1],
            )],
            1.0,
        )
        .unwrap();
        let mut x = [5.0];
        net.fire(0, &mut x);
        assert_eq!(x, [4.0]);
    }

    #[test]
    fn consumption_guard_on_fractional_state() {
        let net = ReactionNetwork::new(
            vec!["A".into()],
            vec![Reaction::new(PropensityForm::ScaledLinear { coefficient: 2.0, species: 0 }, vec![1])],
            1.0,
        )
        .unwrap();
        assert_eq!(net.propensity(0, &[0.5]), 0.0);
        assert_eq!(net.propensity(0, &[1.5]), 3.0);
    }

    #[test]
    fn inflow_depends_only_on_readers() {
        let net = ReactionNetwork::new(
            vec!["A".into(), "B".into()],
            vec![
                Reaction::new(PropensityForm::Constant { value: 1.0 }, vec![-1, 0]),
                Reaction::new(PropensityForm::ScaledLinear { coefficient: 1.0, species: 0 }, vec![1, 0]),
                Reaction::new(PropensityForm::ScaledLinear { coefficient: 1.0, species: 1 }, vec![0, 1]),
            ],
            1.0,
        )
        .unwrap();
        assert_eq!(net.dependency_sets()[0], vec![0, 1]);
        assert_eq!(net.dependency_sets()[2], vec![2]);
    }

    #[test]
    fn isomerization_pair_depends_on_both() {
        let net = ReactionNetwork::new(
            vec!["A".into(), "B".into()],
            vec![
                Reaction::new(PropensityForm::ScaledLinear { coefficient: 1.0, species: 0 }, vec![1, -1]),
                Reaction::new(PropensityForm::ScaledLinear { coefficient: 1.0, species: 1 }, vec![-1, 1]),
            ],
            1.0,
        )
        .unwrap();
        assert_eq!(net.dependency_sets()[0], vec![0, 1]);
        assert_eq!(net.dependency_sets()[1], vec![0, 1]);
    }

    #[test]
    fn rejects_bad_shapes() {
        let bad_len = ReactionNetwork::new(
            vec!["A".into()],
            vec![Reaction::new(PropensityForm::Constant { value: 1.0 }, vec![-1, 0])],
            1.0,
        );
        assert!(bad_len.is_err());
        let bad_index = ReactionNetwork::new(
            vec!["A".into()],
            vec![Reaction::new(PropensityForm::ScaledLinear { coefficient: 1.0, species: 3 }, vec![1])],
            1.0,
        );
        assert!(bad_index.is_err());
        let bad_volume = ReactionNetwork::<f64>::new(vec!["A".into()], vec![], 0.0);
        assert!(bad_volume.is_err());
    }
}
