//! Built-in benchmark networks: a genetic toggle switch, fast dimerization
//! with slow isomerization, and a five-cell reaction-diffusion chain.

use std::fmt;
use std::str::FromStr;

use super::{PropensityForm, Reactants, Reaction, ReactionNetwork};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Avogadro constant (1/mol).
pub const AVOGADRO: f64 = 6.022_140_76e23;

const CELLS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelName {
    Toggle,
    DimerIso,
    RdmeChain,
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toggle" => Ok(ModelName::Toggle),
            "dimer_iso" => Ok(ModelName::DimerIso),
            "rdme_chain" => Ok(ModelName::RdmeChain),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelName::Toggle => "toggle",
            ModelName::DimerIso => "dimer_iso",
            ModelName::RdmeChain => "rdme_chain",
        })
    }
}

/// Optional overrides of the built-in constants.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModelParams {
    /// Toggle production numerator (default 3000).
    pub a: Option<f64>,
    /// Toggle repression constant (default 11000).
    pub b: Option<f64>,
    /// Toggle degradation rate (default 1e-3).
    pub mu: Option<f64>,
    /// Dimerization time-scale separation (default 1e-3).
    pub epsilon: Option<f64>,
    /// Molecules per cell of the reaction-diffusion chain (default 25).
    pub n_omega: Option<u32>,
}

/// A network together with its default initial state.
#[derive(Debug, Clone)]
pub struct BuiltModel<T> {
    pub name: ModelName,
    pub network: ReactionNetwork<T>,
    pub initial_state: Vec<T>,
}

pub fn build_model<T: Scalar>(name: ModelName, params: &ModelParams) -> Result<BuiltModel<T>> {
    match name {
        ModelName::Toggle => toggle(params),
        ModelName::DimerIso => dimer_isomerization(params),
        ModelName::RdmeChain => rdme_chain(params),
    }
}

fn toggle<T: Scalar>(params: &ModelParams) -> Result<BuiltModel<T>> {
    let a = T::of(params.a.unwrap_or(3000.0));
    let b = T::of(params.b.unwrap_or(11000.0));
    let mu = T::of(params.mu.unwrap_or(1e-3));
    let reactions = vec![
        Reaction::new(PropensityForm::HillRepression { a, b, repressor: 1 }, vec![-1, 0]),
        Reaction::new(PropensityForm::HillRepression { a, b, repressor: 0 }, vec![0, -1]),
        Reaction::new(PropensityForm::ScaledLinear { coefficient: mu, species: 0 }, vec![1, 0]),
        Reaction::new(PropensityForm::ScaledLinear { coefficient: mu, species: 1 }, vec![0, 1]),
    ];
    let network = ReactionNetwork::new(vec!["X".into(), "Y".into()], reactions, T::one())?;
    Ok(BuiltModel { name: ModelName::Toggle, network, initial_state: vec![T::of(10.0), T::zero()] })
}

fn dimer_isomerization<T: Scalar>(params: &ModelParams) -> Result<BuiltModel<T>> {
    let eps = params.epsilon.unwrap_or(1e-3);
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {eps}")));
    }
    let fast = T::of(1.0 / eps);
    let slow = T::one();
    let ma = |k: T, reactants: Reactants| PropensityForm::MassAction { rate_constant: k, reactants };
    // species order: x1, x2, y1, y2
    let reactions = vec![
        Reaction::new(ma(fast, Reactants::Two(0, 0)), vec![2, -2, 0, 0]),
        Reaction::new(ma(fast, Reactants::Two(1, 1)), vec![-2, 2, 0, 0]),
        Reaction::new(ma(slow, Reactants::One(1)), vec![0, 1, 0, -1]),
        Reaction::new(ma(slow, Reactants::One(3)), vec![0, -1, 0, 1]),
        Reaction::new(ma(fast, Reactants::Two(3, 3)), vec![0, 0, -2, 2]),
        Reaction::new(ma(fast, Reactants::Two(2, 2)), vec![0, 0, 2, -2]),
    ];
    let species = ["X1", "X2", "Y1", "Y2"].iter().map(|s| s.to_string()).collect();
    let network = ReactionNetwork::new(species, reactions, T::one())?;
    Ok(BuiltModel {
        name: ModelName::DimerIso,
        network,
        initial_state: [15.0, 5.0, 30.0, 10.0].iter().map(|&v| T::of(v)).collect(),
    })
}

/// Physical constants of the reaction-diffusion chain for a given `n_omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdmeConstants {
    /// Cell volume in liters.
    pub cell_volume: f64,
    /// Cell edge length in meters.
    pub h: f64,
    pub k_association: f64,
    pub k_dissociation: f64,
    pub diffusion: f64,
}

impl RdmeConstants {
    pub fn new(n_omega: u32) -> Self {
        let total_volume = 1e-15 * f64::from(n_omega) / 25.0;
        let cell_volume = total_volume / CELLS as f64;
        Self { cell_volume, h: (cell_volume * 1e-3).cbrt(), k_association: 1e8, k_dissociation: 10.0, diffusion: 1e-10 }
    }

    /// Per-molecule jump rate to one neighbour, `d / h^2` in 1/s.
    pub fn hop_rate(&self) -> f64 {
        self.diffusion / (self.h * self.h)
    }
}

fn rdme_chain<T: Scalar>(params: &ModelParams) -> Result<BuiltModel<T>> {
    let n_omega = params.n_omega.unwrap_or(25);
    if n_omega == 0 {
        return Err(Error::InvalidConfig("rdme_chain requires n_omega > 0".into()));
    }
    let c = RdmeConstants::new(n_omega);
    let d = CELLS * 3;
    let idx = |cell: usize, s: usize| 3 * cell + s;
    let column = |entries: &[(usize, i32)]| {
        let mut col = vec![0; d];
        for &(i, n) in entries {
            col[i] = n;
        }
        col
    };
    let hop = T::of(c.hop_rate());
    let mut reactions = Vec::with_capacity(38);
    for cell in 0..CELLS {
        let (x, y, z) = (idx(cell, 0), idx(cell, 1), idx(cell, 2));
        reactions.push(Reaction::new(
            PropensityForm::MassAction {
                rate_constant: T::of(c.k_association / AVOGADRO),
                reactants: Reactants::Two(x, y),
            },
            column(&[(x, 1), (y, 1), (z, -1)]),
        ));
        reactions.push(Reaction::new(
            PropensityForm::MassAction { rate_constant: T::of(c.k_dissociation), reactants: Reactants::One(z) },
            column(&[(z, 1), (x, -1), (y, -1)]),
        ));
    }
    for cell in 0..CELLS - 1 {
        for s in 0..3 {
            for (from, to) in [(cell, cell + 1), (cell + 1, cell)] {
                let (i, j) = (idx(from, s), idx(to, s));
                reactions.push(Reaction::new(
                    PropensityForm::ScaledLinear { coefficient: hop, species: i },
                    column(&[(i, 1), (j, -1)]),
                ));
            }
        }
    }
    let inflow = T::of(c.hop_rate() * f64::from(n_omega));
    let last = CELLS - 1;
    reactions.push(Reaction::new(PropensityForm::Constant { value: inflow }, column(&[(idx(0, 0), -1)])));
    reactions.push(Reaction::new(
        PropensityForm::ScaledLinear { coefficient: hop, species: idx(0, 2) },
        column(&[(idx(0, 2), 1)]),
    ));
    reactions.push(Reaction::new(PropensityForm::Constant { value: inflow }, column(&[(idx(last, 1), -1)])));
    reactions.push(Reaction::new(
        PropensityForm::ScaledLinear { coefficient: hop, species: idx(last, 2) },
        column(&[(idx(last, 2), 1)]),
    ));

    let species = (1..=CELLS).flat_map(|cell| ["X", "Y", "Z"].into_iter().map(move |s| format!("{s}{cell}"))).collect();
    let network = ReactionNetwork::new(species, reactions, T::of(c.cell_volume))?;
    let n = T::of(f64::from(n_omega));
    let initial_state = (0..CELLS).flat_map(|_| [n, n, T::zero()]).collect();
    Ok(BuiltModel { name: ModelName::RdmeChain, network, initial_state })
}
