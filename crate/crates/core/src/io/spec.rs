//! TOML run specification.
//!
//! ```toml
//! [model]
//! builtin = "dimer_iso"          # or an inline [model.network] table
//! params = { epsilon = 1e-3 }
//!
//! [run]
//! t_final = 10.0
//! intervals = 50
//! coarse = "lbe"                 # be | lbe | adaptive
//! homogenize = 0.5               # fraction of the interval, or "off"
//!
//! [outputs]
//! directory = "out"
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coarse::{CoarseMethod, Damping, NewtonConfig};
use crate::error::{Error, Result};
use crate::fine::DEFAULT_EVENT_CAP;
use crate::network::{build_model, ModelName, ModelParams, PropensityForm, Reactants, Reaction, ReactionNetwork};
use crate::parareal::{Homogenization, PararealConfig, DEFAULT_SEED, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub model: ModelSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub outputs: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_omega: Option<u32>,
}

impl From<ParamsSection> for ModelParams {
    fn from(p: ParamsSection) -> Self {
        ModelParams { a: p.a, b: p.b, mu: p.mu, epsilon: p.epsilon, n_omega: p.n_omega }
    }
}

/// Inline network. Each reaction lists the net change of copy numbers on
/// firing, keyed by species name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub species: Vec<String>,
    #[serde(default = "unit_volume")]
    pub volume: f64,
    #[serde(default)]
    pub reactions: Vec<ReactionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<f64>>,
}

fn unit_volume() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub change: BTreeMap<String, i32>,
    pub propensity: PropensitySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum PropensitySpec {
    /// Zero to two reactant names; a repeated name is a homodimer.
    MassAction {
        rate_constant: f64,
        reactants: Vec<String>,
    },
    HillRepression {
        a: f64,
        b: f64,
        repressor: String,
    },
    ScaledLinear {
        coefficient: f64,
        species: String,
    },
    Constant {
        value: f64,
    },
}

impl NetworkSpec {
    pub fn build(&self) -> Result<ReactionNetwork<f64>> {
        let index = |name: &str, field: &str| -> Result<usize> {
            self.species
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::Schema { field: field.into(), message: format!("unknown species '{name}'") })
        };
        let mut reactions = Vec::with_capacity(self.reactions.len());
        for (r, spec) in self.reactions.iter().enumerate() {
            let field = format!("model.network.reactions[{r}]");
            let mut stoich = vec![0; self.species.len()];
            for (name, &delta) in &spec.change {
                stoich[index(name, &format!("{field}.change"))?] = -delta;
            }
            let pfield = format!("{field}.propensity");
            let propensity = match &spec.propensity {
                PropensitySpec::MassAction { rate_constant, reactants } => {
                    let reactants = match reactants.as_slice() {
                        [] => Reactants::None,
                        [a] => Reactants::One(index(a, &pfield)?),
                        [a, b] => Reactants::Two(index(a, &pfield)?, index(b, &pfield)?),
                        _ => {
                            return Err(Error::Schema {
                                field: format!("{pfield}.reactants"),
                                message: "at most two reactants are supported".into(),
                            })
                        }
                    };
                    PropensityForm::MassAction { rate_constant: *rate_constant, reactants }
                }
                PropensitySpec::HillRepression { a, b, repressor } => {
                    PropensityForm::HillRepression { a: *a, b: *b, repressor: index(repressor, &pfield)? }
                }
                PropensitySpec::ScaledLinear { coefficient, species } => {
                    PropensityForm::ScaledLinear { coefficient: *coefficient, species: index(species, &pfield)? }
                }
                PropensitySpec::Constant { value } => PropensityForm::Constant { value: *value },
            };
            reactions.push(Reaction::new(propensity, stoich));
        }
        ReactionNetwork::new(self.species.clone(), reactions, self.volume)
            .map_err(|e| Error::Schema { field: "model.network".into(), message: e.to_string() })
    }

    pub fn from_network(net: &ReactionNetwork<f64>, initial_state: Option<&[f64]>) -> Self {
        let species = net.species().to_vec();
        let name = |i: usize| species[i].clone();
        let reactions = net
            .reactions()
            .iter()
            .map(|r| {
                let change =
                    r.stoich.iter().enumerate().filter(|(_, &n)| n != 0).map(|(i, &n)| (name(i), -n)).collect();
                let propensity = match r.propensity {
                    PropensityForm::MassAction { rate_constant, reactants } => PropensitySpec::MassAction {
                        rate_constant,
                        reactants: match reactants {
                            Reactants::None => vec![],
                            Reactants::One(i) => vec![name(i)],
                            Reactants::Two(i, j) => vec![name(i), name(j)],
                        },
                    },
                    PropensityForm::HillRepression { a, b, repressor } => {
                        PropensitySpec::HillRepression { a, b, repressor: name(repressor) }
                    }
                    PropensityForm::ScaledLinear { coefficient, species } => {
                        PropensitySpec::ScaledLinear { coefficient, species: name(species) }
                    }
                    PropensityForm::Constant { value } => PropensitySpec::Constant { value },
                };
                ReactionSpec { name: None, change, propensity }
            })
            .collect();
        NetworkSpec { species, volume: net.volume(), reactions, initial_state: initial_state.map(<[f64]>::to_vec) }
    }
}

/// Fraction of the interval, or the keyword `"off"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HomogenizeSetting {
    Fraction(f64),
    Keyword(String),
}

impl HomogenizeSetting {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "off" => Ok(HomogenizeSetting::Keyword("off".into())),
            other => other.parse::<f64>().map(HomogenizeSetting::Fraction).map_err(|_| Error::Schema {
                field: "run.homogenize".into(),
                message: format!("expected a fraction in (0, 1] or \"off\", got '{other}'"),
            }),
        }
    }

    fn resolve(&self) -> Result<Homogenization<f64>> {
        match self {
            HomogenizeSetting::Fraction(f) => Ok(Homogenization::Fraction(*f)),
            HomogenizeSetting::Keyword(k) if k == "off" => Ok(Homogenization::Off),
            HomogenizeSetting::Keyword(k) => Err(Error::Schema {
                field: "run.homogenize".into(),
                message: format!("expected a fraction in (0, 1] or \"off\", got '{k}'"),
            }),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `be`, `lbe` or `adaptive`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homogenize: Option<HomogenizeSetting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_cap: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default = "yes")]
    pub convergence: bool,
    #[serde(default = "yes")]
    pub trajectories: bool,
    #[serde(default)]
    pub iterates: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: None, convergence: true, trajectories: true, iterates: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    /// Molecules per cell of the reaction-diffusion chain for the size sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<u32>>,
    /// System sizes for the fluctuation study on `A <-> B`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<f64>>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "unit_volume")]
    pub time: f64,
}

fn default_replicas() -> usize {
    200
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self { sizes: None, omegas: None, replicas: default_replicas(), time: 1.0 }
    }
}

/// A spec with every default filled in and the network built.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub label: String,
    pub builtin: Option<ModelName>,
    pub params: ModelParams,
    pub network: ReactionNetwork<f64>,
    pub initial_state: Vec<f64>,
    pub config: PararealConfig<f64>,
    pub threads: Option<usize>,
    pub outputs: OutputSection,
    /// The input spec with all run defaults written out.
    pub echo: ModelSpec,
}

fn schema(field: &str, message: impl Into<String>) -> Error {
    Error::Schema { field: field.into(), message: message.into() }
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| schema(&toml_field(&e, text), e.message().trim().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn builtin(name: ModelName) -> Self {
        ModelSpec {
            model: ModelSection { builtin: Some(name.to_string()), ..Default::default() },
            ..Default::default()
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| schema("spec", e.to_string()))
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let m = &self.model;
        let (label, builtin, params, network, default_state) = match (&m.builtin, &m.network) {
            (Some(_), Some(_)) => return Err(schema("model", "give either builtin or network, not both")),
            (None, None) => return Err(schema("model", "one of builtin or network is required")),
            (Some(name), None) => {
                let name: ModelName = name.parse().map_err(|e: Error| schema("model.builtin", e.to_string()))?;
                let params: ModelParams = m.params.unwrap_or_default().into();
                let built = build_model::<f64>(name, &params).map_err(|e| schema("model.params", e.to_string()))?;
                (name.to_string(), Some(name), params, built.network, Some(built.initial_state))
            }
            (None, Some(net)) => {
                if m.params.is_some() {
                    return Err(schema("model.params", "params apply to builtin models only"));
                }
                (String::from("inline"), None, ModelParams::default(), net.build()?, net.initial_state.clone())
            }
        };
        let initial_state = m
            .initial_state
            .clone()
            .or(default_state)
            .ok_or_else(|| schema("model.initial_state", "required for inline networks"))?;
        if initial_state.len() != network.species_count() {
            return Err(schema(
                "model.initial_state",
                format!("expected {} entries, got {}", network.species_count(), initial_state.len()),
            ));
        }
        if initial_state.iter().any(|v| !(v.is_finite() && *v >= 0.0 && v.fract() == 0.0)) {
            return Err(schema("model.initial_state", "entries must be nonnegative integers"));
        }

        let run = self.run.with_defaults(builtin);
        let t_final = run.t_final.ok_or_else(|| schema("run.t_final", "required for inline networks"))?;
        let intervals = run.intervals.unwrap_or(50);
        let mut config = PararealConfig::new(t_final, intervals);
        config.max_iterations = run.max_iterations.unwrap_or(20);
        config.residual_tolerance = run.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        config.seed = run.seed.unwrap_or(DEFAULT_SEED);
        config.event_cap = run.event_cap.unwrap_or(DEFAULT_EVENT_CAP);
        config.coarse = match run.coarse.as_deref().unwrap_or("be") {
            "be" => CoarseMethod::BackwardEuler,
            "lbe" => CoarseMethod::LinearizedBackwardEuler,
            "adaptive" => {
                let d = CoarseMethod::<f64>::adaptive_default();
                let CoarseMethod::AdaptiveImplicit { rel_tol, abs_tol } = d else { unreachable!() };
                CoarseMethod::AdaptiveImplicit {
                    rel_tol: run.coarse_rtol.unwrap_or(rel_tol),
                    abs_tol: run.coarse_atol.unwrap_or(abs_tol),
                }
            }
            other => return Err(schema("run.coarse", format!("expected be, lbe or adaptive, got '{other}'"))),
        };
        let newton_default = NewtonConfig::<f64>::default();
        config.newton = NewtonConfig {
            max_iterations: run.newton_max_iterations.unwrap_or(newton_default.max_iterations),
            residual_tolerance: run.newton_tolerance.unwrap_or(newton_default.residual_tolerance),
            damping: Damping::Halving,
        };
        config.homogenization = match &run.homogenize {
            Some(h) => h.resolve()?,
            None => Homogenization::Off,
        };
        config.validate().map_err(|e| schema("run", e.to_string()))?;
        if run.threads == Some(0) {
            return Err(schema("run.threads", "thread count must be positive"));
        }
        let mut echo = self.clone();
        echo.run = run.clone();
        echo.model.initial_state = Some(initial_state.clone());
        Ok(ResolvedRun {
            label,
            builtin,
            params,
            network,
            initial_state,
            config,
            threads: run.threads,
            outputs: self.outputs.clone(),
            echo,
        })
    }
}

impl RunSection {
    /// Fills unset fields with the defaults of `builtin` (or generic ones).
    pub fn with_defaults(&self, builtin: Option<ModelName>) -> RunSection {
        let (t_final, coarse, homogenize) = match builtin {
            Some(ModelName::Toggle) => (Some(5e6), "be", HomogenizeSetting::Keyword("off".into())),
            Some(ModelName::DimerIso) => (Some(10.0), "lbe", HomogenizeSetting::Fraction(0.5)),
            Some(ModelName::RdmeChain) => (Some(1.0), "be", HomogenizeSetting::Fraction(0.25)),
            None => (None, "be", HomogenizeSetting::Keyword("off".into())),
        };
        let coarse = self.coarse.clone().unwrap_or_else(|| coarse.into());
        let adaptive = coarse == "adaptive";
        let d = NewtonConfig::<f64>::default();
        RunSection {
            t_final: self.t_final.or(t_final),
            intervals: self.intervals.or(Some(50)),
            max_iterations: self.max_iterations.or(Some(20)),
            tolerance: self.tolerance.or(Some(DEFAULT_TOLERANCE)),
            seed: self.seed.or(Some(DEFAULT_SEED)),
            coarse: Some(coarse),
            coarse_rtol: if adaptive { self.coarse_rtol.or(Some(1e-6)) } else { self.coarse_rtol },
            coarse_atol: if adaptive { self.coarse_atol.or(Some(1e-8)) } else { self.coarse_atol },
            newton_tolerance: self.newton_tolerance.or(Some(d.residual_tolerance)),
            newton_max_iterations: self.newton_max_iterations.or(Some(d.max_iterations)),
            homogenize: self.homogenize.clone().or(Some(homogenize)),
            threads: self.threads,
            event_cap: self.event_cap.or(Some(DEFAULT_EVENT_CAP)),
        }
    }
}

fn toml_field(e: &toml::de::Error, text: &str) -> String {
    // toml reports the offending key inside backticks for unknown or missing fields
    let msg = e.message();
    if let (Some(a), Some(b)) = (msg.find('`'), msg.rfind('`')) {
        if b > a {
            return msg[a + 1..b].to_string();
        }
    }
    // otherwise recover `table.key` from the line the span points into
    let Some(span) = e.span() else { return "spec".into() };
    let before = &text[..span.start.min(text.len())];
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next().unwrap_or("");
    let Some((key, _)) = line.split_once('=') else { return "spec".into() };
    let table = before[..line_start]
        .lines()
        .rev()
        .find_map(|l| l.trim().strip_prefix('[').map(|h| h.trim_matches(|c| c == '[' || c == ']').trim().to_string()));
    match table {
        Some(t) => format!("{t}.{}", key.trim()),
        None => key.trim().to_string(),
    }
}
