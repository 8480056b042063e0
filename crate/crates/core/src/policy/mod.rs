//! Built-in behavioral rules.
//!
//! A [`Policy`] maps one agent's observation to an action. Built-ins are pure
//! functions of the observation and their own random stream.

pub mod observation;
pub mod taylor;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{decode_all, ActionGrid, Dimension, GridError, DEFAULT_INDEX};
use crate::model::normalize_fractions;
use crate::rng::{stream, Stream};

pub use observation::{
    feature_names, Action, AgentType, CentralBankObservation, FirmObservation, GovernmentObservation,
    HouseholdObservation, Observation, OBSERVATION_VERSION,
};
pub use taylor::{output_gap, potential_output, taylor_rate, TaylorRule};

/// Median income tax bracket.
pub const MEDIAN_TAX: f64 = 0.2350;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{policy} policy cannot act for a {agent} agent")]
    WrongAgent { policy: &'static str, agent: &'static str },
    #[error("remote policy for {0} has no action; drive it through the environment server")]
    Remote(&'static str),
}

/// Config-level binding of a rule to an agent type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicySpec {
    /// Constant grid indices. Empty means every default entry; a single index
    /// applies to every dimension.
    Fixed {
        #[serde(default)]
        index: Vec<usize>,
    },
    /// Uniform draw from every grid dimension.
    RandomGrid,
    Taylor(TaylorRule),
    UniformTax {
        #[serde(default = "median_tax")]
        rate: f64,
    },
    /// Actions arrive over the environment protocol.
    Remote,
}

fn median_tax() -> f64 {
    MEDIAN_TAX
}

impl PolicySpec {
    pub fn fixed() -> Self {
        PolicySpec::Fixed { index: Vec::new() }
    }

    pub fn taylor() -> Self {
        PolicySpec::Taylor(TaylorRule::default())
    }

    pub fn uniform_tax() -> Self {
        PolicySpec::UniformTax { rate: MEDIAN_TAX }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Fixed { .. } => "fixed",
            PolicySpec::RandomGrid => "random-grid",
            PolicySpec::Taylor(_) => "taylor",
            PolicySpec::UniformTax { .. } => "uniform-tax",
            PolicySpec::Remote => "remote",
        }
    }

    pub fn is_remote(&self) -> bool {
        matches!(self, PolicySpec::Remote)
    }

    pub fn validate_for(&self, agent: AgentType) -> Result<(), String> {
        match self {
            PolicySpec::Taylor(_) if agent != AgentType::CentralBank => Err("taylor binds only to central_bank".into()),
            PolicySpec::Taylor(rule) => {
                let all = [rule.neutral_rate, rule.inflation_target, rule.inflation_weight, rule.output_weight];
                if all.iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err("taylor constants must be finite".into())
                }
            }
            PolicySpec::UniformTax { .. } if agent != AgentType::Government => {
                Err("uniform-tax binds only to government".into())
            }
            PolicySpec::UniformTax { rate } if !(0.0..=1.0).contains(rate) => Err(format!("tax rate {rate} outside [0, 1]")),
            _ => Ok(()),
        }
    }

    /// Instantiate for one agent. `agent_index` keys the policy's random
    /// stream, so every agent draws independently.
    pub fn build(&self, agent: AgentType, seed: u64, agent_index: u32) -> Box<dyn Policy> {
        match self {
            PolicySpec::Fixed { index } => Box::new(FixedPolicy { index: index.clone() }),
            PolicySpec::RandomGrid => Box::new(RandomGridPolicy { rng: stream(seed, Stream::Policy(agent_index)) }),
            PolicySpec::Taylor(rule) => Box::new(TaylorPolicy { rule: rule.clone(), outputs: Vec::new() }),
            PolicySpec::UniformTax { rate } => Box::new(UniformTaxPolicy { rate: *rate }),
            PolicySpec::Remote => Box::new(RemotePolicy { agent: agent.as_str() }),
        }
    }
}

pub trait Policy: Send {
    fn act(&mut self, obs: &Observation, grid: &ActionGrid) -> Result<Action, PolicyError>;
}

/// Action dimensions available to the observing agent.
pub fn dimensions<'g>(obs: &Observation, grid: &'g ActionGrid) -> Vec<Dimension<'g>> {
    match obs {
        Observation::Household(o) => {
            let sellers: Vec<u32> = (0..o.prices.len() as u32).collect();
            grid.household_dimensions(&sellers)
        }
        Observation::Firm(_) => grid.firm_dimensions(),
        Observation::CentralBank(_) => grid.cb_dimensions(),
        Observation::Government(o) => grid.government_dimensions(o.household_taxes.len()),
    }
}

/// Assemble an action from one decoded value per dimension. Government
/// credit levels are normalized to fractions.
pub fn action_from_values(agent: AgentType, values: &[f64]) -> Action {
    match agent {
        AgentType::Household => Action::Household { consumption: values.to_vec() },
        AgentType::Firm => Action::Firm { wage: values[0], price: values[1] },
        AgentType::CentralBank => Action::CentralBank { rate: values[0] },
        AgentType::Government => Action::Government {
            tax_household: values[0],
            tax_firm: values[1],
            fractions: normalize_fractions(&values[2..]),
        },
    }
}

/// Decode grid indices into an action.
pub fn decode_action(obs: &Observation, grid: &ActionGrid, index: &[usize]) -> Result<Action, PolicyError> {
    let dims = dimensions(obs, grid);
    let values = decode_all(&dims, index)?;
    Ok(action_from_values(obs.agent_type(), &values))
}

/// `(tau_H, tau_F, f)` with the median rate and equal fractions.
pub fn uniform_tax(households: usize) -> (f64, f64, Vec<f64>) {
    (MEDIAN_TAX, MEDIAN_TAX, vec![1.0 / households as f64; households])
}

/// Uniform draw of one grid value.
pub fn random_grid<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> f64 {
    values[rng.random_range(0..values.len())]
}

pub struct FixedPolicy {
    index: Vec<usize>,
}

impl Policy for FixedPolicy {
    fn act(&mut self, obs: &Observation, grid: &ActionGrid) -> Result<Action, PolicyError> {
        let n = dimensions(obs, grid).len();
        let index = match self.index.as_slice() {
            [] => vec![DEFAULT_INDEX; n],
            [k] => vec![*k; n],
            ks => ks.to_vec(),
        };
        decode_action(obs, grid, &index)
    }
}

pub struct RandomGridPolicy {
    rng: ChaCha8Rng,
}

impl Policy for RandomGridPolicy {
    fn act(&mut self, obs: &Observation, grid: &ActionGrid) -> Result<Action, PolicyError> {
        let values: Vec<f64> = dimensions(obs, grid).iter().map(|d| random_grid(d.values, &mut self.rng)).collect();
        Ok(action_from_values(obs.agent_type(), &values))
    }
}

/// Keeps the history of nominal outputs it has been shown.
pub struct TaylorPolicy {
    rule: TaylorRule,
    outputs: Vec<f64>,
}

impl Policy for TaylorPolicy {
    fn act(&mut self, obs: &Observation, grid: &ActionGrid) -> Result<Action, PolicyError> {
        let Observation::CentralBank(o) = obs else {
            return Err(PolicyError::WrongAgent { policy: "taylor", agent: obs.agent_type().as_str() });
        };
        let inflation = o.inflation().map_or(self.rule.inflation_target, |gross| gross - 1.0);
        let gap = potential_output(&self.outputs).map_or(0.0, |p| output_gap(o.nominal_output, p));
        self.outputs.push(o.nominal_output);
        Ok(Action::CentralBank { rate: self.rule.rate(inflation, gap, &grid.cb_rate) })
    }
}

pub struct UniformTaxPolicy {
    rate: f64,
}

impl Policy for UniformTaxPolicy {
    fn act(&mut self, obs: &Observation, _grid: &ActionGrid) -> Result<Action, PolicyError> {
        let Observation::Government(o) = obs else {
            return Err(PolicyError::WrongAgent { policy: "uniform-tax", agent: obs.agent_type().as_str() });
        };
        let n = o.household_taxes.len();
        Ok(Action::Government { tax_household: self.rate, tax_firm: self.rate, fractions: vec![1.0 / n as f64; n] })
    }
}

pub struct RemotePolicy {
    agent: &'static str,
}

impl Policy for RemotePolicy {
    fn act(&mut self, _obs: &Observation, _grid: &ActionGrid) -> Result<Action, PolicyError> {
        Err(PolicyError::Remote(self.agent))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gov_obs(n: usize) -> Observation {
        Observation::Government(GovernmentObservation {
            tax_household: 0.1,
            tax_firm: 0.1,
            household_taxes: vec![5.0; n],
            firm_taxes: vec![1.0],
            credits: vec![0.0; n],
            weights: vec![1.0 / n as f64; n],
        })
    }

    fn cb_obs(totals: Vec<f64>, nominal: f64) -> Observation {
        Observation::CentralBank(CentralBankObservation {
            t: 0,
            rate: 0.03,
            price_totals: totals,
            production: 1.0,
            nominal_output: nominal,
        })
    }

    #[test]
    fn spec_round_trips_through_toml() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct W {
            p: PolicySpec,
        }
        for p in [PolicySpec::fixed(), PolicySpec::RandomGrid, PolicySpec::taylor(), PolicySpec::uniform_tax(), PolicySpec::Remote] {
            let w = W { p };
            let text = toml::to_string(&w).unwrap();
            assert_eq!(toml::from_str::<W>(&text).unwrap(), w);
        }
        let w: W = toml::from_str("p = { kind = \"taylor\", snap_to_grid = true }").unwrap();
        assert_eq!(w.p, PolicySpec::Taylor(TaylorRule { snap_to_grid: true, ..TaylorRule::default() }));
        assert!(toml::from_str::<W>("p = { kind = \"taylor\", bogus = 1 }").is_err());
    }

    #[test]
    fn binding_restrictions() {
        assert!(PolicySpec::taylor().validate_for(AgentType::Firm).is_err());
        assert!(PolicySpec::taylor().validate_for(AgentType::CentralBank).is_ok());
        assert!(PolicySpec::uniform_tax().validate_for(AgentType::Household).is_err());
        assert!(PolicySpec::uniform_tax().validate_for(AgentType::Government).is_ok());
        assert!(PolicySpec::RandomGrid.validate_for(AgentType::Government).is_ok());
    }

    #[test]
    fn uniform_tax_is_state_independent() {
        assert_eq!(uniform_tax(4), (0.2350, 0.2350, vec![0.25; 4]));
        assert_eq!(uniform_tax(1).2, vec![1.0]);
        let mut p = PolicySpec::uniform_tax().build(AgentType::Government, 0, 0);
        let grid = ActionGrid::default();
        let a = p.act(&gov_obs(3), &grid).unwrap();
        assert_eq!(a, Action::Government { tax_household: 0.235, tax_firm: 0.235, fractions: vec![1.0 / 3.0; 3] });
    }

    #[test]
    fn fixed_defaults_and_broadcast() {
        let grid = ActionGrid::default();
        let a = PolicySpec::fixed().build(AgentType::Government, 0, 0).act(&gov_obs(2), &grid).unwrap();
        assert_eq!(a, Action::Government { tax_household: 0.235, tax_firm: 0.235, fractions: vec![0.5, 0.5] });
        let a = PolicySpec::Fixed { index: vec![4] }.build(AgentType::CentralBank, 0, 0).act(&cb_obs(vec![], 0.0), &grid);
        assert_eq!(a.unwrap(), Action::CentralBank { rate: 0.0575 });
        let bad = PolicySpec::Fixed { index: vec![9] }.build(AgentType::CentralBank, 0, 0).act(&cb_obs(vec![], 0.0), &grid);
        assert!(matches!(bad, Err(PolicyError::Grid(GridError::IndexOutOfRange { .. }))));
    }

    #[test]
    fn random_grid_single_element_and_reproducible() {
        let mut rng = stream(1, Stream::Policy(0));
        assert_eq!(random_grid(&[3.5], &mut rng), 3.5);
        let grid = ActionGrid::default();
        let draw = |seed| {
            let mut p = PolicySpec::RandomGrid.build(AgentType::Government, seed, 7);
            (0..20).map(|_| p.act(&gov_obs(3), &grid).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn random_grid_is_uniform() {
        let mut rng = stream(42, Stream::Policy(3));
        let values = [0.0, 1.0, 2.0, 3.0, 4.0];
        let draws = 100_000;
        let mut counts = [0usize; 5];
        for _ in 0..draws {
            counts[random_grid(&values, &mut rng) as usize] += 1;
        }
        let p = 0.2;
        let mean = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() <= 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn taylor_tracks_output_history() {
        let grid = ActionGrid::default();
        let mut p = PolicySpec::taylor().build(AgentType::CentralBank, 0, 0);
        let at_target = vec![102.0, 101.0, 100.5, 100.2, 100.0];
        // first call: no history, zero gap
        let Action::CentralBank { rate } = p.act(&cb_obs(at_target.clone(), 100.0), &grid).unwrap() else { panic!() };
        assert!((rate - 0.04).abs() < 1e-12);
        // flat history, output 10% above trend
        let Action::CentralBank { rate } = p.act(&cb_obs(at_target, 110.0), &grid).unwrap() else { panic!() };
        assert!((rate - 0.09).abs() < 1e-12);
        assert!(p.act(&gov_obs(1), &grid).is_err());
    }

    #[test]
    fn remote_refuses_to_act() {
        let mut p = PolicySpec::Remote.build(AgentType::Firm, 0, 0);
        let grid = ActionGrid::default();
        assert!(matches!(p.act(&cb_obs(vec![], 0.0), &grid), Err(PolicyError::Remote("firm"))));
    }
}
