//! Reward normalization for learners.
//!
//! Raw rewards mix currency, goods and dimensionless quantities at very
//! different scales. Each one is rescaled by the default ("bold") consumption,
//! price and wage of the action grids so that a firm selling the default basket
//! at the default price earns a reward of one, and so on.

use super::household::{utility, Preferences};

#[derive(Debug, Clone, PartialEq)]
pub struct Normalizers {
    /// Default consumption per household, `c̄_i`.
    pub consumption: f64,
    /// Default price per firm, `p̄_j` (common across firms).
    pub price: f64,
    /// Average default wage, `Avg_j w̄_j`.
    pub wage: f64,
    /// Labor hours per employee per period, `n̄`.
    pub labor_hours: f64,
    pub households: usize,
    /// `Σ_j (n̄ · n / m)^{α_j}`: production of every firm at an even split of the
    /// labor force.
    pub reference_output: f64,
}

impl Normalizers {
    pub fn new(consumption: f64, price: f64, wage: f64, labor_hours: f64, households: usize, alphas: &[f64]) -> Self {
        let per_firm_hours = labor_hours * households as f64 / alphas.len().max(1) as f64;
        let reference_output = alphas.iter().map(|a| per_firm_hours.powf(*a)).sum();
        Self { consumption, price, wage, labor_hours, households, reference_output }
    }

    /// `u(Σc / c̄, Σe, m' / (n̄ · w̄))`: labor enters as the employment indicator
    /// and savings are measured in default quarterly wage incomes.
    pub fn household(&self, consumption: f64, employed: bool, next_savings: f64, prefs: &Preferences) -> f64 {
        let e = if employed { 1.0 } else { 0.0 };
        utility(consumption / self.consumption, e, next_savings / (self.labor_hours * self.wage), prefs)
    }

    pub fn firm(&self, raw_reward: f64) -> f64 {
        raw_reward / (self.price * self.consumption * self.households as f64)
    }

    pub fn central_bank(&self, inflation: f64, target: f64, production_weight: f64, production: f64) -> f64 {
        super::central_bank::cb_reward(inflation, target, production_weight, production / self.reference_output)
    }

    /// Normalized household rewards enter directly; credits are measured in
    /// units of `xi · p̄ · c̄`.
    pub fn government(
        &self,
        weights: &[f64],
        normalized_household_rewards: &[f64],
        credits: &[f64],
        theta: f64,
        redistribution: f64,
    ) -> f64 {
        let scale = redistribution * self.price * self.consumption;
        let utility: f64 = weights.iter().zip(normalized_household_rewards).map(|(l, r)| l * r).sum();
        let credit: f64 = if scale > 0.0 {
            weights.iter().zip(credits).map(|(l, k)| l * k / scale).sum()
        } else {
            0.0
        };
        theta * utility + (1.0 - theta) * credit
    }
}
