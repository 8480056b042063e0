//! Per-agent observations and actions.
//!
//! Feature vectors follow a fixed, versioned field order. Household and firm
//! vectors end with the agent's heterogeneity parameters (skills, elasticity)
//! so that one shared policy per agent type can tell agents apart.

use serde::{Deserialize, Serialize};

/// Bumped whenever a feature layout changes.
pub const OBSERVATION_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentType {
    Household,
    Firm,
    CentralBank,
    Government,
}

impl AgentType {
    pub const ALL: [AgentType; 4] = [AgentType::Household, AgentType::Firm, AgentType::CentralBank, AgentType::Government];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentType::Household => "household",
            AgentType::Firm => "firm",
            AgentType::CentralBank => "central_bank",
            AgentType::Government => "government",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        AgentType::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdObservation {
    pub id: u32,
    pub credit: f64,
    pub tax_rate: f64,
    pub rate: f64,
    /// Price of every consumer-facing firm.
    pub prices: Vec<f64>,
    /// Wage at the employer, zero when unemployed.
    pub wage: f64,
    pub savings: f64,
    /// Heterogeneity suffix: skill at every firm.
    pub skills: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmObservation {
    pub id: u32,
    pub tax_rate: f64,
    pub rate: f64,
    pub labor: f64,
    pub consumption: f64,
    pub shock: f64,
    pub prev_prod_factor: f64,
    pub wage: f64,
    pub price: f64,
    pub inventory: f64,
    pub deposits: f64,
    /// Heterogeneity suffix.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralBankObservation {
    pub t: u32,
    pub rate: f64,
    /// Total price level, most recent first, five entries (empty before any
    /// price report).
    pub price_totals: Vec<f64>,
    pub production: f64,
    /// `Σ_j p_j y_j`, derived from the same firm reports. Not part of the
    /// learner feature vector.
    pub nominal_output: f64,
}

impl CentralBankObservation {
    /// Gross annual inflation from the reported totals.
    pub fn inflation(&self) -> Option<f64> {
        match (self.price_totals.first(), self.price_totals.last()) {
            (Some(now), Some(lag)) => Some(now / lag),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GovernmentObservation {
    pub tax_household: f64,
    pub tax_firm: f64,
    pub household_taxes: Vec<f64>,
    pub firm_taxes: Vec<f64>,
    pub credits: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Observation {
    Household(HouseholdObservation),
    Firm(FirmObservation),
    CentralBank(CentralBankObservation),
    Government(GovernmentObservation),
}

impl Observation {
    pub fn agent_type(&self) -> AgentType {
        match self {
            Observation::Household(_) => AgentType::Household,
            Observation::Firm(_) => AgentType::Firm,
            Observation::CentralBank(_) => AgentType::CentralBank,
            Observation::Government(_) => AgentType::Government,
        }
    }

    pub fn features(&self) -> Vec<f64> {
        match self {
            Observation::Household(o) => {
                let mut v = vec![o.credit, o.tax_rate, o.rate];
                v.extend(&o.prices);
                v.push(o.wage);
                v.push(o.savings);
                v.extend(&o.skills);
                v
            }
            Observation::Firm(o) => vec![
                o.tax_rate,
                o.rate,
                o.labor,
                o.consumption,
                o.shock,
                o.prev_prod_factor,
                o.wage,
                o.price,
                o.inventory,
                o.deposits,
                o.alpha,
            ],
            Observation::CentralBank(o) => {
                let mut v = vec![o.rate];
                let mut totals = o.price_totals.clone();
                totals.resize(5, 0.0);
                v.extend(totals);
                v.push(o.production);
                v
            }
            Observation::Government(o) => {
                let mut v = vec![o.tax_household, o.tax_firm];
                v.extend(&o.household_taxes);
                v.extend(&o.firm_taxes);
                v.extend(&o.credits);
                v.extend(&o.weights);
                v
            }
        }
    }
}

/// Names of the feature vector entries for each agent type.
pub fn feature_names(agent: AgentType, sellers: &[u32], firms: usize, households: usize) -> Vec<String> {
    let indexed = |prefix: &str, ids: &mut dyn Iterator<Item = usize>| -> Vec<String> {
        ids.map(|k| format!("{prefix}:{k}")).collect()
    };
    match agent {
        AgentType::Household => {
            let mut v: Vec<String> = ["credit", "tax_rate", "rate"].map(String::from).to_vec();
            v.extend(indexed("price", &mut sellers.iter().map(|j| *j as usize)));
            v.push("wage".into());
            v.push("savings".into());
            v.extend(indexed("skill", &mut (0..firms)));
            v
        }
        AgentType::Firm => [
            "tax_rate",
            "rate",
            "labor",
            "consumption",
            "shock",
            "prev_prod_factor",
            "wage",
            "price",
            "inventory",
            "deposits",
            "alpha",
        ]
        .map(String::from)
        .to_vec(),
        AgentType::CentralBank => {
            let mut v = vec!["rate".to_string()];
            v.extend(indexed("total_price_lag", &mut (0..5)));
            v.push("production".into());
            v
        }
        AgentType::Government => {
            let mut v: Vec<String> = ["tax_household", "tax_firm"].map(String::from).to_vec();
            v.extend(indexed("household_tax", &mut (0..households)));
            v.extend(indexed("firm_tax", &mut (0..firms)));
            v.extend(indexed("credit", &mut (0..households)));
            v.extend(indexed("weight", &mut (0..households)));
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    /// Goods requested from each consumer-facing firm.
    Household { consumption: Vec<f64> },
    /// Wage and price for the next period.
    Firm { wage: f64, price: f64 },
    /// Interest rate for the next quarter.
    CentralBank { rate: f64 },
    /// Tax rates and credit fractions (summing to one) for the next quarter.
    Government { tax_household: f64, tax_firm: f64, fractions: Vec<f64> },
}

impl Action {
    pub fn agent_type(&self) -> AgentType {
        match self {
            Action::Household { .. } => AgentType::Household,
            Action::Firm { .. } => AgentType::Firm,
            Action::CentralBank { .. } => AgentType::CentralBank,
            Action::Government { .. } => AgentType::Government,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_match_feature_lengths() {
        let hh = Observation::Household(HouseholdObservation {
            id: 0,
            credit: 0.0,
            tax_rate: 0.2,
            rate: 0.03,
            prices: vec![322.0, 255.0],
            wage: 32.06,
            savings: 0.0,
            skills: vec![1.0, 0.9],
        });
        assert_eq!(hh.features().len(), feature_names(AgentType::Household, &[0, 1], 2, 3).len());
        let gov = Observation::Government(GovernmentObservation {
            tax_household: 0.2,
            tax_firm: 0.2,
            household_taxes: vec![0.0; 3],
            firm_taxes: vec![0.0; 2],
            credits: vec![0.0; 3],
            weights: vec![1.0 / 3.0; 3],
        });
        assert_eq!(gov.features().len(), feature_names(AgentType::Government, &[0, 1], 2, 3).len());
        let hf = hh.features();
        assert_eq!(&hf[hf.len() - 2..], &[1.0, 0.9]);
    }

    #[test]
    fn inflation_from_totals() {
        let o = CentralBankObservation {
            t: 5,
            rate: 0.03,
            price_totals: vec![102.0, 101.0, 100.0, 100.0, 100.0],
            production: 1.0,
            nominal_output: 1.0,
        };
        assert_eq!(o.inflation(), Some(1.02));
    }
}
