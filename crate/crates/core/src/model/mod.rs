//! Agent state and transition equations of the economy.
//!
//! Everything here is a pure function of its inputs; the kernel owns mutation.

pub mod central_bank;
pub mod firm;
pub mod government;
pub mod household;
pub mod labor;
pub mod normalize;

use serde::{Deserialize, Serialize};

pub use central_bank::{cb_reward, compute_inflation, PriceHistory};
pub use firm::{
    evolve_shock, firm_reward, plan_production, produce, profit_tax, update_deposits, update_inventory,
    DemandForecast, InventoryFault, ProductionPlan,
};
pub use government::{distribute_credits, gov_reward, normalize_fractions, welfare_weights};
pub use household::{ration_consumption, spending, utility, Preferences, SavingsFlows};
pub use labor::{accept_applicants, choose_employer, labor_decision, match_labor, select_layoffs, LaborDecision};
pub use normalize::Normalizers;

/// What a household sees of the outside world, filled in from received
/// messages only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HouseholdView {
    /// Latest quoted price of every consumer-facing firm.
    pub prices: Vec<f64>,
    /// Wage at the current employer, zero when unemployed.
    pub wage: f64,
    pub rate: f64,
    pub tax_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdState {
    pub id: u32,
    pub savings: f64,
    /// Skill at every employer, indexed by firm.
    pub skills: Vec<f64>,
    pub employer: Option<u32>,
    pub prefs: Preferences,
    pub discount: f64,
    /// Hours supplied per period when employed.
    pub labor_hours: f64,
    /// Tax credit received this period.
    pub credit: f64,
    pub view: HouseholdView,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    /// The single-good firm of the quarterly economy.
    Goods,
    /// Sells to retail stores only.
    Farm,
    /// Sells directly to households.
    Company,
    /// Buys from farms and sells to households.
    Retail,
}

impl Sector {
    pub fn sells_to_households(self) -> bool {
        !matches!(self, Sector::Farm)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Goods => "goods",
            Sector::Farm => "farm",
            Sector::Company => "company",
            Sector::Retail => "retail",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "goods" => Sector::Goods,
            "farm" => Sector::Farm,
            "company" => Sector::Company,
            "retail" => Sector::Retail,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FirmView {
    pub rate: f64,
    pub tax_rate: f64,
    /// Hours reported by employees this period.
    pub labor: f64,
    /// Goods sold in the most recent completed period.
    pub consumption: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmState {
    pub id: u32,
    pub sector: Sector,
    pub inventory: f64,
    pub deposits: f64,
    pub price: f64,
    pub wage: f64,
    pub alpha: f64,
    pub rho: f64,
    pub shock_mean: f64,
    pub shock_std: f64,
    /// Productivity factor of the current period (`ϵ_t`, 1 at t = 0).
    pub prod_factor: f64,
    /// Factor of the previous period (`ϵ_{t-1}`).
    pub prev_prod_factor: f64,
    /// Shock drawn this period (`ε_t`).
    pub shock: f64,
    pub inventory_risk: f64,
    pub discount: f64,
    pub demand: DemandForecast,
    pub min_skill: f64,
    /// Household ids, ascending.
    pub employees: Vec<u32>,
    pub plan: ProductionPlan,
    pub view: FirmView,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CentralBankView {
    /// `(price, output)` reported by each firm this period.
    pub reports: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralBankState {
    /// Rate per quarter in effect this period.
    pub rate: f64,
    pub prices: PriceHistory,
    /// Gross annual inflation target.
    pub target: f64,
    pub production_weight: f64,
    pub discount: f64,
    pub view: CentralBankView,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GovernmentView {
    pub household_taxes: Vec<f64>,
    pub firm_taxes: Vec<f64>,
    /// Savings reported with each household's tax assessment.
    pub savings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GovernmentState {
    pub tax_household: f64,
    pub tax_firm: f64,
    /// Credit fractions in effect this period, summing to one.
    pub fractions: Vec<f64>,
    pub redistribution: f64,
    pub utility_weight: f64,
    /// Welfare weights in effect this period, summing to one.
    pub weights: Vec<f64>,
    pub discount: f64,
    pub weight_epsilon: f64,
    /// Credits paid out this period.
    pub credits: Vec<f64>,
    pub view: GovernmentView,
}
