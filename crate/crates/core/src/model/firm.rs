//! Firm dynamics: demand forecasting, production planning, the log-AR(1)
//! productivity shock, Cobb-Douglas output and the inventory/deposit updates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-step retention of the demand EMA (half-life of four quarters).
pub fn ema_retention() -> f64 {
    0.5f64.powf(0.25)
}

/// Exponential moving average of past total consumption.
///
/// The average is seeded with the first observation; before any observation
/// there is no forecast.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DemandForecast {
    ema: Option<f64>,
}

impl DemandForecast {
    pub fn starting_at(value: f64) -> Self {
        Self { ema: Some(value) }
    }

    pub fn forecast(&self) -> Option<f64> {
        self.ema
    }

    pub fn observe(&mut self, consumption: f64) -> f64 {
        let keep = ema_retention();
        let next = match self.ema {
            None => consumption,
            Some(prev) => keep * prev + (1.0 - keep) * consumption,
        };
        self.ema = Some(next);
        next
    }
}

/// Desired output and labor hours for a demand forecast.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ProductionPlan {
    pub output: f64,
    pub hours: f64,
}

pub fn plan_production(forecast: f64, inventory: f64, alpha: f64) -> ProductionPlan {
    let output = (forecast - inventory).max(0.0);
    ProductionPlan { output, hours: output.powf(1.0 / alpha) }
}

/// Next productivity factor `prev^rho * exp(shock)`.
pub fn evolve_shock(prev: f64, rho: f64, shock: f64) -> f64 {
    prev.powf(rho) * shock.exp()
}

/// Cobb-Douglas output `factor * hours^alpha`.
pub fn produce(hours: f64, factor: f64, alpha: f64) -> f64 {
    if hours <= 0.0 {
        return 0.0;
    }
    factor * hours.powf(alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("inventory would go negative: {inventory} + {output} - {consumption} = {result}")]
pub struct InventoryFault {
    pub inventory: f64,
    pub output: f64,
    pub consumption: f64,
    pub result: f64,
}

/// Inventory carried into the next quarter.
///
/// Rationing never hands out more than `inventory + output`; a shortfall beyond
/// rounding noise is an internal consistency fault.
pub fn update_inventory(inventory: f64, output: f64, consumption: f64) -> Result<f64, InventoryFault> {
    let result = inventory + output - consumption;
    if result >= 0.0 {
        return Ok(result);
    }
    let slack = 1e-9 * (inventory + output).max(1.0);
    if result > -slack {
        Ok(0.0)
    } else {
        Err(InventoryFault { inventory, output, consumption, result })
    }
}

/// Profit tax owed: the rate applied to non-negative profits only.
pub fn profit_tax(revenue: f64, costs: f64, tax_rate: f64) -> f64 {
    tax_rate * (revenue - costs).max(0.0)
}

/// Deposits carried into the next quarter.
pub fn update_deposits(deposits: f64, rate: f64, revenue: f64, wage_bill: f64, tax_rate: f64) -> f64 {
    (1.0 + rate) * deposits + revenue - wage_bill - profit_tax(revenue, wage_bill, tax_rate)
}

/// Profit minus the inventory-risk penalty `chi * p * Y'`.
pub fn firm_reward(price: f64, sales: f64, wage: f64, hours: f64, inventory_risk: f64, next_inventory: f64) -> f64 {
    price * sales - wage * hours - inventory_risk * price * next_inventory
}
