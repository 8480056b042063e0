//! Household dynamics: proportional rationing, the savings recursion and
//! isoelastic utility.

use serde::{Deserialize, Serialize};

/// Utility parameters of one household.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preferences {
    /// Isoelasticity, in (0, 1).
    pub gamma: f64,
    /// Weight of the quadratic labor disutility.
    pub nu: f64,
    /// Weight of the savings utility.
    pub mu: f64,
}

impl Default for Preferences {
    fn default() -> Self {
        Self { gamma: 0.33, nu: 0.50, mu: 0.10 }
    }
}

/// Allocate `supply` goods across requests.
///
/// Each requester receives `min(req_i, supply * req_i / sum(req))`, so under
/// scarcity goods are shared in proportion to the requests and otherwise every
/// request is filled. All-zero requests yield all-zero allocations.
pub fn ration_consumption(requests: &[f64], supply: f64) -> Vec<f64> {
    let total: f64 = requests.iter().sum();
    if total <= 0.0 {
        return vec![0.0; requests.len()];
    }
    requests.iter().map(|&req| req.min(supply * req / total)).collect()
}

/// Monetary flows of one household over a quarter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavingsFlows {
    pub savings: f64,
    pub rate: f64,
    /// Gross labor income `n̄ · w` at the employer, zero when unemployed.
    pub labor_income: f64,
    /// Consumption spending `Σ_j c_ij p_j`.
    pub spending: f64,
    pub tax_rate: f64,
    pub credit: f64,
}

impl SavingsFlows {
    pub fn income_tax(&self) -> f64 {
        self.tax_rate * self.labor_income
    }

    /// Savings at the start of the next quarter. Negative values are debt.
    pub fn next_savings(&self) -> f64 {
        (1.0 + self.rate) * self.savings + (self.labor_income - self.spending) - self.income_tax() + self.credit
    }
}

/// Consumption spending `Σ_j c_j p_j`.
pub fn spending(consumption: &[f64], prices: &[f64]) -> f64 {
    consumption.iter().zip(prices).map(|(c, p)| c * p).sum()
}

/// Isoelastic utility of consumption and savings minus a quadratic labor cost.
///
/// `sign(0) = 0`, so zero savings contribute nothing.
pub fn utility(consumption: f64, labor: f64, savings: f64, prefs: &Preferences) -> f64 {
    let e = 1.0 - prefs.gamma;
    let savings_term = if savings == 0.0 { 0.0 } else { savings.signum() * savings.abs().powf(e) / e };
    consumption.powf(e) / e - prefs.nu * labor * labor + prefs.mu * savings_term
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rationing_under_scarcity() {
        let got = ration_consumption(&[8.0, 4.0], 10.0);
        assert_relative_eq!(got[0], 20.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(got[1], 10.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn rationing_with_ample_supply() {
        assert_eq!(ration_consumption(&[8.0, 4.0], 20.0), vec![8.0, 4.0]);
    }

    #[test]
    fn rationing_zero_demand() {
        assert_eq!(ration_consumption(&[0.0, 0.0], 5.0), vec![0.0, 0.0]);
        assert_eq!(ration_consumption(&[], 5.0), Vec::<f64>::new());
    }

    fn flows(savings: f64, rate: f64, labor_income: f64, spending: f64, tax_rate: f64, credit: f64) -> SavingsFlows {
        SavingsFlows { savings, rate, labor_income, spending, tax_rate, credit }
    }

    #[test]
    fn savings_all_zero() {
        assert_eq!(flows(0.0, 0.03, 0.0, 0.0, 0.235, 0.0).next_savings(), 0.0);
    }

    #[test]
    fn savings_interest_only() {
        assert_relative_eq!(flows(100.0, 0.03, 0.0, 0.0, 0.37, 0.0).next_savings(), 103.0, max_relative = 1e-15);
    }

    #[test]
    fn savings_with_default_actions() {
        let income = 480.0 * 32.06;
        let spent = spending(&[12.0], &[322.0]);
        let m = flows(0.0, 0.03, income, spent, 0.235, 0.0).next_savings();
        assert_eq!((m * 100.0).round() / 100.0, 7908.43);
    }

    #[test]
    fn utility_edge_values() {
        let prefs = Preferences::default();
        assert_eq!(utility(0.0, 0.0, 0.0, &prefs), 0.0);
        assert_relative_eq!(utility(1.0, 0.0, 0.0, &prefs), 1.0 / 0.67, max_relative = 1e-15);
        assert_relative_eq!(utility(0.0, 0.0, -1.0, &prefs), -0.1 / 0.67, max_relative = 1e-15);
    }

    #[test]
    fn utility_increasing_in_consumption() {
        let prefs = Preferences::default();
        let h = 1e-6;
        for c in [0.01, 0.5, 1.0, 12.0, 240.0] {
            let slope = (utility(c + h, 1.0, 5.0, &prefs) - utility(c, 1.0, 5.0, &prefs)) / h;
            assert!(slope > 0.0, "slope at c={c} is {slope}");
        }
    }
}
