//! Aggregate per-period series derived from an episode log.

use serde::{Deserialize, Serialize};

use crate::kernel::EpisodeLog;

/// One value per period for each aggregate. Growth-type series (inflation)
/// start at zero in the first period, which has no predecessor.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MacroSeries {
    /// `sum_j y_j`
    pub real_gdp: Vec<f64>,
    /// `sum_j p_j y_j`
    pub nominal_gdp: Vec<f64>,
    /// Household spending.
    pub consumption: Vec<f64>,
    /// `sum_j p_j`
    pub cpi: Vec<f64>,
    /// Period-over-period change of the CPI level.
    pub inflation: Vec<f64>,
    /// Hours-weighted mean wage; the plain mean when nobody works.
    pub nominal_wage: Vec<f64>,
    pub real_wage: Vec<f64>,
    pub employment: Vec<f64>,
    pub unemployment: Vec<f64>,
    pub hours: Vec<f64>,
    /// Real GDP per labor hour.
    pub productivity: Vec<f64>,
    pub interest_rate: Vec<f64>,
    /// Unfilled positions per household.
    pub vacancy_rate: Vec<f64>,
}

impl MacroSeries {
    pub fn from_log(log: &EpisodeLog) -> Self {
        let mut s = MacroSeries::default();
        for q in &log.quarters {
            let n = q.households.len() as f64;
            let real: f64 = q.firms.iter().map(|f| f.output).sum();
            let nominal: f64 = q.firms.iter().map(|f| f.price * f.output).sum();
            let cpi: f64 = q.firms.iter().map(|f| f.price).sum();
            let hours: f64 = q.firms.iter().map(|f| f.hours).sum();
            let wage = if hours > 0.0 {
                q.firms.iter().map(|f| f.wage_bill).sum::<f64>() / hours
            } else {
                q.firms.iter().map(|f| f.wage).sum::<f64>() / q.firms.len() as f64
            };
            let employed = q.households.iter().filter(|h| h.employer.is_some()).count() as f64;
            let inflation = match s.cpi.last() {
                Some(prev) => cpi / prev - 1.0,
                None => 0.0,
            };
            s.real_gdp.push(real);
            s.nominal_gdp.push(nominal);
            s.consumption.push(q.households.iter().map(|h| h.spending).sum());
            s.cpi.push(cpi);
            s.inflation.push(inflation);
            s.nominal_wage.push(wage);
            s.real_wage.push(wage / cpi);
            s.employment.push(employed);
            s.unemployment.push(1.0 - employed / n);
            s.hours.push(hours);
            s.productivity.push(if hours > 0.0 { real / hours } else { 0.0 });
            s.interest_rate.push(q.central_bank.rate);
            s.vacancy_rate.push(q.firms.iter().map(|f| f64::from(f.vacancies)).sum::<f64>() / n);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.real_gdp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.real_gdp.is_empty()
    }

    /// Series compared against real GDP, with their report names.
    pub fn named(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("total_employment", &self.employment),
            ("unemployment_rate", &self.unemployment),
            ("consumption_expenditure", &self.consumption),
            ("total_labor_hours", &self.hours),
            ("labor_productivity", &self.productivity),
            ("cpi", &self.cpi),
            ("nominal_wage", &self.nominal_wage),
            ("real_wage", &self.real_wage),
            ("inflation", &self.inflation),
            ("interest_rate", &self.interest_rate),
        ]
    }
}
