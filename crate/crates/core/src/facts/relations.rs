//! Phillips, Okun and Beveridge point sets.

use serde::{Deserialize, Serialize};

use super::series::MacroSeries;
use super::stats::{ols, pearson};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub points: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub corr: Option<f64>,
    pub n: usize,
    /// Set when either coordinate never varies.
    pub degenerate: bool,
}

impl Relation {
    pub fn fit(points: Vec<(f64, f64)>) -> Self {
        let (x, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        let slope = ols(&x, &y).map(|f| f.slope);
        let corr = if x.len() >= 2 { pearson(&x, &y) } else { None };
        Relation { n: points.len(), degenerate: slope.is_none() || corr.is_none(), points, slope, corr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relations {
    /// Unemployment rate against nominal wage growth.
    pub phillips_wage: Relation,
    /// Unemployment rate against inflation.
    pub phillips_inflation: Relation,
    /// Change of unemployment against real GDP growth, both in percent.
    pub okun: Relation,
    /// Unemployment rate against vacancy rate.
    pub beveridge: Relation,
}

fn growth(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] / w[0] - 1.0).collect()
}

/// `(100 * diff(u), 100 * growth(gdp))`
pub fn okun_points(unemployment: &[f64], gdp: &[f64]) -> Vec<(f64, f64)> {
    let du = unemployment.windows(2).map(|w| 100.0 * (w[1] - w[0]));
    du.zip(growth(gdp).into_iter().map(|g| 100.0 * g)).collect()
}

pub fn relation_points(s: &MacroSeries) -> Relations {
    let u_next = &s.unemployment[1.min(s.len())..];
    Relations {
        phillips_wage: Relation::fit(u_next.iter().copied().zip(growth(&s.nominal_wage)).collect()),
        phillips_inflation: Relation::fit(u_next.iter().copied().zip(s.inflation.iter().skip(1).copied()).collect()),
        okun: Relation::fit(okun_points(&s.unemployment, &s.real_gdp)),
        beveridge: Relation::fit(s.unemployment.iter().copied().zip(s.vacancy_rate.iter().copied()).collect()),
    }
}
