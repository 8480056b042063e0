//! Discrete action grids and index encoding.
//!
//! Learners act with one integer index per action dimension; the server decodes
//! indices to grid values. The defaults are the calibrated US grids: consumption
//! in goods per firm per quarter, hourly wages, prices for a 200-good basket,
//! federal funds rates and 2022 income tax brackets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of the default ("bold") entry in every five-point grid.
pub const DEFAULT_INDEX: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActionGrid {
    pub household_consumption: Vec<f64>,
    pub firm_wage: Vec<f64>,
    pub firm_price: Vec<f64>,
    pub cb_rate: Vec<f64>,
    pub tax_household: Vec<f64>,
    pub tax_firm: Vec<f64>,
    pub credit_levels: Vec<f64>,
}

impl Default for ActionGrid {
    fn default() -> Self {
        let brackets = vec![0.1000, 0.1675, 0.2350, 0.3025, 0.3700];
        Self {
            household_consumption: vec![0.0, 6.0, 12.0, 18.0, 24.0],
            firm_wage: vec![7.25, 19.65, 32.06, 44.46, 56.87],
            firm_price: vec![188.0, 255.0, 322.0, 389.0, 456.0],
            cb_rate: vec![0.00250, 0.01625, 0.03, 0.04375, 0.05750],
            tax_household: brackets.clone(),
            tax_firm: brackets,
            credit_levels: vec![1.0, 2.0, 3.0, 4.0, 5.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("dimension `{dimension}`: index {index} out of range (grid size {size})")]
    IndexOutOfRange { dimension: String, index: usize, size: usize },
    #[error("expected {expected} action indices, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("dimension `{dimension}`: value {value} is not a grid member")]
    NotAMember { dimension: String, value: f64 },
    #[error("grid `{0}` is empty")]
    Empty(&'static str),
}

/// One named action dimension with its ordered values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dimension<'a> {
    pub name: String,
    pub values: &'a [f64],
}

pub fn decode(dimension: &str, values: &[f64], index: usize) -> Result<f64, GridError> {
    values.get(index).copied().ok_or_else(|| GridError::IndexOutOfRange {
        dimension: dimension.to_string(),
        index,
        size: values.len(),
    })
}

pub fn encode(dimension: &str, values: &[f64], value: f64) -> Result<usize, GridError> {
    values
        .iter()
        .position(|v| *v == value)
        .ok_or_else(|| GridError::NotAMember { dimension: dimension.to_string(), value })
}

/// Nearest grid member; ties resolve to the lower value.
pub fn snap(values: &[f64], x: f64) -> f64 {
    let mut best = values[0];
    for &v in &values[1..] {
        if (v - x).abs() < (best - x).abs() {
            best = v;
        }
    }
    best
}

impl ActionGrid {
    pub fn validate(&self) -> Result<(), GridError> {
        let named: [(&'static str, &Vec<f64>); 7] = [
            ("household_consumption", &self.household_consumption),
            ("firm_wage", &self.firm_wage),
            ("firm_price", &self.firm_price),
            ("cb_rate", &self.cb_rate),
            ("tax_household", &self.tax_household),
            ("tax_firm", &self.tax_firm),
            ("credit_levels", &self.credit_levels),
        ];
        for (name, values) in named {
            if values.is_empty() {
                return Err(GridError::Empty(name));
            }
        }
        Ok(())
    }

    /// Household dimensions: one consumption request per consumer-facing firm.
    pub fn household_dimensions(&self, sellers: &[u32]) -> Vec<Dimension<'_>> {
        sellers
            .iter()
            .map(|j| Dimension { name: format!("consumption:{j}"), values: &self.household_consumption })
            .collect()
    }

    pub fn firm_dimensions(&self) -> Vec<Dimension<'_>> {
        vec![
            Dimension { name: "wage".into(), values: &self.firm_wage },
            Dimension { name: "price".into(), values: &self.firm_price },
        ]
    }

    pub fn cb_dimensions(&self) -> Vec<Dimension<'_>> {
        vec![Dimension { name: "rate".into(), values: &self.cb_rate }]
    }

    pub fn government_dimensions(&self, households: usize) -> Vec<Dimension<'_>> {
        let mut dims = vec![
            Dimension { name: "tax_household".into(), values: &self.tax_household },
            Dimension { name: "tax_firm".into(), values: &self.tax_firm },
        ];
        dims.extend(
            (0..households).map(|i| Dimension { name: format!("credit:{i}"), values: &self.credit_levels }),
        );
        dims
    }

    /// Default entry of a grid: the middle ("bold") value for five-point grids.
    pub fn default_of(values: &[f64]) -> f64 {
        values[DEFAULT_INDEX.min(values.len() - 1)]
    }
}

/// Decode one index per dimension.
pub fn decode_all(dims: &[Dimension<'_>], indices: &[usize]) -> Result<Vec<f64>, GridError> {
    if dims.len() != indices.len() {
        return Err(GridError::WrongArity { expected: dims.len(), got: indices.len() });
    }
    dims.iter().zip(indices).map(|(d, &i)| decode(&d.name, d.values, i)).collect()
}

pub fn encode_all(dims: &[Dimension<'_>], values: &[f64]) -> Result<Vec<usize>, GridError> {
    if dims.len() != values.len() {
        return Err(GridError::WrongArity { expected: dims.len(), got: values.len() });
    }
    dims.iter().zip(values).map(|(d, &v)| encode(&d.name, d.values, v)).collect()
}
