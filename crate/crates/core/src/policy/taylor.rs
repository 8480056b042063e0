//! Non-inertial Taylor rule and the linear-trend potential output estimate.

use serde::{Deserialize, Serialize};

use crate::grid::snap;

/// Rule constants. Rates and inflation are net quarterly-quoted decimals
/// (0.02 is 2%).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaylorRule {
    pub neutral_rate: f64,
    pub inflation_target: f64,
    pub inflation_weight: f64,
    pub output_weight: f64,
    /// Snap the rate to the nearest central-bank grid value.
    pub snap_to_grid: bool,
}

impl Default for TaylorRule {
    fn default() -> Self {
        Self { neutral_rate: 0.02, inflation_target: 0.02, inflation_weight: 0.5, output_weight: 0.5, snap_to_grid: false }
    }
}

impl TaylorRule {
    /// `r* + pi + a (pi - pi*) + b gap`, snapped when configured.
    pub fn rate(&self, inflation: f64, gap: f64, grid: &[f64]) -> f64 {
        let r = self.neutral_rate
            + inflation
            + self.inflation_weight * (inflation - self.inflation_target)
            + self.output_weight * gap;
        if self.snap_to_grid && !grid.is_empty() {
            snap(grid, r)
        } else {
            r
        }
    }
}

/// The rule with unit-half weights and no snapping.
pub fn taylor_rate(inflation: f64, target: f64, neutral: f64, output: f64, potential: f64) -> f64 {
    let rule = TaylorRule { neutral_rate: neutral, inflation_target: target, ..TaylorRule::default() };
    rule.rate(inflation, output_gap(output, potential), &[])
}

/// Relative output gap `(y - y*) / max(|y*|, 1)`.
pub fn output_gap(output: f64, potential: f64) -> f64 {
    (output - potential) / potential.abs().max(1.0)
}

/// Least-squares line through `(k, y_k)` for the past outputs, evaluated at
/// the next index. One point extrapolates flat; no points yields `None`.
pub fn potential_output(past: &[f64]) -> Option<f64> {
    match past.len() {
        0 => None,
        1 => Some(past[0]),
        n => {
            let nf = n as f64;
            let xbar = (nf - 1.0) / 2.0;
            let ybar = past.iter().sum::<f64>() / nf;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (k, y) in past.iter().enumerate() {
                let dx = k as f64 - xbar;
                sxy += dx * (y - ybar);
                sxx += dx * dx;
            }
            let slope = sxy / sxx;
            Some(ybar + slope * (nf - xbar))
        }
    }
}
