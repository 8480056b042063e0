use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Total price level `Σ_j p_j` over the last five quarters.
///
/// Until four quarters have elapsed the first recorded total stands in for the
/// missing four-quarter lag.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PriceHistory {
    totals: VecDeque<f64>,
}

impl PriceHistory {
    pub const LEN: usize = 5;

    pub fn push(&mut self, total: f64) {
        if self.totals.len() == Self::LEN {
            self.totals.pop_front();
        }
        self.totals.push_back(total);
    }

    pub fn is_empty(&self) -> bool {
        self.totals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.totals.len()
    }

    /// Totals from most recent to oldest, padded with the oldest known value
    /// to five entries. Empty when nothing has been recorded.
    pub fn recent(&self) -> Vec<f64> {
        let Some(&oldest) = self.totals.front() else {
            return Vec::new();
        };
        let mut out: Vec<f64> = self.totals.iter().rev().copied().collect();
        out.resize(Self::LEN, oldest);
        out
    }

    /// Gross annual inflation `Σp_t / Σp_{t-4}`, or `None` before any record.
    pub fn inflation(&self) -> Option<f64> {
        let current = *self.totals.back()?;
        let lagged = *self.totals.front()?;
        Some(current / lagged)
    }
}

pub fn compute_inflation(history: &PriceHistory) -> Option<f64> {
    history.inflation()
}

/// Inflation-targeting loss plus a production bonus.
pub fn cb_reward(inflation: f64, target: f64, production_weight: f64, production: f64) -> f64 {
    let gap = inflation - target;
    -(gap * gap) + production_weight * production * production
}
