//! Firm-level distribution moments.
//!
//! Per firm and period: size `p * sales`, growth `diff(log size)`,
//! profitability `p * sales - w * hours`, productivity `size / hours`.

use serde::{Deserialize, Serialize};

use crate::kernel::EpisodeLog;

use super::stats::{mean, moments, ols, variance, Moments};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmBlock {
    pub log_size: Option<Moments>,
    pub growth: Option<Moments>,
    pub profitability_change: Option<Moments>,
    pub log_productivity: Option<Moments>,
    /// Slope of each firm's growth-rate variance on its mean log size.
    pub growth_variance_slope: Option<f64>,
    /// Firms entering that slope.
    pub slope_firms: usize,
    /// Firm-periods with zero size, left out of every log transform.
    pub excluded: usize,
    pub observations: usize,
}

/// Pooled firm samples, kept for reuse across episodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FirmSamples {
    pub log_size: Vec<f64>,
    pub growth: Vec<f64>,
    pub profitability_change: Vec<f64>,
    pub log_productivity: Vec<f64>,
    /// Per firm: (mean log size, growth variance).
    pub size_vs_variance: Vec<(f64, f64)>,
    pub excluded: usize,
    pub observations: usize,
}

impl FirmSamples {
    pub fn from_log(log: &EpisodeLog) -> Self {
        let mut s = FirmSamples::default();
        let m = log.quarters.first().map_or(0, |q| q.firms.len());
        for j in 0..m {
            let mut sizes: Vec<Option<f64>> = Vec::new();
            let mut profits = Vec::new();
            for q in &log.quarters {
                let f = &q.firms[j];
                let size = f.price * f.sales;
                s.observations += 1;
                profits.push(size - f.wage * f.hours);
                if size > 0.0 {
                    s.log_size.push(size.ln());
                    if f.hours > 0.0 {
                        s.log_productivity.push((size / f.hours).ln());
                    }
                    sizes.push(Some(size.ln()));
                } else {
                    s.excluded += 1;
                    sizes.push(None);
                }
            }
            let growth: Vec<f64> = sizes
                .windows(2)
                .filter_map(|w| match (w[0], w[1]) {
                    (Some(a), Some(b)) => Some(b - a),
                    _ => None,
                })
                .collect();
            s.profitability_change.extend(profits.windows(2).map(|w| w[1] - w[0]));
            let logs: Vec<f64> = sizes.iter().flatten().copied().collect();
            if growth.len() >= 2 && !logs.is_empty() {
                s.size_vs_variance.push((mean(&logs), variance(&growth)));
            }
            s.growth.extend(growth);
        }
        s
    }

    pub fn merge(&mut self, other: FirmSamples) {
        self.log_size.extend(other.log_size);
        self.growth.extend(other.growth);
        self.profitability_change.extend(other.profitability_change);
        self.log_productivity.extend(other.log_productivity);
        self.size_vs_variance.extend(other.size_vs_variance);
        self.excluded += other.excluded;
        self.observations += other.observations;
    }

    pub fn block(&self) -> FirmBlock {
        let (x, y): (Vec<f64>, Vec<f64>) = self.size_vs_variance.iter().copied().unzip();
        FirmBlock {
            log_size: moments(&self.log_size),
            growth: moments(&self.growth),
            profitability_change: moments(&self.profitability_change),
            log_productivity: moments(&self.log_productivity),
            growth_variance_slope: ols(&x, &y).map(|f| f.slope),
            slope_firms: x.len(),
            excluded: self.excluded,
            observations: self.observations,
        }
    }
}

pub fn firm_moments(log: &EpisodeLog) -> FirmBlock {
    FirmSamples::from_log(log).block()
}
